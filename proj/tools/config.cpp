#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace chainbalance::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

}  // namespace

Settings Settings::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  Settings out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": empty key");
    }
    out.set(key, trim(body.substr(eq + 1)));
  }
  return out;
}

void Settings::merge(const Settings& other) {
  for (const auto& [key, value] : other.values_) values_[key] = value;
}

std::optional<std::string> Settings::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Settings::size(const std::string& key) const {
  const auto v = text(key);
  if (!v) return std::nullopt;
  return parse_integer<std::size_t>(key, *v);
}

std::optional<std::uint64_t> Settings::u64(const std::string& key) const {
  const auto v = text(key);
  if (!v) return std::nullopt;
  return parse_integer<std::uint64_t>(key, *v);
}

std::optional<double> Settings::real(const std::string& key) const {
  const auto v = text(key);
  if (!v) return std::nullopt;
  double value = 0.0;
  const char* end = v->data() + v->size();
  const auto [ptr, ec] = std::from_chars(v->data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ConfigError(key + ": expected a number, got '" + *v + "'");
  }
  return value;
}

std::optional<bool> Settings::boolean(const std::string& key) const {
  const auto v = text(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + *v + "'");
}

}  // namespace chainbalance::cli
