#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace chainbalance::cli {

// Bad flags, bad config file content or inconsistent settings.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key -> value settings. Config files hold one `key = value` per line;
// blank lines and lines starting with '#' are ignored.
class Settings {
 public:
  static Settings from_file(const std::filesystem::path& path);

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  // Values from `other` win.
  void merge(const Settings& other);
  bool has(const std::string& key) const { return values_.contains(key); }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::optional<std::string> text(const std::string& key) const;
  std::optional<std::size_t> size(const std::string& key) const;
  std::optional<std::uint64_t> u64(const std::string& key) const;
  std::optional<double> real(const std::string& key) const;
  std::optional<bool> boolean(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace chainbalance::cli
