// Mulan ARFF + XML ingestion and dense ARFF emission.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <regex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "chainbalance/dataset.hpp"
#include "chainbalance/error.hpp"

namespace chainbalance {
namespace {

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
  throw Error(ErrorKind::kMalformedArff,
              "ARFF line " + std::to_string(line_no) + ": " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool starts_with_keyword(std::string_view line, std::string_view keyword) {
  if (line.size() < keyword.size()) return false;
  if (lower(line.substr(0, keyword.size())) != keyword) return false;
  return line.size() == keyword.size() ||
         std::isspace(static_cast<unsigned char>(line[keyword.size()]));
}

// Reads a possibly quoted token starting at `pos`; advances `pos` past it.
std::string read_token(std::string_view s, std::size_t& pos) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos >= s.size()) return {};
  const char quote = s[pos];
  std::string out;
  if (quote == '\'' || quote == '"') {
    ++pos;
    while (pos < s.size() && s[pos] != quote) {
      if (s[pos] == '\\' && pos + 1 < s.size()) ++pos;
      out.push_back(s[pos++]);
    }
    if (pos < s.size()) ++pos;  // closing quote
    return out;
  }
  while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) {
    out.push_back(s[pos++]);
  }
  return out;
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"')) {
    std::size_t pos = 0;
    return read_token(s, pos);
  }
  return std::string(s);
}

// Comma split that ignores commas inside quotes.
std::vector<std::string_view> split_fields(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char ch = s[i];
    if (quote) {
      if (ch == '\\') ++i;
      else if (ch == quote) quote = 0;
    } else if (ch == '\'' || ch == '"') {
      quote = ch;
    } else if (ch == ',') {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

struct ArffAttribute {
  AttributeInfo info;
  std::unordered_map<std::string, std::size_t> codes;
};

ArffAttribute parse_attribute(std::string_view line, std::size_t line_no) {
  std::size_t pos = std::string_view("@attribute").size();
  ArffAttribute attr;
  attr.info.name = read_token(line, pos);
  if (attr.info.name.empty()) malformed(line_no, "attribute without a name");
  const std::string_view type = trim(line.substr(pos));
  if (type.empty()) malformed(line_no, "attribute '" + attr.info.name + "' has no type");
  if (type.front() == '{') {
    const auto close = type.rfind('}');
    if (close == std::string_view::npos) malformed(line_no, "unterminated nominal list");
    attr.info.nominal = true;
    for (std::string_view field : split_fields(type.substr(1, close - 1))) {
      std::string value = unquote(field);
      if (value.empty()) continue;
      attr.codes.emplace(value, attr.info.categories.size());
      attr.info.categories.push_back(std::move(value));
    }
    if (attr.info.categories.empty()) malformed(line_no, "empty nominal list");
    return attr;
  }
  const std::string kind = lower(type.substr(0, type.find_first_of(" \t")));
  if (kind != "numeric" && kind != "real" && kind != "integer") {
    malformed(line_no, "unsupported attribute type '" + std::string(type) + "'");
  }
  return attr;
}

double parse_number(std::string_view text, std::size_t line_no) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    malformed(line_no, "cannot parse numeric value '" + std::string(text) + "'");
  }
  return value;
}

double parse_value(const ArffAttribute& attr, std::string_view raw, std::size_t line_no) {
  if (raw == "?") malformed(line_no, "missing values are not supported");
  if (!attr.info.nominal) return parse_number(unquote(raw), line_no);
  const std::string value = unquote(raw);
  const auto it = attr.codes.find(value);
  if (it == attr.codes.end()) {
    malformed(line_no, "value '" + value + "' not declared for '" + attr.info.name + "'");
  }
  return static_cast<double>(it->second);
}

std::string decode_entities(std::string s) {
  static const std::pair<std::string_view, char> kEntities[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
  for (const auto& [entity, ch] : kEntities) {
    std::size_t pos = 0;
    while ((pos = s.find(entity, pos)) != std::string::npos) {
      s.replace(pos, entity.size(), 1, ch);
      ++pos;
    }
  }
  return s;
}

std::string encode_entities(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

std::string quote_name(std::string_view name) {
  std::string out = "'";
  for (char ch : name) {
    if (ch == '\'' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  out.push_back('\'');
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::vector<std::string> parse_label_names(std::istream& xml) {
  const std::string text{std::istreambuf_iterator<char>(xml), std::istreambuf_iterator<char>()};
  static const std::regex kLabel(R"re(<label\s+name\s*=\s*(?:"([^"]*)"|'([^']*)'))re");
  std::vector<std::string> names;
  std::unordered_set<std::string> seen;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kLabel);
       it != std::sregex_iterator(); ++it) {
    std::string name = decode_entities((*it)[1].matched ? (*it)[1].str() : (*it)[2].str());
    if (!seen.insert(name).second) {
      throw Error(ErrorKind::kInvalidArgument, "duplicate label '" + name + "' in XML");
    }
    names.push_back(std::move(name));
  }
  if (names.empty()) throw Error(ErrorKind::kInvalidArgument, "XML declares no labels");
  return names;
}

MultiLabelDataset load_mulan(std::istream& arff, std::istream& xml) {
  const std::vector<std::string> label_names = parse_label_names(xml);

  std::vector<ArffAttribute> attributes;
  std::unordered_map<std::string, std::size_t> attr_index;
  std::vector<std::vector<double>> rows;
  bool in_data = false;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(arff, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '%') continue;
    if (!in_data) {
      if (view.front() != '@') malformed(line_no, "expected a header declaration");
      if (starts_with_keyword(view, "@relation")) continue;
      if (starts_with_keyword(view, "@attribute")) {
        ArffAttribute attr = parse_attribute(view, line_no);
        if (!attr_index.emplace(attr.info.name, attributes.size()).second) {
          malformed(line_no, "duplicate attribute '" + attr.info.name + "'");
        }
        attributes.push_back(std::move(attr));
        continue;
      }
      if (starts_with_keyword(view, "@data")) {
        if (attributes.empty()) malformed(line_no, "@data before any @attribute");
        in_data = true;
        continue;
      }
      malformed(line_no, "unknown declaration '" + std::string(view) + "'");
    }

    std::vector<double> values(attributes.size(), 0.0);
    if (view.front() == '{') {
      if (view.back() != '}') malformed(line_no, "unterminated sparse row");
      const std::string_view body = trim(view.substr(1, view.size() - 2));
      if (!body.empty()) {
        for (std::string_view entry : split_fields(body)) {
          const auto space = entry.find_first_of(" \t");
          if (space == std::string_view::npos) malformed(line_no, "sparse entry without value");
          std::size_t index = 0;
          const std::string_view idx_text = entry.substr(0, space);
          const auto [ptr, ec] =
              std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), index);
          if (ec != std::errc() || ptr != idx_text.data() + idx_text.size() ||
              index >= attributes.size()) {
            malformed(line_no, "bad sparse index '" + std::string(idx_text) + "'");
          }
          values[index] = parse_value(attributes[index], trim(entry.substr(space)), line_no);
        }
      }
    } else {
      const auto fields = split_fields(view);
      if (fields.size() != attributes.size()) {
        malformed(line_no, "row has " + std::to_string(fields.size()) + " values, expected " +
                               std::to_string(attributes.size()));
      }
      for (std::size_t a = 0; a < fields.size(); ++a) {
        values[a] = parse_value(attributes[a], fields[a], line_no);
      }
    }
    rows.push_back(std::move(values));
  }
  if (!in_data) throw Error(ErrorKind::kMalformedArff, "ARFF has no @data section");
  if (rows.empty()) throw Error(ErrorKind::kMalformedArff, "ARFF has no data rows");

  std::vector<std::size_t> label_columns;
  std::vector<bool> is_label(attributes.size(), false);
  for (const auto& name : label_names) {
    const auto it = attr_index.find(name);
    if (it == attr_index.end()) {
      throw Error(ErrorKind::kMissingLabelAttribute,
                  "label '" + name + "' is not an ARFF attribute");
    }
    const ArffAttribute& attr = attributes[it->second];
    if (attr.info.nominal) {
      const std::unordered_set<std::string> cats(attr.info.categories.begin(),
                                                 attr.info.categories.end());
      if (cats != std::unordered_set<std::string>{"0", "1"}) {
        throw Error(ErrorKind::kNonBinaryLabel,
                    "label '" + name + "' must be declared as {0,1}");
      }
    }
    label_columns.push_back(it->second);
    is_label[it->second] = true;
  }

  MultiLabelDataset ds;
  std::vector<std::size_t> feature_columns;
  for (std::size_t a = 0; a < attributes.size(); ++a) {
    if (!is_label[a]) {
      feature_columns.push_back(a);
      ds.feature_info.push_back(attributes[a].info);
    }
  }
  ds.label_names = label_names;
  ds.features = Matrix<double>(rows.size(), feature_columns.size());
  ds.labels = Matrix<Bit>(rows.size(), label_columns.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t f = 0; f < feature_columns.size(); ++f) {
      ds.features(i, f) = rows[i][feature_columns[f]];
    }
    for (std::size_t l = 0; l < label_columns.size(); ++l) {
      const ArffAttribute& attr = attributes[label_columns[l]];
      const double raw = rows[i][label_columns[l]];
      // Nominal labels hold a category code; translate back to the category text.
      const double value =
          attr.info.nominal ? (attr.info.categories[static_cast<std::size_t>(raw)] == "1" ? 1.0 : 0.0)
                            : raw;
      if (value != 0.0 && value != 1.0) {
        throw Error(ErrorKind::kNonBinaryLabel, "row " + std::to_string(i) + ": label '" +
                                                    label_names[l] + "' is not 0/1");
      }
      ds.labels(i, l) = static_cast<Bit>(value);
    }
  }
  return ds;
}

MultiLabelDataset load_mulan_files(const std::filesystem::path& arff,
                                   const std::filesystem::path& xml) {
  std::ifstream arff_in(arff);
  if (!arff_in) throw Error(ErrorKind::kIo, "cannot open " + arff.string());
  std::ifstream xml_in(xml);
  if (!xml_in) throw Error(ErrorKind::kIo, "cannot open " + xml.string());
  return load_mulan(arff_in, xml_in);
}

void write_arff(const MultiLabelDataset& ds, std::ostream& out, const std::string& relation) {
  out << "@relation " << quote_name(relation) << "\n\n";
  for (const AttributeInfo& info : ds.feature_info) {
    out << "@attribute " << quote_name(info.name) << ' ';
    if (info.nominal) {
      out << '{';
      for (std::size_t c = 0; c < info.categories.size(); ++c) {
        out << (c ? "," : "") << quote_name(info.categories[c]);
      }
      out << "}\n";
    } else {
      out << "numeric\n";
    }
  }
  for (const auto& name : ds.label_names) {
    out << "@attribute " << quote_name(name) << " {0,1}\n";
  }
  out << "\n@data\n";
  for (std::size_t i = 0; i < ds.n(); ++i) {
    for (std::size_t f = 0; f < ds.d(); ++f) {
      const AttributeInfo& info = ds.feature_info[f];
      if (info.nominal) {
        out << quote_name(info.categories[static_cast<std::size_t>(ds.features(i, f))]);
      } else {
        out << format_double(ds.features(i, f));
      }
      out << ',';
    }
    for (std::size_t l = 0; l < ds.q(); ++l) {
      out << (l ? "," : "") << static_cast<int>(ds.labels(i, l));
    }
    out << '\n';
  }
}

void write_mulan_xml(const MultiLabelDataset& ds, std::ostream& out) {
  out << "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n"
      << "<labels xmlns=\"http://mulan.sourceforge.net/labels\">\n";
  for (const auto& name : ds.label_names) {
    out << "  <label name=\"" << encode_entities(name) << "\"></label>\n";
  }
  out << "</labels>\n";
}

}  // namespace chainbalance
