#include "uclab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "uclab/csvio.hpp"

namespace uclab {
namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "configuration rejected:";
  for (const auto& p : problems) {
    out += "\n  - ";
    out += p;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
      return false;
  return true;
}

// Strip one layer of double quotes if the whole token is quoted.
std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    return std::string(s.substr(1, s.size() - 2));
  return std::string(s);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

Config Config::parse(std::string_view text) {
  Config config;
  config.text_ = std::string(text);
  config.digest_ = io::fnv1a64(text);

  std::vector<std::string> problems;
  std::string current;  // current table, "" is the root
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                           : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    // Comments start at '#' outside quotes.
    bool in_quotes = false;
    std::size_t cut = line.size();
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_quotes = !in_quotes;
      if (line[i] == '#' && !in_quotes) {
        cut = i;
        break;
      }
    }
    std::string_view body = trim(line.substr(0, cut));
    if (body.empty()) continue;

    if (body.front() == '[') {
      if (body.back() != ']') {
        problems.push_back("line " + std::to_string(line_no) + ": unterminated table header");
        continue;
      }
      std::string_view name = trim(body.substr(1, body.size() - 2));
      if (!valid_name(name)) {
        problems.push_back("line " + std::to_string(line_no) + ": bad table name '" +
                           std::string(name) + "'");
        continue;
      }
      current = std::string(name);
      config.tables_[current];
      continue;
    }

    const std::size_t eq = body.find('=');
    if (eq == std::string_view::npos) {
      problems.push_back("line " + std::to_string(line_no) +
                         ": expected 'key = value' or '[table]'");
      continue;
    }
    std::string_view key = trim(body.substr(0, eq));
    std::string_view value = trim(body.substr(eq + 1));
    if (!valid_name(key)) {
      problems.push_back("line " + std::to_string(line_no) + ": bad key '" + std::string(key) +
                         "'");
      continue;
    }
    auto& table = config.tables_[current];
    auto [it, inserted] =
        table.emplace(std::string(key), ConfigEntry{std::string(value), line_no});
    if (!inserted)
      problems.push_back("line " + std::to_string(line_no) + ": duplicate key '" +
                         std::string(key) + "' (first set on line " +
                         std::to_string(it->second.line) + ")");
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return config;
}

std::string Config::digest_hex() const { return io::hex64(digest_); }

const ConfigEntry* Config::find(std::string_view table, std::string_view key) const {
  auto t = tables_.find(std::string(table));
  if (t == tables_.end()) return nullptr;
  auto k = t->second.find(std::string(key));
  return k == t->second.end() ? nullptr : &k->second;
}

std::vector<std::pair<std::string, std::string>> Config::all_keys() const {
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& [table, entries] : tables_)
    for (const auto& [key, entry] : entries) keys.emplace_back(table, key);
  return keys;
}

std::vector<std::string> split_list(std::string_view raw) {
  std::vector<std::string> items;
  std::string current;
  bool in_quotes = false;
  for (char c : raw) {
    if (c == '"') {
      in_quotes = !in_quotes;
      current.push_back(c);
      continue;
    }
    if (c == ',' && !in_quotes) {
      items.push_back(unquote(trim(current)));
      current.clear();
      continue;
    }
    current.push_back(c);
  }
  items.push_back(unquote(trim(current)));
  return items;
}

std::string ConfigReader::place(std::string_view table, std::string_view key) const {
  if (table.empty()) return "'" + std::string(key) + "'";
  return "'" + std::string(key) + "' in [" + std::string(table) + "]";
}

const ConfigEntry* ConfigReader::take(std::string_view table, std::string_view key) {
  used_.emplace(std::string(table), std::string(key));
  return config_->find(table, key);
}

bool ConfigReader::has(std::string_view table, std::string_view key) {
  return take(table, key) != nullptr;
}

std::optional<double> ConfigReader::number(std::string_view table, std::string_view key) {
  const ConfigEntry* e = take(table, key);
  if (!e) return std::nullopt;
  const std::string token = unquote(trim(e->raw));
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size()) {
    complain(place(table, key) + ": '" + e->raw + "' is not a number (line " +
             std::to_string(e->line) + ")");
    return std::nullopt;
  }
  return v;
}

double ConfigReader::number_or(std::string_view table, std::string_view key, double fallback) {
  return number(table, key).value_or(fallback);
}

std::optional<long long> ConfigReader::integer(std::string_view table, std::string_view key) {
  const ConfigEntry* e = take(table, key);
  if (!e) return std::nullopt;
  const std::string token = unquote(trim(e->raw));
  long long v = 0;
  auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || p != token.data() + token.size()) {
    complain(place(table, key) + ": '" + e->raw + "' is not an integer (line " +
             std::to_string(e->line) + ")");
    return std::nullopt;
  }
  return v;
}

long long ConfigReader::integer_or(std::string_view table, std::string_view key,
                                   long long fallback) {
  return integer(table, key).value_or(fallback);
}

std::optional<std::string> ConfigReader::word(std::string_view table, std::string_view key) {
  const ConfigEntry* e = take(table, key);
  if (!e) return std::nullopt;
  return unquote(trim(e->raw));
}

std::string ConfigReader::word_or(std::string_view table, std::string_view key,
                                  std::string fallback) {
  return word(table, key).value_or(std::move(fallback));
}

bool ConfigReader::flag_or(std::string_view table, std::string_view key, bool fallback) {
  const ConfigEntry* e = take(table, key);
  if (!e) return fallback;
  std::string token = unquote(trim(e->raw));
  std::transform(token.begin(), token.end(), token.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (token == "true" || token == "yes" || token == "on" || token == "1") return true;
  if (token == "false" || token == "no" || token == "off" || token == "0") return false;
  complain(place(table, key) + ": '" + e->raw + "' is not a boolean (line " +
           std::to_string(e->line) + ")");
  return fallback;
}

std::vector<double> ConfigReader::numbers_or(std::string_view table, std::string_view key,
                                             std::vector<double> fallback) {
  const ConfigEntry* e = take(table, key);
  if (!e) return fallback;
  std::vector<double> values;
  for (const std::string& item : split_list(e->raw)) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size()) {
      complain(place(table, key) + ": '" + item + "' is not a number (line " +
               std::to_string(e->line) + ")");
      return fallback;
    }
    values.push_back(v);
  }
  return values;
}

std::vector<long long> ConfigReader::integers_or(std::string_view table, std::string_view key,
                                                 std::vector<long long> fallback) {
  const ConfigEntry* e = take(table, key);
  if (!e) return fallback;
  std::vector<long long> values;
  for (const std::string& item : split_list(e->raw)) {
    long long v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size()) {
      complain(place(table, key) + ": '" + item + "' is not an integer (line " +
               std::to_string(e->line) + ")");
      return fallback;
    }
    values.push_back(v);
  }
  return values;
}

std::vector<std::string> ConfigReader::words_or(std::string_view table, std::string_view key,
                                                std::vector<std::string> fallback) {
  const ConfigEntry* e = take(table, key);
  if (!e) return fallback;
  return split_list(e->raw);
}

std::vector<std::string> ConfigReader::finish() {
  for (const auto& [table, key] : config_->all_keys()) {
    if (!used_.count({table, key})) {
      const ConfigEntry* e = config_->find(table, key);
      errors_.push_back("unknown key " + place(table, key) + " (line " +
                        std::to_string(e->line) + ")");
    }
  }
  return errors_;
}

}  // namespace uclab
