#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace uclab {

// Carries every problem found, not just the first; what() joins them.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct ConfigEntry {
  std::string raw;
  int line = 0;
};

// Structured text: top-level `key = value` lines plus `[table]` sections.
// Values are scalars or comma-separated lists; `#` starts a comment. The
// full grammar is documented in the README.
class Config {
 public:
  static Config parse(std::string_view text);

  const std::string& text() const { return text_; }
  std::uint64_t digest() const { return digest_; }  // FNV-1a over the bytes
  std::string digest_hex() const;

  const ConfigEntry* find(std::string_view table, std::string_view key) const;
  std::vector<std::pair<std::string, std::string>> all_keys() const;

 private:
  std::string text_;
  std::uint64_t digest_ = 0;
  std::map<std::string, std::map<std::string, ConfigEntry>> tables_;
};

// Typed access that accumulates errors and remembers which keys were read,
// so the caller can reject unknown keys at the end.
class ConfigReader {
 public:
  explicit ConfigReader(const Config& config) : config_(&config) {}

  bool has(std::string_view table, std::string_view key);

  std::optional<double> number(std::string_view table, std::string_view key);
  double number_or(std::string_view table, std::string_view key, double fallback);
  std::optional<long long> integer(std::string_view table, std::string_view key);
  long long integer_or(std::string_view table, std::string_view key, long long fallback);
  std::optional<std::string> word(std::string_view table, std::string_view key);
  std::string word_or(std::string_view table, std::string_view key, std::string fallback);
  bool flag_or(std::string_view table, std::string_view key, bool fallback);
  std::vector<double> numbers_or(std::string_view table, std::string_view key,
                                 std::vector<double> fallback);
  std::vector<long long> integers_or(std::string_view table, std::string_view key,
                                     std::vector<long long> fallback);
  std::vector<std::string> words_or(std::string_view table, std::string_view key,
                                    std::vector<std::string> fallback);

  void complain(std::string message) { errors_.push_back(std::move(message)); }
  void check(bool ok, std::string message) {
    if (!ok) complain(std::move(message));
  }

  // Unknown-key rejection plus everything accumulated so far.
  std::vector<std::string> finish();
  bool clean() const { return errors_.empty(); }

 private:
  const ConfigEntry* take(std::string_view table, std::string_view key);
  std::string place(std::string_view table, std::string_view key) const;

  const Config* config_;
  std::set<std::pair<std::string, std::string>> used_;
  std::vector<std::string> errors_;
};

// Comma-split with trimming; quoted segments keep commas and spaces.
std::vector<std::string> split_list(std::string_view raw);

}  // namespace uclab
