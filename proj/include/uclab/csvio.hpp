#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

// Text output helpers. All floating point values are rendered with %.17g so
// that a value survives a write/parse round trip exactly and reruns produce
// byte-identical files.

namespace uclab::io {

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string format_int(long long x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld", x);
  return buf;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Minimal row-oriented table builder; rows are appended in sweep order and
// serialized with "\n" line endings only.
class Table {
 public:
  void set_header(std::vector<std::string> cols) { header_ = std::move(cols); }
  void add_row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string to_delimited(char sep) const {
    std::string out;
    auto emit = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out.push_back(sep);
        out += cells[i];
      }
      out.push_back('\n');
    };
    if (!header_.empty()) emit(header_);
    for (const auto& r : rows_) emit(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace uclab::io
