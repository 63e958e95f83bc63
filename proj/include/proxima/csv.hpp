#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace proxima::csv {

struct Record {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
  bool unterminated_quote = false;
};

/// Reads delimited text with RFC 4180 quoting. Blank lines are skipped.
/// Unquoted fields are trimmed of surrounding ASCII whitespace.
class Reader {
 public:
  Reader(std::istream& in, char delimiter = ',');
  std::optional<Record> next();

 private:
  std::string buffer_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  char delim_;
};

/// Quotes a field when it contains the delimiter, a quote, CR or LF.
std::string escape(std::string_view field, char delimiter = ',');
void write_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter = ',');

std::string_view trim(std::string_view s) noexcept;
std::string lower(std::string_view s);

std::optional<double> parse_double(std::string_view s) noexcept;
std::optional<unsigned long long> parse_count(std::string_view s) noexcept;

/// Shortest representation that round-trips to the same double.
std::string format_roundtrip(double v);
/// Fixed-point with `decimals` digits, rounding the exact binary value
/// half-to-even. Negative zero prints without a sign.
std::string format_fixed(double v, int decimals);

}  // namespace proxima::csv
