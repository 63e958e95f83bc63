#include "proxima/csv.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <iterator>
#include <stdexcept>

namespace proxima::csv {

Reader::Reader(std::istream& in, char delimiter)
    : buffer_(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()),
      delim_(delimiter) {
  if (buffer_.starts_with("\xEF\xBB\xBF")) pos_ = 3;
}

std::optional<Record> Reader::next() {
  const std::size_t n = buffer_.size();
  // skip blank lines
  while (pos_ < n) {
    std::size_t p = pos_;
    while (p < n && (buffer_[p] == ' ' || buffer_[p] == '\t' || buffer_[p] == '\r')) ++p;
    if (p < n && buffer_[p] == '\n') {
      pos_ = p + 1;
      ++line_;
      continue;
    }
    if (p == n) pos_ = n;
    break;
  }
  if (pos_ >= n) return std::nullopt;

  Record rec;
  rec.line = line_;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;

  auto finish_field = [&] {
    rec.fields.push_back(was_quoted ? field : std::string(trim(field)));
    field.clear();
    was_quoted = false;
  };

  while (pos_ < n) {
    const char c = buffer_[pos_++];
    if (quoted) {
      if (c == '"') {
        if (pos_ < n && buffer_[pos_] == '"') {
          field.push_back('"');
          ++pos_;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && trim(field).empty()) {
      field.clear();
      quoted = true;
      was_quoted = true;
    } else if (c == delim_) {
      finish_field();
    } else if (c == '\n') {
      ++line_;
      finish_field();
      return rec;
    } else if (c == '\r') {
      // dropped; CRLF tolerated
    } else {
      field.push_back(c);
    }
  }
  rec.unterminated_quote = quoted;
  finish_field();
  return rec;
}

std::string escape(std::string_view field, char delimiter) {
  if (field.find_first_of(std::string{delimiter, '"', '\r', '\n'}) == std::string_view::npos &&
      trim(field).size() == field.size()) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.put(delimiter);
    out << escape(fields[i], delimiter);
  }
  out.put('\n');
}

std::string_view trim(std::string_view s) noexcept {
  auto space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<double> parse_double(std::string_view s) noexcept {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<unsigned long long> parse_count(std::string_view s) noexcept {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  unsigned long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  // keep sums of a handful of counts far from overflow
  if (v > (1ULL << 48)) return std::nullopt;
  return v;
}

std::string format_roundtrip(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), ptr);
}

std::string format_fixed(double v, int decimals) {
  std::array<char, 400> buf{};
  auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, decimals);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  std::string out(buf.data(), ptr);
  if (out.starts_with('-') && out.find_first_not_of("0.", 1) == std::string::npos) {
    out.erase(0, 1);
  }
  return out;
}

}  // namespace proxima::csv
