#pragma once

// Minimal CSV helpers: comma-separated, no quoting (none of our schemas need it).

#include <charconv>
#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dispatchlab::csv {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, std::string_view name) {
  field = trim(field);
  T value{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || field.empty()) {
    throw ParseError(line, "bad value '" + std::string(field) + "' for " + std::string(name));
  }
  return value;
}

/// Iterates data rows after checking the header. Blank lines are skipped.
class Reader {
 public:
  Reader(std::istream& in, std::string_view expected_header) : in_(in) {
    std::string header;
    if (!std::getline(in_, header)) throw ParseError(1, "missing header");
    ++line_;
    if (trim(header) != expected_header) {
      throw ParseError(1, "expected header '" + std::string(expected_header) + "', got '" +
                              std::string(trim(header)) + "'");
    }
    columns_ = split(expected_header).size();
  }

  /// Returns false at end of input.
  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, buf_)) {
      ++line_;
      if (trim(buf_).empty()) continue;
      fields = split(trim(buf_));
      if (fields.size() != columns_) {
        throw ParseError(line_, "expected " + std::to_string(columns_) + " fields, got " +
                                    std::to_string(fields.size()));
      }
      return true;
    }
    return false;
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::string buf_;
  std::size_t line_ = 0;
  std::size_t columns_ = 0;
};

}  // namespace dispatchlab::csv
