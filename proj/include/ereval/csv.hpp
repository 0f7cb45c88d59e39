#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ereval::csv {

// Minimal RFC 4180 reader: quoted fields, doubled quotes, embedded commas and
// newlines inside quotes. A trailing '\r' before '\n' is tolerated.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Returns false at end of input.
  bool next(std::vector<std::string>& fields);

  // 1-based line number where the last returned row started.
  std::size_t line() const { return row_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t row_line_ = 0;
};

std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace ereval::csv
