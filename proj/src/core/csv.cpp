#include "ereval/csv.hpp"

#include <istream>
#include <ostream>

#include "ereval/error.hpp"

namespace ereval::csv {

bool Reader::next(std::vector<std::string>& fields) {
  fields.clear();
  int ch = in_.get();
  if (ch == std::char_traits<char>::eof()) return false;
  row_line_ = line_;

  std::string field;
  bool quoted = false;
  bool field_started_quoted = false;
  for (;; ch = in_.get()) {
    if (ch == std::char_traits<char>::eof()) {
      if (quoted) fail(ErrorKind::kInvalidInput, "unterminated quoted field at line " + std::to_string(row_line_));
      fields.push_back(std::move(field));
      return true;
    }
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field.empty() && !field_started_quoted) {
          quoted = true;
          field_started_quoted = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        field_started_quoted = false;
        break;
      case '\r':
        if (in_.peek() != '\n') field.push_back(c);
        break;
      case '\n':
        ++line_;
        fields.push_back(std::move(field));
        return true;
      default:
        field.push_back(c);
    }
  }
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

}  // namespace ereval::csv
