#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "quizforge/datatable.hpp"

// Turns text copied from a rendered quiz table back into data, and writes
// RFC 4180 CSV.
namespace quizforge::paste {

class PasteError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Cells are split on tabs when the text contains any, else on runs of
// whitespace. A first row of text over a column that holds numbers below it
// is taken as the header. Headerless input of a single cell type is read
// row-major into one unnamed column, so a vector laid out in a grid comes
// back in its original order. Only '.' is accepted as decimal separator;
// "1,5" stays text. A column with empty cells is text.
DataTable parse_pasted(std::string_view text);

// CRLF line endings; a header row iff any column is named; fields quoted
// only when they contain a comma, quote, line break or edge whitespace.
std::string to_csv(const DataTable& table);

// RFC 4180 reader with the same per-column type inference.
DataTable parse_csv(std::string_view text, bool header);

}  // namespace quizforge::paste
