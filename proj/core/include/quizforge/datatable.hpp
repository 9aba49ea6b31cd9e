#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace quizforge {

using NumVec = std::vector<double>;
using TextVec = std::vector<std::string>;
using ColumnData = std::variant<NumVec, TextVec>;

struct Column {
  std::optional<std::string> name;
  ColumnData values;

  std::size_t size() const;
  bool is_numeric() const { return std::holds_alternative<NumVec>(values); }
  bool operator==(const Column&) const = default;
};

// Rectangular data with per-column type. Used for parsed clipboard data,
// rendered tables and table-valued expressions.
struct DataTable {
  std::vector<Column> columns;

  std::size_t nrows() const;
  bool has_names() const;
  const Column* find(std::string_view name) const;
  // Throws std::invalid_argument on ragged columns or duplicate names.
  void validate() const;

  bool operator==(const DataTable&) const = default;
};

}  // namespace quizforge
