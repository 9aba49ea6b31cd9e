#include "quizforge/datatable.hpp"

#include <set>
#include <stdexcept>

namespace quizforge {

std::size_t Column::size() const {
  return std::visit([](const auto& v) { return v.size(); }, values);
}

std::size_t DataTable::nrows() const { return columns.empty() ? 0 : columns.front().size(); }

bool DataTable::has_names() const {
  for (const Column& c : columns) {
    if (c.name) return true;
  }
  return false;
}

const Column* DataTable::find(std::string_view name) const {
  for (const Column& c : columns) {
    if (c.name && *c.name == name) return &c;
  }
  return nullptr;
}

void DataTable::validate() const {
  std::set<std::string_view> seen;
  for (const Column& c : columns) {
    if (c.size() != nrows()) throw std::invalid_argument("table columns must have equal length");
    if (c.name && !seen.insert(*c.name).second) {
      throw std::invalid_argument("duplicate column name '" + *c.name + "'");
    }
  }
}

}  // namespace quizforge
