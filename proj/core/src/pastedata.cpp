#include "quizforge/pastedata.hpp"

#include <algorithm>
#include <optional>

#include "quizforge/numfmt.hpp"

namespace quizforge::paste {
namespace {

using Row = std::vector<std::string>;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\f\v");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\f\v");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

Row split_tabs(std::string_view line) {
  Row cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    cells.push_back(trim(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start)));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  while (!cells.empty() && cells.back().empty()) cells.pop_back();
  return cells;
}

Row split_spaces(std::string_view line) {
  Row cells;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) cells.emplace_back(line.substr(start, i - start));
  }
  return cells;
}

bool numeric_cell(const std::string& s) { return !s.empty() && parse_number(s).has_value(); }

// Numeric iff every cell is a number; empty cells make the column text.
ColumnData typed(const std::vector<std::string>& cells) {
  const bool numeric = !cells.empty() && std::all_of(cells.begin(), cells.end(), numeric_cell);
  if (!numeric) return TextVec(cells.begin(), cells.end());
  NumVec out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(*parse_number(c));
  return out;
}

DataTable columns_from(const std::vector<Row>& rows, std::size_t first, std::size_t width,
                       const std::optional<Row>& header) {
  DataTable t;
  for (std::size_t c = 0; c < width; ++c) {
    std::vector<std::string> cells;
    for (std::size_t r = first; r < rows.size(); ++r) cells.push_back(c < rows[r].size() ? rows[r][c] : "");
    Column col;
    if (header) col.name = c < header->size() ? (*header)[c] : "";
    col.values = typed(cells);
    t.columns.push_back(std::move(col));
  }
  return t;
}

}  // namespace

DataTable parse_pasted(std::string_view text) {
  const auto lines = split_lines(text);
  const bool tabs = text.find('\t') != std::string_view::npos;
  std::vector<Row> rows;
  for (const auto line : lines) {
    Row r = tabs ? split_tabs(line) : split_spaces(line);
    if (!r.empty()) rows.push_back(std::move(r));
  }
  if (rows.empty()) throw PasteError("no data found in the pasted text");

  std::size_t width = 0;
  for (const Row& r : rows) width = std::max(width, r.size());

  const auto row_is_text = [](const Row& r) { return std::none_of(r.begin(), r.end(), numeric_cell); };
  bool header = false;
  if (rows.size() >= 2 && row_is_text(rows[0])) {
    for (std::size_t c = 0; c < rows[0].size() && !header; ++c) {
      for (std::size_t r = 1; r < rows.size() && !header; ++r) header = c < rows[r].size() && numeric_cell(rows[r][c]);
    }
  }

  if (header) {
    const std::size_t w = std::max(rows[0].size(), width);
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() != w) {
        throw PasteError("ragged rows: line " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                         " cells, expected " + std::to_string(w));
      }
    }
    DataTable t = columns_from(rows, 1, w, rows[0]);
    return t;
  }

  bool any_numeric = false, any_text = false;
  for (const Row& r : rows) {
    for (const auto& c : r) {
      if (c.empty()) continue;
      (numeric_cell(c) ? any_numeric : any_text) = true;
    }
  }
  const bool homogeneous = !(any_numeric && any_text);
  for (std::size_t r = 0; r + 1 < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw PasteError("ragged rows: line " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                       " cells, expected " + std::to_string(width));
    }
  }
  if (homogeneous) {
    std::vector<std::string> cells;
    for (const Row& r : rows) {
      for (const auto& c : r) {
        if (!c.empty()) cells.push_back(c);
      }
    }
    DataTable t;
    t.columns.push_back({std::nullopt, typed(cells)});
    return t;
  }
  if (rows.back().size() != width) {
    throw PasteError("ragged rows: line " + std::to_string(rows.size()) + " has " + std::to_string(rows.back().size()) +
                     " cells, expected " + std::to_string(width));
  }
  return columns_from(rows, 0, width, std::nullopt);
}

std::string to_csv(const DataTable& table) {
  try {
    table.validate();
  } catch (const std::invalid_argument& e) {
    throw PasteError(e.what());
  }
  const auto field = [](const std::string& s) {
    const bool quote = s.find_first_of(",\"\r\n") != std::string::npos ||
                       (!s.empty() && (std::isspace(static_cast<unsigned char>(s.front())) ||
                                       std::isspace(static_cast<unsigned char>(s.back()))));
    if (!quote) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out.push_back('"');
      out.push_back(c);
    }
    out.push_back('"');
    return out;
  };
  std::string out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out.push_back(',');
      out += field(cells[i]);
    }
    out += "\r\n";
  };
  if (table.has_names()) {
    std::vector<std::string> names;
    for (const Column& c : table.columns) names.push_back(c.name.value_or(""));
    line(names);
  }
  for (std::size_t r = 0; r < table.nrows(); ++r) {
    std::vector<std::string> cells;
    for (const Column& c : table.columns) {
      if (const auto* n = std::get_if<NumVec>(&c.values)) {
        cells.push_back(format_number((*n)[r]));
      } else {
        cells.push_back(std::get<TextVec>(c.values)[r]);
      }
    }
    line(cells);
  }
  return out;
}

DataTable parse_csv(std::string_view text, bool header) {
  std::vector<Row> rows;
  Row row;
  std::string cell;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(cell));
      cell.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      cell.push_back(c);
      any = true;
    }
  }
  if (quoted) throw PasteError("unterminated quoted field");
  if (any || !cell.empty() || !row.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw PasteError("no data found in the CSV text");
  const std::size_t width = rows[0].size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) throw PasteError("CSV line " + std::to_string(r + 1) + " has the wrong number of fields");
  }
  DataTable t;
  for (std::size_t c = 0; c < width; ++c) {
    std::vector<std::string> cells;
    for (std::size_t r = header ? 1 : 0; r < rows.size(); ++r) cells.push_back(rows[r][c]);
    Column col;
    if (header) col.name = rows[0][c];
    col.values = typed(cells);
    t.columns.push_back(std::move(col));
  }
  return t;
}

}  // namespace quizforge::paste
