#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "quizforge/datatable.hpp"
#include "quizforge/stats.hpp"

// HTML fragments for quiz text: data tables, inline PNG charts and fixed
// layout statistical output. Curly braces in data are written as entities
// so they can never be mistaken for CLOZE groups.
namespace quizforge::htmlgen {

class HtmlError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string escape_text(std::string_view text);

// Row-major layout with `ncol` columns; the last row is padded with empty
// cells.
std::string render_vector_table(const ColumnData& values, int ncol = 10);
std::string render_data_table(const DataTable& table);

// <img src="data:image/png;base64,..."> without line breaks.
std::string embed_png(std::span<const std::uint8_t> png);

std::string base64_encode(std::span<const std::uint8_t> bytes);

enum class ChartKind { histogram, scatter };

struct ChartOptions {
  double binwidth = 0;  // histogram only
  int width_px = 640;
  int height_px = 480;
};

struct Tick {
  double value = 0;
  int pixel = 0;
  std::string label;
};

struct Bar {
  double left = 0;
  double right = 0;
  double density = 0;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // pixel rectangle, y0 < y1
};

struct PlotPoint {
  double x = 0;
  double y = 0;
  int px = 0;
  int py = 0;
};

// Pre-raster geometry; everything render_chart draws comes from here.
struct ChartGeometry {
  int width = 0;
  int height = 0;
  int plot_left = 0, plot_top = 0, plot_right = 0, plot_bottom = 0;
  std::vector<Bar> bars;
  std::vector<PlotPoint> points;
  std::vector<Tick> x_ticks;
  std::vector<Tick> y_ticks;
};

ChartGeometry layout_histogram(std::span<const double> x, double binwidth, int width_px = 640,
                               int height_px = 480);
ChartGeometry layout_scatter(std::span<const double> x, std::span<const double> y, int width_px = 640,
                             int height_px = 480);

std::vector<std::uint8_t> rasterize(const ChartGeometry& geometry);

// `y` is ignored for histograms.
std::vector<std::uint8_t> render_chart(ChartKind kind, std::span<const double> x, std::span<const double> y,
                                       const ChartOptions& options = {});

// Monospace block in R's print layout, wrapped in <pre>.
std::string render_stat_block(const stats::TestResult& result);

// What a browser puts on the clipboard when a rendered table is selected:
// cells separated by tabs, rows by newlines, entities decoded, tags dropped.
std::string text_projection(std::string_view html);

// Named (amp, lt, gt, quot, apos, nbsp) and numeric character references.
// nbsp becomes a plain space, as on a copied table.
std::string decode_entities(std::string_view s);

}  // namespace quizforge::htmlgen
