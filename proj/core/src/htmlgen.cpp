#include "quizforge/htmlgen.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "png.hpp"
#include "quizforge/numfmt.hpp"

namespace quizforge::htmlgen {
namespace {

constexpr std::array<std::uint8_t, 8> kPngSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
constexpr int kMarginLeft = 72;
constexpr int kMarginRight = 24;
constexpr int kMarginTop = 20;
constexpr int kMarginBottom = 48;
constexpr int kTickLength = 5;
constexpr int kFontScale = 2;
constexpr int kMaxBins = 10000;

enum Color : std::uint8_t { kWhite, kBlack, kGrey, kBlue };

const std::array<png::Rgb, 4> kPalette = {{{255, 255, 255}, {0, 0, 0}, {190, 190, 190}, {31, 84, 140}}};

// 5x7 glyphs, one byte per row, bit 4 is the leftmost column.
struct Glyph {
  char c;
  std::array<std::uint8_t, 7> rows;
};

constexpr std::array<Glyph, 12> kFont = {{
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
}};

std::string cell_text(const ColumnData& values, std::size_t i) {
  if (const auto* n = std::get_if<NumVec>(&values)) return format_number((*n)[i]);
  return escape_text(std::get<TextVec>(values)[i]);
}

std::string open_cell(bool numeric, bool header = false) {
  const char* tag = header ? "<th" : "<td";
  return std::string(tag) + (numeric ? " style=\"text-align:right\">" : " style=\"text-align:left\">");
}

void check_dimensions(int width, int height) {
  if (width < 160 || height < 120 || width > 4096 || height > 4096) {
    throw HtmlError("chart size must be between 160x120 and 4096x4096 pixels");
  }
}

void check_data(std::span<const double> x, std::string_view what) {
  if (x.empty()) throw HtmlError(std::string(what) + ": no data");
  for (double v : x) {
    if (!std::isfinite(v)) throw HtmlError(std::string(what) + ": data must be finite");
  }
}

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1 : f < 3 ? 2 : f < 7 ? 5 : 10;
  return nice * mag;
}

std::vector<double> nice_ticks(double lo, double hi) {
  const double step = nice_step(hi - lo, 5);
  const int digits = std::max(0, -static_cast<int>(std::floor(std::log10(step)))) + 1;
  std::vector<double> out;
  for (double k = std::ceil(lo / step - 1e-9); k * step <= hi + step * 1e-9; ++k) {
    double v = round_half_away(k * step, digits);
    if (v == 0) v = 0;  // drop negative zero
    out.push_back(v);
  }
  return out;
}

struct Scale {
  double lo, hi;
  int p0, p1;  // pixel positions of lo and hi
  int operator()(double v) const {
    return p0 + static_cast<int>(std::lround((v - lo) / (hi - lo) * (p1 - p0)));
  }
};

std::vector<Tick> make_ticks(const Scale& s) {
  std::vector<Tick> out;
  for (double v : nice_ticks(s.lo, s.hi)) out.push_back({v, s(v), format_number(v)});
  return out;
}

ChartGeometry frame(int width, int height) {
  check_dimensions(width, height);
  ChartGeometry g;
  g.width = width;
  g.height = height;
  g.plot_left = kMarginLeft;
  g.plot_top = kMarginTop;
  g.plot_right = width - kMarginRight;
  g.plot_bottom = height - kMarginBottom;
  return g;
}

std::pair<double, double> padded_range(std::span<const double> v) {
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  double lo = *mn, hi = *mx;
  if (hi == lo) {
    const double pad = lo == 0 ? 1 : std::fabs(lo) * 0.1;
    return {lo - pad, hi + pad};
  }
  const double pad = (hi - lo) * 0.04;
  return {lo - pad, hi + pad};
}

class Canvas {
 public:
  Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), kWhite) {}

  void set(int x, int y, Color c) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
    px_[static_cast<std::size_t>(y) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(x)] = c;
  }
  void fill(int x0, int y0, int x1, int y1, Color c) {
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) set(x, y, c);
  }
  void hline(int x0, int x1, int y, Color c) { fill(std::min(x0, x1), y, std::max(x0, x1), y, c); }
  void vline(int x, int y0, int y1, Color c) { fill(x, std::min(y0, y1), x, std::max(y0, y1), c); }
  void rect(int x0, int y0, int x1, int y1, Color c) {
    hline(x0, x1, y0, c);
    hline(x0, x1, y1, c);
    vline(x0, y0, y1, c);
    vline(x1, y0, y1, c);
  }

  static int text_width(std::string_view s) {
    return s.empty() ? 0 : static_cast<int>(s.size()) * 6 * kFontScale - kFontScale;
  }
  static int text_height() { return 7 * kFontScale; }

  void text(int x, int y, std::string_view s) {
    for (char ch : s) {
      const auto it = std::find_if(kFont.begin(), kFont.end(), [ch](const Glyph& g) { return g.c == ch; });
      if (it != kFont.end()) {
        for (int r = 0; r < 7; ++r) {
          for (int c = 0; c < 5; ++c) {
            if (it->rows[static_cast<std::size_t>(r)] & (0x10 >> c)) {
              fill(x + c * kFontScale, y + r * kFontScale, x + (c + 1) * kFontScale - 1, y + (r + 1) * kFontScale - 1, kBlack);
            }
          }
        }
      }
      x += 6 * kFontScale;
    }
  }

  const std::vector<std::uint8_t>& pixels() const { return px_; }

 private:
  int w_, h_;
  std::vector<std::uint8_t> px_;
};

std::string fmt_sig(double x, int digits) {
  if (x == 0) return "0";
  const int mag = static_cast<int>(std::floor(std::log10(std::fabs(x))));
  if (mag >= -4) return format_number(round_half_away(x, digits - 1 - mag));
  // R switches to e-notation for small magnitudes: 4.23e-06.
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, x);
  std::string s = buf;
  const std::size_t e = s.find('e');
  std::string mantissa = s.substr(0, e);
  if (mantissa.find('.') != std::string::npos) {
    mantissa.erase(mantissa.find_last_not_of('0') + 1);
    if (mantissa.back() == '.') mantissa.pop_back();
  }
  return mantissa + s.substr(e);
}

std::string fmt_p(double p) {
  if (p < 2.2e-16) return "< 2.2e-16";
  return "= " + fmt_sig(p, 4);
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string regression_block(const stats::TestResult& r) {
  std::ostringstream out;
  out << "Call:\nlm(formula = " << r.data_name << ")\n\nCoefficients:\n";
  const std::vector<std::string> head = {"", "Estimate", "Std. Error", "t value", "Pr(>|t|)"};
  std::vector<std::vector<std::string>> rows = {head};
  for (const auto& c : r.coefficients) {
    rows.push_back({c.term, fmt_sig(c.estimate, 6), fmt_sig(c.std_error, 6), fmt_sig(c.statistic, 4),
                    c.p_value < 2e-16 ? "<2e-16" : fmt_sig(c.p_value, 3)});
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  for (const auto& row : rows) {
    out << pad_right(row[0], width[0]);
    for (std::size_t i = 1; i < row.size(); ++i) out << ' ' << pad_left(row[i], width[i]);
    out << '\n';
  }
  out << "\nResidual standard error: " << fmt_sig(r.residual_se, 4) << " on " << format_number(*r.df)
      << " degrees of freedom\nMultiple R-squared: " << fmt_sig(r.r_squared, 4) << '\n';
  return out.str();
}

std::string test_block(const stats::TestResult& r) {
  std::ostringstream out;
  out << "\n        " << r.method << "\n\ndata:  " << r.data_name << '\n';
  if (r.kind == stats::TestKind::binom_exact) {
    out << "number of successes = " << format_number(r.statistic) << ", number of trials = "
        << (r.trials ? std::to_string(*r.trials) : std::string("?"));
  } else {
    out << r.statistic_name << " = " << fmt_sig(r.statistic, 5);
    if (r.df) out << ", df = " << fmt_sig(*r.df, 5);
  }
  out << ", p-value " << fmt_p(r.p_value) << '\n';
  out << "alternative hypothesis: " << r.null_description << '\n';
  if (r.conf_int) {
    out << format_number(r.conf_level * 100) << " percent confidence interval:\n " << ' '
        << fmt_sig(r.conf_int->first, 7) << ' ' << fmt_sig(r.conf_int->second, 7) << '\n';
  }
  out << "sample estimates:\n";
  std::string names, values;
  for (const auto& [name, value] : r.estimates) {
    const std::string v = fmt_sig(value, 7);
    const std::size_t w = std::max(name.size(), v.size());
    if (!names.empty()) {
      names += ' ';
      values += ' ';
    }
    names += pad_left(name, w);
    values += pad_left(v, w);
  }
  out << names << '\n' << values << '\n';
  return out.str();
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

}  // namespace

std::string decode_entities(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const std::size_t semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    const std::string_view name = s.substr(i + 1, semi - i - 1);
    if (name == "amp") {
      out.push_back('&');
    } else if (name == "lt") {
      out.push_back('<');
    } else if (name == "gt") {
      out.push_back('>');
    } else if (name == "quot") {
      out.push_back('"');
    } else if (name == "apos") {
      out.push_back('\'');
    } else if (name == "nbsp") {
      out.push_back(' ');
    } else if (!name.empty() && name[0] == '#') {
      const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
      const std::string digits(name.substr(hex ? 2 : 1));
      try {
        append_utf8(out, std::stoul(digits, nullptr, hex ? 16 : 10));
      } catch (const std::exception&) {
        out.append(s.substr(i, semi - i + 1));
      }
    } else {
      out.append(s.substr(i, semi - i + 1));
    }
    i = semi;
  }
  return out;
}

std::string escape_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '{':
        out += "&#123;";
        break;
      case '}':
        out += "&#125;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

std::string render_vector_table(const ColumnData& values, int ncol) {
  if (ncol < 1) throw HtmlError("ncol must be at least 1");
  const std::size_t n = std::visit([](const auto& v) { return v.size(); }, values);
  if (n == 0) throw HtmlError("cannot render an empty vector");
  const bool numeric = std::holds_alternative<NumVec>(values);
  const auto cols = static_cast<std::size_t>(ncol);
  const std::size_t rows = (n + cols - 1) / cols;
  std::string out = "<table border=\"1\" cellpadding=\"4\">";
  for (std::size_t r = 0; r < rows; ++r) {
    out += "<tr>";
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      out += open_cell(numeric);
      if (i < n) out += cell_text(values, i);
      out += "</td>";
    }
    out += "</tr>";
  }
  out += "</table>";
  return out;
}

std::string render_data_table(const DataTable& table) {
  try {
    table.validate();
  } catch (const std::invalid_argument& e) {
    throw HtmlError(e.what());
  }
  std::string out = "<table border=\"1\" cellpadding=\"4\">";
  if (table.has_names()) {
    out += "<tr>";
    for (const Column& c : table.columns) out += open_cell(c.is_numeric(), true) + escape_text(c.name.value_or("")) + "</th>";
    out += "</tr>";
  }
  for (std::size_t r = 0; r < table.nrows(); ++r) {
    out += "<tr>";
    for (const Column& c : table.columns) out += open_cell(c.is_numeric()) + cell_text(c.values, r) + "</td>";
    out += "</tr>";
  }
  out += "</table>";
  return out;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  if (bytes.empty()) return out;
  const int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(written));
  return out;
}

std::string embed_png(std::span<const std::uint8_t> png) {
  if (png.size() < kPngSignature.size() || !std::equal(kPngSignature.begin(), kPngSignature.end(), png.begin())) {
    throw HtmlError("embed_png: data is not a PNG image");
  }
  return "<img src=\"data:image/png;base64," + base64_encode(png) + "\">";
}

ChartGeometry layout_histogram(std::span<const double> x, double binwidth, int width_px, int height_px) {
  check_data(x, "histogram");
  if (!(binwidth > 0) || !std::isfinite(binwidth)) throw HtmlError("histogram: binwidth must be positive");
  ChartGeometry g = frame(width_px, height_px);
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  const double lo = std::floor(*mn / binwidth) * binwidth;
  const double nb_raw = std::floor((*mx - lo) / binwidth) + 1;
  if (nb_raw > kMaxBins) throw HtmlError("histogram: binwidth too small for the data range");
  const int nb = static_cast<int>(nb_raw);
  std::vector<int> counts(static_cast<std::size_t>(nb), 0);
  for (double v : x) {
    const int k = std::clamp(static_cast<int>(std::floor((v - lo) / binwidth)), 0, nb - 1);
    ++counts[static_cast<std::size_t>(k)];
  }
  const double n = static_cast<double>(x.size());
  const double max_density = static_cast<double>(*std::max_element(counts.begin(), counts.end())) / (n * binwidth);
  const Scale xs{lo, lo + nb * binwidth, g.plot_left + 4, g.plot_right - 4};
  const Scale ys{0, max_density * 1.05, g.plot_bottom, g.plot_top};
  for (int i = 0; i < nb; ++i) {
    Bar b;
    b.left = lo + i * binwidth;
    b.right = lo + (i + 1) * binwidth;
    b.density = counts[static_cast<std::size_t>(i)] / (n * binwidth);
    b.x0 = xs(b.left);
    b.x1 = xs(b.right);
    b.y0 = ys(b.density);
    b.y1 = g.plot_bottom;
    g.bars.push_back(b);
  }
  g.x_ticks = make_ticks(xs);
  g.y_ticks = make_ticks(ys);
  return g;
}

ChartGeometry layout_scatter(std::span<const double> x, std::span<const double> y, int width_px, int height_px) {
  check_data(x, "scatter");
  check_data(y, "scatter");
  if (x.size() != y.size()) throw HtmlError("scatter: x and y must have the same length");
  ChartGeometry g = frame(width_px, height_px);
  const auto [xlo, xhi] = padded_range(x);
  const auto [ylo, yhi] = padded_range(y);
  const Scale xs{xlo, xhi, g.plot_left, g.plot_right};
  const Scale ys{ylo, yhi, g.plot_bottom, g.plot_top};
  for (std::size_t i = 0; i < x.size(); ++i) g.points.push_back({x[i], y[i], xs(x[i]), ys(y[i])});
  g.x_ticks = make_ticks(xs);
  g.y_ticks = make_ticks(ys);
  return g;
}

std::vector<std::uint8_t> rasterize(const ChartGeometry& g) {
  check_dimensions(g.width, g.height);
  Canvas c(g.width, g.height);
  for (const Bar& b : g.bars) {
    if (b.y0 < b.y1) c.fill(b.x0, b.y0, b.x1, b.y1, kGrey);
    c.rect(b.x0, b.y0, b.x1, b.y1, kBlack);
  }
  for (const PlotPoint& p : g.points) {
    for (int dy = -3; dy <= 3; ++dy)
      for (int dx = -3; dx <= 3; ++dx)
        if (dx * dx + dy * dy <= 9) c.set(p.px + dx, p.py + dy, kBlue);
  }
  c.vline(g.plot_left, g.plot_top, g.plot_bottom, kBlack);
  c.hline(g.plot_left, g.plot_right, g.plot_bottom, kBlack);
  for (const Tick& t : g.x_ticks) {
    c.vline(t.pixel, g.plot_bottom, g.plot_bottom + kTickLength, kBlack);
    c.text(t.pixel - Canvas::text_width(t.label) / 2, g.plot_bottom + kTickLength + 4, t.label);
  }
  for (const Tick& t : g.y_ticks) {
    c.hline(g.plot_left - kTickLength, g.plot_left, t.pixel, kBlack);
    c.text(g.plot_left - kTickLength - 4 - Canvas::text_width(t.label), t.pixel - Canvas::text_height() / 2, t.label);
  }
  return png::encode_indexed(g.width, g.height, kPalette, c.pixels());
}

std::vector<std::uint8_t> render_chart(ChartKind kind, std::span<const double> x, std::span<const double> y,
                                       const ChartOptions& options) {
  if (kind == ChartKind::histogram) {
    return rasterize(layout_histogram(x, options.binwidth, options.width_px, options.height_px));
  }
  return rasterize(layout_scatter(x, y, options.width_px, options.height_px));
}

std::string render_stat_block(const stats::TestResult& result) {
  const std::string body =
      result.kind == stats::TestKind::simple_regression ? regression_block(result) : test_block(result);
  return "<pre>" + escape_text(body) + "</pre>";
}

std::string text_projection(std::string_view html) {
  std::string out;
  bool in_cell = false;
  bool row_has_cell = false;
  bool any_row = false;
  std::size_t i = 0;
  while (i < html.size()) {
    if (html[i] == '<') {
      const std::size_t close = html.find('>', i);
      if (close == std::string_view::npos) break;
      std::string_view tag = html.substr(i + 1, close - i - 1);
      const bool end = !tag.empty() && tag[0] == '/';
      if (end) tag.remove_prefix(1);
      const std::string_view name = tag.substr(0, tag.find_first_of(" \t\n/"));
      if (name == "tr" && !end) {
        if (any_row) out.push_back('\n');
        any_row = true;
        row_has_cell = false;
      } else if ((name == "td" || name == "th") && !end) {
        if (row_has_cell) out.push_back('\t');
        row_has_cell = true;
        in_cell = true;
      } else if ((name == "td" || name == "th") && end) {
        in_cell = false;
      } else if (name == "br" && in_cell) {
        out.push_back(' ');
      }
      i = close + 1;
      continue;
    }
    const std::size_t next = html.find('<', i);
    const std::string_view text = html.substr(i, next == std::string_view::npos ? std::string_view::npos : next - i);
    if (in_cell) out += decode_entities(text);
    i = next == std::string_view::npos ? html.size() : next;
  }
  return out;
}

}  // namespace quizforge::htmlgen
