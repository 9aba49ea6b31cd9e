#include "quizforge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "quizforge/numfmt.hpp"

namespace quizforge::stats {
namespace {

void require_nonempty(std::span<const double> x, const char* what) {
  if (x.empty()) throw StatsError(std::string(what) + ": empty data");
}

std::vector<double> sorted(std::span<const double> x) {
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  return v;
}

double median_of_sorted(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  // median of v[lo..hi] inclusive
  const std::size_t n = hi - lo + 1;
  const std::size_t mid = lo + n / 2;
  return n % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

double mean(std::span<const double> x) {
  require_nonempty(x, "mean");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double median(std::span<const double> x) {
  require_nonempty(x, "median");
  const auto v = sorted(x);
  return median_of_sorted(v, 0, v.size() - 1);
}

double variance(std::span<const double> x) {
  if (x.size() < 2) throw StatsError("variance needs at least two values");
  const double m = mean(x);
  double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double sd(std::span<const double> x) { return std::sqrt(variance(x)); }

double quantile(std::span<const double> x, double p) {
  require_nonempty(x, "quantile");
  if (!(p >= 0 && p <= 1)) throw StatsError("quantile: probability outside [0,1]");
  const auto v = sorted(x);
  const double h = (static_cast<double>(v.size()) - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<double> fivenum(std::span<const double> x) {
  require_nonempty(x, "fivenum");
  const auto v = sorted(x);
  const std::size_t n = v.size();
  // Depth of the hinges: (floor((n + 3) / 2)) / 2, in 1-based positions.
  const double depth = std::floor((static_cast<double>(n) + 3) / 2) / 2;
  const double lower_pos = depth - 1;
  const double upper_pos = static_cast<double>(n) - depth;
  auto at = [&v](double pos) {
    const auto f = static_cast<std::size_t>(std::floor(pos));
    const auto c = static_cast<std::size_t>(std::ceil(pos));
    return 0.5 * (v[f] + v[c]);
  };
  return {v.front(), at(lower_pos), median_of_sorted(v, 0, n - 1), at(upper_pos), v.back()};
}

double correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw StatsError("cor needs two equal-length samples");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) throw StatsError("cor: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

double pt(double t, double df) {
  if (!(df > 0)) throw StatsError("pt: df must be positive");
  return boost::math::cdf(boost::math::students_t(df), t);
}

double qt(double p, double df) {
  if (!(df > 0)) throw StatsError("qt: df must be positive");
  if (!(p > 0 && p < 1)) throw StatsError("qt: p must be in (0,1)");
  return boost::math::quantile(boost::math::students_t(df), p);
}

double pnorm(double x, double m, double s) {
  if (!(s > 0)) throw StatsError("pnorm: sd must be positive");
  return boost::math::cdf(boost::math::normal(m, s), x);
}

double qnorm(double p, double m, double s) {
  if (!(s > 0)) throw StatsError("qnorm: sd must be positive");
  if (!(p > 0 && p < 1)) throw StatsError("qnorm: p must be in (0,1)");
  return boost::math::quantile(boost::math::normal(m, s), p);
}

double pchisq(double x, double df) {
  if (!(df > 0)) throw StatsError("pchisq: df must be positive");
  if (x <= 0) return 0;
  return boost::math::cdf(boost::math::chi_squared(df), x);
}

double qchisq(double p, double df) {
  if (!(df > 0)) throw StatsError("qchisq: df must be positive");
  if (!(p > 0 && p < 1)) throw StatsError("qchisq: p must be in (0,1)");
  return boost::math::quantile(boost::math::chi_squared(df), p);
}

double dbinom(long k, long n, double p) {
  if (n < 0 || !(p >= 0 && p <= 1)) throw StatsError("dbinom: invalid size or probability");
  if (k < 0 || k > n) return 0;
  return boost::math::pdf(boost::math::binomial(static_cast<double>(n), p), static_cast<double>(k));
}

double pbinom(long k, long n, double p) {
  if (n < 0 || !(p >= 0 && p <= 1)) throw StatsError("pbinom: invalid size or probability");
  if (k < 0) return 0;
  if (k >= n) return 1;
  return boost::math::cdf(boost::math::binomial(static_cast<double>(n), p), static_cast<double>(k));
}

TestResult t_one_sample(std::span<const double> x, double mu0, double conf_level) {
  if (x.size() < 2) throw StatsError("t test needs at least two observations");
  const double n = static_cast<double>(x.size());
  const double m = mean(x);
  const double s = sd(x);
  if (s == 0) throw StatsError("t test: data are essentially constant (zero variance)");
  const double se = s / std::sqrt(n);
  const double df = n - 1;

  TestResult r;
  r.kind = TestKind::t_one_sample;
  r.method = "One Sample t-test";
  r.data_name = "x";
  r.statistic_name = "t";
  r.statistic = (m - mu0) / se;
  r.df = df;
  r.p_value = std::min(1.0, 2 * pt(-std::fabs(r.statistic), df));
  const double crit = qt(0.5 + conf_level / 2, df);
  r.conf_int = std::make_pair(m - crit * se, m + crit * se);
  r.conf_level = conf_level;
  r.null_description = "true mean is not equal to " + format_number(mu0);
  r.estimates = {{"mean of x", m}};
  return r;
}

TestResult t_two_sample(std::span<const double> x, std::span<const double> y, double mu0,
                        double conf_level) {
  if (x.size() < 2 || y.size() < 2) throw StatsError("two-sample t test needs at least two observations per group");
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  const double mx = mean(x);
  const double my = mean(y);
  const double vx = variance(x) / nx;
  const double vy = variance(y) / ny;
  const double se2 = vx + vy;
  if (se2 == 0) throw StatsError("t test: data are essentially constant (zero variance)");
  const double se = std::sqrt(se2);
  const double df = se2 * se2 / (vx * vx / (nx - 1) + vy * vy / (ny - 1));

  TestResult r;
  r.kind = TestKind::t_two_sample;
  r.method = "Welch Two Sample t-test";
  r.data_name = "x and y";
  r.statistic_name = "t";
  r.statistic = (mx - my - mu0) / se;
  r.df = df;
  r.p_value = std::min(1.0, 2 * pt(-std::fabs(r.statistic), df));
  const double crit = qt(0.5 + conf_level / 2, df);
  r.conf_int = std::make_pair(mx - my - crit * se, mx - my + crit * se);
  r.conf_level = conf_level;
  r.null_description = "true difference in means is not equal to " + format_number(mu0);
  r.estimates = {{"mean of x", mx}, {"mean of y", my}};
  return r;
}

TestResult binom_exact(long k, long n, double p0, double conf_level) {
  if (n < 1) throw StatsError("binomial test needs at least one trial");
  if (k < 0 || k > n) throw StatsError("binomial test: successes must lie in [0, trials]");
  if (!(p0 > 0 && p0 < 1)) throw StatsError("binomial test: p must be in (0,1)");

  // Two-sided p-value: total probability of outcomes no more likely than
  // the observed one, with R's relative tolerance of 1e-7.
  const double d = dbinom(k, n, p0);
  double p = 0;
  for (long i = 0; i <= n; ++i) {
    const double di = dbinom(i, n, p0);
    if (di <= d * (1 + 1e-7)) p += di;
  }

  const double alpha = 1 - conf_level;
  const double lower = k == 0 ? 0.0
                              : boost::math::ibeta_inv(static_cast<double>(k), static_cast<double>(n - k + 1), alpha / 2);
  const double upper = k == n ? 1.0
                              : boost::math::ibeta_inv(static_cast<double>(k + 1), static_cast<double>(n - k), 1 - alpha / 2);

  TestResult r;
  r.kind = TestKind::binom_exact;
  r.method = "Exact binomial test";
  r.data_name = format_number(static_cast<double>(k)) + " and " + format_number(static_cast<double>(n));
  r.statistic_name = "number of successes";
  r.statistic = static_cast<double>(k);
  r.trials = n;
  r.p_value = std::min(1.0, p);
  r.conf_int = std::make_pair(lower, upper);
  r.conf_level = conf_level;
  r.null_description = "true probability of success is not equal to " + format_number(p0);
  r.estimates = {{"probability of success", static_cast<double>(k) / static_cast<double>(n)}};
  return r;
}

TestResult simple_regression(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw StatsError("regression needs equal-length x and y");
  if (x.size() < 3) throw StatsError("regression needs at least three points");
  const double n = static_cast<double>(x.size());
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw StatsError("regression: x has zero variance");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - intercept - slope * x[i];
    sse += e * e;
  }
  const double df = n - 2;
  const double s = std::sqrt(sse / df);
  if (s == 0) throw StatsError("regression: zero residual variance (perfect fit)");
  const double se_slope = s / std::sqrt(sxx);
  const double se_intercept = s * std::sqrt(1 / n + mx * mx / sxx);

  auto coef = [df](std::string term, double est, double se) {
    Coefficient c{std::move(term), est, se, est / se, 0};
    c.p_value = std::min(1.0, 2 * pt(-std::fabs(c.statistic), df));
    return c;
  };

  TestResult r;
  r.kind = TestKind::simple_regression;
  r.method = "Linear regression";
  r.data_name = "y ~ x";
  r.statistic_name = "t";
  r.coefficients = {coef("(Intercept)", intercept, se_intercept), coef("x", slope, se_slope)};
  r.statistic = r.coefficients[1].statistic;
  r.p_value = r.coefficients[1].p_value;
  r.df = df;
  r.residual_se = s;
  r.r_squared = syy == 0 ? 1.0 : 1 - sse / syy;
  r.estimates = {{"(Intercept)", intercept}, {"x", slope}};
  return r;
}

TestResult stat_test(TestKind kind, std::span<const double> a, std::span<const double> b,
                     const TestParams& params) {
  switch (kind) {
    case TestKind::t_one_sample:
      return t_one_sample(a, params.mu0, params.conf_level);
    case TestKind::t_two_sample:
      return t_two_sample(a, b, params.mu0, params.conf_level);
    case TestKind::binom_exact:
      if (a.size() != 2) throw StatsError("binom_exact expects {successes, trials}");
      return binom_exact(std::lround(a[0]), std::lround(a[1]), params.p0, params.conf_level);
    case TestKind::simple_regression:
      return simple_regression(a, b);
  }
  throw StatsError("unknown test kind");
}

}  // namespace quizforge::stats
