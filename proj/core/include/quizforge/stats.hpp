#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace quizforge::stats {

class StatsError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

double mean(std::span<const double> x);
double median(std::span<const double> x);
double variance(std::span<const double> x);  // n - 1 denominator
double sd(std::span<const double> x);
// Linear interpolation between order statistics (R type 7).
double quantile(std::span<const double> x, double p);
// Tukey: min, lower hinge, median, upper hinge, max.
std::vector<double> fivenum(std::span<const double> x);
double correlation(std::span<const double> x, std::span<const double> y);

// Distribution functions backed by Boost.Math.
double pt(double t, double df);         // lower tail
double qt(double p, double df);
double pnorm(double x, double mean = 0, double sd = 1);
double qnorm(double p, double mean = 0, double sd = 1);
double pchisq(double x, double df);
double qchisq(double p, double df);
double dbinom(long k, long n, double p);
double pbinom(long k, long n, double p);

enum class TestKind { t_one_sample, t_two_sample, binom_exact, simple_regression };

struct Coefficient {
  std::string term;
  double estimate = 0;
  double std_error = 0;
  double statistic = 0;
  double p_value = 0;
};

struct TestResult {
  TestKind kind = TestKind::t_one_sample;
  std::string method;
  std::string data_name;
  std::string statistic_name;       // "t" or "number of successes"
  double statistic = 0;
  std::optional<double> df;         // absent for the exact binomial test
  double p_value = 1;
  std::optional<std::pair<double, double>> conf_int;
  double conf_level = 0.95;
  std::string null_description;     // "true mean is not equal to 10"
  std::vector<std::pair<std::string, double>> estimates;
  std::vector<Coefficient> coefficients;  // simple regression only
  double residual_se = 0;
  double r_squared = 0;
  std::optional<long> trials;             // binomial only
};

TestResult t_one_sample(std::span<const double> x, double mu0 = 0, double conf_level = 0.95);
// Welch's unequal-variance test of mean(x) - mean(y) == mu0.
TestResult t_two_sample(std::span<const double> x, std::span<const double> y, double mu0 = 0,
                        double conf_level = 0.95);
TestResult binom_exact(long successes, long trials, double p0 = 0.5, double conf_level = 0.95);
// Least squares y = intercept + slope * x with t statistics.
TestResult simple_regression(std::span<const double> x, std::span<const double> y);

struct TestParams {
  double mu0 = 0;
  double p0 = 0.5;
  double conf_level = 0.95;
};

// Uniform entry point: `a`/`b` are the samples (x and y; for binom_exact
// a = {successes, trials}).
TestResult stat_test(TestKind kind, std::span<const double> a, std::span<const double> b = {},
                     const TestParams& params = {});

}  // namespace quizforge::stats
