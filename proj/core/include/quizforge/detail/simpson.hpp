#pragma once

#include <cmath>
#include <string>

namespace quizforge::expr {
namespace detail {

template <typename F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                    int depth_left) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (std::fabs(delta) <= 15 * tol) return left + right + delta / 15;
  if (depth_left <= 0) throw EvalError("integrate: no convergence within the recursion limit");
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2, depth_left - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2, depth_left - 1);
}

}  // namespace detail

template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw EvalError("integrate: limits must be finite");
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  const double result = detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
  if (!std::isfinite(result)) throw EvalError("integrate: non-finite result");
  return result;
}

}  // namespace quizforge::expr
