#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace halflab {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long evaluations = 0;
};

namespace detail {

template <class F>
void simpson_rec(F& f, double a, double b, double fa, double fm, double fb, double whole,
                 double tol, int depth, QuadratureResult& out) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  out.evaluations += 2;
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    out.value += left + right + delta / 15.0;
    out.error_estimate += std::fabs(delta) / 15.0;
    return;
  }
  simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
  simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}

}  // namespace detail

// Adaptive Simpson with Richardson correction. tol is an absolute target for
// the whole interval; the returned error_estimate is the accumulated local
// extrapolation residue (a realistic, usually conservative, bound).
template <class F>
QuadratureResult adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 32) {
  QuadratureResult out;
  if (!(b > a)) return out;
  double fa = f(a), fm = f(0.5 * (a + b)), fb = f(b);
  out.evaluations = 3;
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth, out);
  return out;
}

// Composite integration split at the given interior breakpoints, so piecewise
// integrands are fed to the adaptive rule one smooth piece at a time.
template <class F>
QuadratureResult adaptive_simpson_split(F&& f, double a, double b,
                                        const std::vector<double>& breaks, double tol) {
  std::vector<double> cuts{a};
  for (double c : breaks)
    if (c > a + 1e-14 && c < b - 1e-14) cuts.push_back(c);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  QuadratureResult total;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto part = adaptive_simpson(f, cuts[i], cuts[i + 1],
                                 tol * (cuts[i + 1] - cuts[i]) / (b - a));
    total.value += part.value;
    total.error_estimate += part.error_estimate;
    total.evaluations += part.evaluations;
  }
  return total;
}

// Bisection for a sign change of f on [lo,hi]; f(lo), f(hi) must differ in sign.
template <class F>
double bisect_root(F&& f, double lo, double hi, double xtol, int max_iter = 200) {
  double flo = f(lo);
  for (int i = 0; i < max_iter && hi - lo > xtol; ++i) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if ((flo <= 0.0) == (fm <= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Golden-section minimization of a unimodal f on [lo,hi].
template <class F>
double golden_min(F&& f, double lo, double hi, double xtol, int max_iter = 200) {
  constexpr double invphi = 0.6180339887498949;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < max_iter && hi - lo > xtol; ++i) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

// Trapezoid rule over equally spaced samples y_0..y_m on step h.
inline double trapezoid(const std::vector<double>& y, double h) {
  if (y.size() < 2) return 0.0;
  double s = 0.5 * (y.front() + y.back());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
  return s * h;
}

}  // namespace halflab
