#include "halflab/eigensolver.hpp"

#include <cmath>
#include <limits>

#include <lapacke.h>

namespace halflab {

namespace {

constexpr double kPivMin = 1e-100;
constexpr double kZeroCut = 1e-10;

long count_below_scalar(const DiscreteOperator& op, double x) {
  const long m = op.grid.interior_count();
  const double off2 = op.off() * op.off();
  long count = 0;
  double dhat = 1.0;
  for (long i = 0; i < m; ++i) {
    double d = op.dval(i) - x;
    if (i > 0) d -= off2 / dhat;
    if (std::fabs(d) < kPivMin) d = -kPivMin;
    if (d < 0.0) ++count;
    dhat = d;
  }
  return count;
}

long count_below_block(const DiscreteOperator& op, double x) {
  const long m = op.grid.interior_count();
  const int n = op.n;
  const double off2 = op.off() * op.off();
  long count = 0;
  Eigen::MatrixXd dhat_inv(n, n), dh(n, n);
  for (long i = 0; i < m; ++i) {
    dh = op.block(i);
    dh.diagonal().array() -= x;
    if (i > 0) dh -= off2 * dhat_inv;
    dh = 0.5 * (dh + dh.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dh, Eigen::EigenvaluesOnly);
    for (int k = 0; k < n; ++k)
      if (es.eigenvalues()(k) <= 0.0) ++count;
    dhat_inv = dh.partialPivLu().inverse();
    dhat_inv = 0.5 * (dhat_inv + dhat_inv.transpose()).eval();
  }
  return count;
}

// Gershgorin bounds over the block rows.
std::pair<double, double> spectrum_bracket(const DiscreteOperator& op) {
  const long m = op.grid.interior_count();
  const double reach = 2.0 * std::fabs(op.off());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (long i = 0; i < m; ++i) {
    double bmin, bmax;
    if (op.n == 1) {
      bmin = bmax = op.dval(i);
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.block(i), Eigen::EigenvaluesOnly);
      bmin = es.eigenvalues().minCoeff();
      bmax = es.eigenvalues().maxCoeff();
    }
    lo = std::min(lo, bmin - reach);
    hi = std::max(hi, bmax + reach);
  }
  return {lo, hi};
}

std::vector<double> real_thomas_solve(const DiscreteOperator& op, double shift,
                                      const std::vector<double>& rhs) {
  std::vector<std::complex<double>> crhs(rhs.begin(), rhs.end());
  auto u = resolvent_apply(op, shift, crhs);
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i].real();
  return out;
}

}  // namespace

long count_below(const DiscreteOperator& op, double x) {
  return op.n == 1 ? count_below_scalar(op, x) : count_below_block(op, x);
}

std::vector<double> negative_spectrum(const DiscreteOperator& op, double tol) {
  auto [lo0, hi0] = spectrum_bracket(op);
  (void)hi0;
  const double edge = -kZeroCut;
  const long k = count_below(op, edge);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(k));
  double lo_carry = lo0;
  for (long j = 1; j <= k; ++j) {
    double lo = lo_carry, hi = edge;
    while (hi - lo > tol) {
      double mid = 0.5 * (lo + hi);
      if (count_below(op, mid) >= j)
        hi = mid;
      else
        lo = mid;
    }
    double lam = 0.5 * (lo + hi);
    lo_carry = lo;
    if (std::fabs(lam) >= kZeroCut) out.push_back(lam);
  }
  return out;
}

std::vector<double> negative_spectrum_dense(const DiscreteOperator& op) {
  const long m = op.grid.interior_count();
  const int n = op.n;
  const lapack_int dim = static_cast<lapack_int>(m * n);
  std::vector<double> w(static_cast<std::size_t>(dim));
  if (n == 1) {
    std::vector<double> d(static_cast<std::size_t>(m));
    std::vector<double> e(static_cast<std::size_t>(m > 1 ? m - 1 : 1), op.off());
    for (long i = 0; i < m; ++i) d[static_cast<std::size_t>(i)] = op.dval(i);
    auto [lo, hi] = spectrum_bracket(op);
    (void)hi;
    lapack_int found = 0;
    std::vector<double> zdummy(1);
    std::vector<lapack_int> isuppz(static_cast<std::size_t>(2 * dim));
    lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'N', 'V', dim, d.data(), e.data(),
                                     lo - 1.0, -kZeroCut, 0, 0, 0.0, &found, w.data(),
                                     zdummy.data(), 1, isuppz.data());
    if (info != 0)
      throw dependency_error("dstevr failed with info=" + std::to_string(info));
    return {w.begin(), w.begin() + found};
  }
  // block case: band storage, lower triangle, bandwidth n
  const lapack_int kd = n;
  const lapack_int ldab = kd + 1;
  std::vector<double> ab(static_cast<std::size_t>(ldab) * static_cast<std::size_t>(dim), 0.0);
  const double off = op.off();
  for (long i = 0; i < m; ++i) {
    auto blk = op.block(i);
    for (int c = 0; c < n; ++c) {
      const long col = i * n + c;
      for (int r = c; r < n; ++r)
        ab[static_cast<std::size_t>(r - c) + static_cast<std::size_t>(col) * ldab] = blk(r, c);
      if (i + 1 < m)
        ab[static_cast<std::size_t>(kd) + static_cast<std::size_t>(col) * ldab] = off;
    }
  }
  std::vector<double> zdummy(1);
  lapack_int info = LAPACKE_dsbev(LAPACK_COL_MAJOR, 'N', 'L', dim, kd, ab.data(), ldab,
                                  w.data(), zdummy.data(), 1);
  if (info != 0) throw dependency_error("dsbev failed with info=" + std::to_string(info));
  std::vector<double> out;
  for (double lam : w) {
    if (lam < -kZeroCut) out.push_back(lam);
  }
  return out;
}

double lowest_eigenvalue(const DiscreteOperator& op, double tol) {
  auto [lo, hi] = spectrum_bracket(op);
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (count_below(op, mid) >= 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

double lowest_eigenvalue_on(const PotentialProfile& q, double a, double b, double h) {
  Grid g = Grid::from_range(a, b, h, 4);
  DiscreteOperator op = assemble_operator(q, g);
  return lowest_eigenvalue(op);
}

std::vector<double> ground_state(const DiscreteOperator& op, double lambda1) {
  const double delta = std::max(1e-8, 1e-6 * std::fabs(lambda1));
  const double shift = lambda1 - delta;
  const long len = op.size();
  std::vector<double> u(static_cast<std::size_t>(len), 1.0);
  auto normalize = [&](std::vector<double>& v) {
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm * op.grid.h);
    double s = 1.0 / nrm;
    long lead = 0;
    while (lead + 1 < len && std::fabs(v[static_cast<std::size_t>(lead)]) <
                                 1e-14 * std::fabs(v[static_cast<std::size_t>(len / 2)]))
      ++lead;
    if (v[static_cast<std::size_t>(lead)] < 0.0) s = -s;
    for (double& x : v) x *= s;
    return nrm;
  };
  normalize(u);
  for (int it = 0; it < 100; ++it) {
    std::vector<double> next = real_thomas_solve(op, shift, u);
    normalize(next);
    double diff = 0.0;
    for (long i = 0; i < len; ++i)
      diff = std::max(diff, std::fabs(next[static_cast<std::size_t>(i)] -
                                      u[static_cast<std::size_t>(i)]));
    u.swap(next);
    if (diff < 1e-12) break;
  }
  if (op.n == 1) {
    double peak = 0.0;
    for (double x : u) peak = std::max(peak, std::fabs(x));
    int flips = 0;
    double prev = 0.0;
    for (double x : u) {
      if (std::fabs(x) < 1e-8 * peak) continue;
      if (prev != 0.0 && (x < 0.0) != (prev < 0.0)) ++flips;
      prev = x;
    }
    if (flips != 0) throw error("ground state changed sign in the interior");
  }
  return u;
}

ordered_json EigenReport::to_json() const {
  ordered_json j;
  j["eigenvalues"] = eigenvalues;
  j["sum_sqrt"] = sum_sqrt;
  j["method"] = method;
  j["grid"] = {{"h", grid.h}, {"L", grid.r_max()}};
  return j;
}

EigenReport eigen_report(const PotentialProfile& q, const Grid& g) {
  EigenReport rep;
  rep.grid = g;
  rep.method = "sturm_bisection";
  DiscreteOperator op = assemble_operator(q, g);
  rep.eigenvalues = negative_spectrum(op);
  rep.sum_sqrt = 0.0;
  for (double lam : rep.eigenvalues) rep.sum_sqrt += std::sqrt(std::fabs(lam));
  return rep;
}

}  // namespace halflab
