#include "halflab/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace halflab {

double free_density(double lambda) {
  double k = std::sqrt(lambda);
  double w = 1.0 - std::cos(k);
  return w * w / (M_PI * lambda * k);
}

std::vector<double> default_lambda_grid(int points) {
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(points) + 32);
  const double lo = 0.05, hi = 100.0;
  for (int i = 0; i < points; ++i)
    grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)));
  for (int k = 1;; ++k) {
    double z = 4.0 * M_PI * M_PI * k * k;
    if (z >= hi) break;
    for (double d : {-0.5, -0.1, -0.01, 0.01, 0.1, 0.5}) grid.push_back(z + d);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

namespace {

struct Segment {
  double a, b;
  const Piece* piece;  // nullptr: free region
  bool in_window;      // [a,b] inside [1,2], where f lives
};

// Cut [1, R] at piece edges and at r=2, and attach to each part the single
// piece whose polynomial is valid on its closure. Evaluating that polynomial
// at the part's own right edge gives the left limit, so RK4 stages never read
// across a jump.
std::vector<Segment> segments(const PotentialProfile& q, double R) {
  if (!q.compact())
    throw precondition_error("spectral routes need a compactly supported profile");
  std::vector<double> edges{1.0, 2.0, R};
  for (const Piece& p : q.pieces) {
    if (p.from > 1.0 && p.from < R) edges.push_back(p.from);
    if (p.to < R) edges.push_back(p.to);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double x, double y) { return std::fabs(x - y) < 1e-14; }),
              edges.end());
  std::vector<Segment> out;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (edges[i] >= R) break;
    Segment s;
    s.a = edges[i];
    s.b = std::min(edges[i + 1], R);
    double mid = 0.5 * (s.a + s.b);
    s.piece = nullptr;
    for (const Piece& p : q.pieces)
      if (mid >= p.from && mid < p.to) {
        s.piece = &p;
        break;
      }
    s.in_window = s.b <= 2.0 + 1e-14;
    out.push_back(s);
  }
  return out;
}

double ode_step(double k_scale) { return std::min(1e-3, 0.01 / std::max(1.0, k_scale)); }

}  // namespace

JostSample jost_sample(const PotentialProfile& q, double lambda) {
  if (!q.scalar()) throw precondition_error("jost_sample is scalar-only");
  if (!(lambda > 0.0)) throw precondition_error("jost_sample needs lambda > 0");
  const double R = std::max(q.compact() ? q.support_end : 2.0, 2.0);
  JostSample s;
  s.lambda = lambda;
  s.k = std::sqrt(lambda);

  double phi = 0.0, dphi = 1.0, m = 0.0;
  for (const Segment& seg : segments(q, R)) {
    auto qv = [&](double r) { return seg.piece ? seg.piece->value_scalar(r) : 0.0; };
    const double win = seg.in_window ? 1.0 : 0.0;
    const long n = std::max(1L, std::lround(std::ceil((seg.b - seg.a) / ode_step(s.k))));
    const double h = (seg.b - seg.a) / static_cast<double>(n);
    for (long i = 0; i < n; ++i) {
      const double r = seg.a + h * static_cast<double>(i);
      const double q0 = qv(r) - lambda, qm = qv(r + 0.5 * h) - lambda,
                   q1 = qv(r + h) - lambda;
      // k: (phi, dphi, m)' = (dphi, q*phi, win*phi)
      double k1p = dphi, k1d = q0 * phi, k1m = win * phi;
      double p2 = phi + 0.5 * h * k1p, d2 = dphi + 0.5 * h * k1d;
      double k2p = d2, k2d = qm * p2, k2m = win * p2;
      double p3 = phi + 0.5 * h * k2p, d3 = dphi + 0.5 * h * k2d;
      double k3p = d3, k3d = qm * p3, k3m = win * p3;
      double p4 = phi + h * k3p, d4 = dphi + h * k3d;
      double k4p = d4, k4d = q1 * p4, k4m = win * p4;
      phi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
      dphi += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
      m += h / 6.0 * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
    }
  }
  s.phi = phi;
  s.dphi = dphi;
  s.m = m;
  s.jost_sq = lambda * phi * phi + dphi * dphi;
  s.density = s.k * m * m / (M_PI * s.jost_sq);
  return s;
}

std::complex<double> stieltjes_continuum(const PotentialProfile& q, std::complex<double> z) {
  using cd = std::complex<double>;
  if (z.imag() < 0.0)
    throw precondition_error("outgoing solve needs Im z >= 0");
  const int n = q.channel_dim;
  const double R = std::max(q.compact() ? q.support_end : 2.0, 2.0);
  const cd ik = cd(0.0, 1.0) * std::sqrt(z);

  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n), dv = v;
  Eigen::MatrixXcd Phi = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd dPhi = Eigen::MatrixXcd::Identity(n, n);
  Eigen::VectorXcd Iv = Eigen::VectorXcd::Zero(n);
  Eigen::MatrixXcd IPhi = Eigen::MatrixXcd::Zero(n, n);

  Eigen::MatrixXd Qr(n, n);
  Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(n);
  e0(0) = 1.0;

  struct State {
    Eigen::VectorXcd v, dv, Iv;
    Eigen::MatrixXcd Phi, dPhi, IPhi;
  };
  const double kscale = std::abs(std::sqrt(z));
  for (const Segment& seg : segments(q, R)) {
    const double win = seg.in_window ? 1.0 : 0.0;
    auto deriv = [&](double r, const State& s, State& out) {
      if (seg.piece)
        seg.piece->value_into(r, Qr);
      else
        Qr.setZero(n, n);
      out.v = s.dv;
      out.dv = Qr * s.v - z * s.v - win * e0;
      out.Phi = s.dPhi;
      out.dPhi = Qr * s.Phi - z * s.Phi;
      out.Iv = win * s.v;
      out.IPhi = win * s.Phi;
    };
    const long nst = std::max(1L, std::lround(std::ceil((seg.b - seg.a) / ode_step(kscale))));
    const double h = (seg.b - seg.a) / static_cast<double>(nst);
    State y{v, dv, Iv, Phi, dPhi, IPhi}, k1, k2, k3, k4, t;
    auto axpy = [&](const State& base, double a, const State& k, State& out) {
      out.v = base.v + a * k.v;
      out.dv = base.dv + a * k.dv;
      out.Iv = base.Iv + a * k.Iv;
      out.Phi = base.Phi + a * k.Phi;
      out.dPhi = base.dPhi + a * k.dPhi;
      out.IPhi = base.IPhi + a * k.IPhi;
    };
    for (long i = 0; i < nst; ++i) {
      const double r = seg.a + h * static_cast<double>(i);
      deriv(r, y, k1);
      axpy(y, 0.5 * h, k1, t);
      deriv(r + 0.5 * h, t, k2);
      axpy(y, 0.5 * h, k2, t);
      deriv(r + 0.5 * h, t, k3);
      axpy(y, h, k3, t);
      deriv(r + h, t, k4);
      const double w = h / 6.0;
      y.v += w * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
      y.dv += w * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
      y.Iv += w * (k1.Iv + 2.0 * k2.Iv + 2.0 * k3.Iv + k4.Iv);
      y.Phi += w * (k1.Phi + 2.0 * k2.Phi + 2.0 * k3.Phi + k4.Phi);
      y.dPhi += w * (k1.dPhi + 2.0 * k2.dPhi + 2.0 * k3.dPhi + k4.dPhi);
      y.IPhi += w * (k1.IPhi + 2.0 * k2.IPhi + 2.0 * k3.IPhi + k4.IPhi);
    }
    v = y.v;
    dv = y.dv;
    Iv = y.Iv;
    Phi = y.Phi;
    dPhi = y.dPhi;
    IPhi = y.IPhi;
  }

  // u = v + Phi c with u'(R) = ik u(R):
  Eigen::MatrixXcd A = dPhi - ik * Phi;
  Eigen::VectorXcd rhs = ik * v - dv;
  Eigen::VectorXcd c = A.partialPivLu().solve(rhs);
  return (Iv + IPhi * c)(0);
}

double density_jost(const PotentialProfile& q, double lambda) {
  if (q.scalar()) return jost_sample(q, lambda).density;
  return stieltjes_continuum(q, std::complex<double>(lambda, 0.0)).imag() / M_PI;
}

double density_resolvent_limit(const PotentialProfile& q, double lambda) {
  const double eps = 1e-3;
  double f1 = stieltjes_continuum(q, {lambda, eps}).imag() / M_PI;
  double f2 = stieltjes_continuum(q, {lambda, 0.5 * eps}).imag() / M_PI;
  double f3 = stieltjes_continuum(q, {lambda, 0.25 * eps}).imag() / M_PI;
  double r1 = 2.0 * f2 - f1;
  double r2 = 2.0 * f3 - f2;
  double out = (4.0 * r2 - r1) / 3.0;
  if (out < 0.0 && out > -1e-10) out = 0.0;
  return out;
}

SpectralDensity density_jost(const PotentialProfile& q, const std::vector<double>& grid) {
  SpectralDensity d;
  d.lambda_grid = grid;
  d.method = "jost-exact";
  d.density.reserve(grid.size());
  for (double lam : grid) d.density.push_back(density_jost(q, lam));
  return d;
}

SpectralDensity density_resolvent_limit(const PotentialProfile& q,
                                        const std::vector<double>& grid) {
  SpectralDensity d;
  d.lambda_grid = grid;
  d.method = "resolvent-limit";
  d.epsilon = 2.5e-4;  // finest rung of the extrapolation ladder
  d.density.reserve(grid.size());
  for (double lam : grid) d.density.push_back(density_resolvent_limit(q, lam));
  return d;
}

SpectralDensity density_resolvent_limit(const DiscreteOperator& op,
                                        const std::vector<double>& grid, double epsilon) {
  if (!(epsilon > 0.0)) throw precondition_error("resolvent limit needs epsilon > 0");
  SpectralDensity d;
  d.lambda_grid = grid;
  d.method = "resolvent-limit";
  d.epsilon = epsilon;
  d.density.reserve(grid.size());
  for (double lam : grid)
    d.density.push_back(stieltjes(op, {lam, epsilon}).imag() / M_PI);
  return d;
}

ordered_json SpectralDensity::to_json() const {
  ordered_json j;
  j["lambda_grid"] = lambda_grid;
  j["density"] = density;
  j["method"] = method;
  if (method == "resolvent-limit") j["epsilon"] = epsilon;
  return j;
}

}  // namespace halflab
