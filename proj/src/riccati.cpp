#include "halflab/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "halflab/eigensolver.hpp"

namespace halflab {

namespace {

// Value of q at x taken from the piece covering the open cell around `inside`,
// so one-sided limits at piece edges come out exact. value_scalar() is
// right-continuous and would pick the wrong side for the RK4 stage at a cell's
// right endpoint.
double piece_value(const PotentialProfile& q, double inside, double x) {
  for (const auto& p : q.pieces) {
    if (!(p.from <= inside && inside < p.to)) continue;
    switch (p.kind) {
      case PieceKind::constant:
        return p.coeffs[0](0, 0);
      case PieceKind::centrifugal:
        return p.coeffs[0](0, 0) / (x * x);
      case PieceKind::poly: {
        double t = x - p.from;
        double v = 0.0;
        for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it)
          v = v * t + (*it)(0, 0);
        return v;
      }
    }
  }
  return 0.0;
}

struct OdeState {
  double u, v;
};

// One classical RK4 step of u'' = (q + gamma^2) u - ((d-1)/r) u' over [x0,x1],
// a subcell free of potential breakpoints.
OdeState rk4_step(const PotentialProfile& q, double gamma2, int dimension, double x0,
                  double x1, OdeState y) {
  double mid = 0.5 * (x0 + x1);
  double dm1 = static_cast<double>(dimension - 1);
  auto f = [&](double x, OdeState s) {
    double qq = piece_value(q, mid, x) + gamma2;
    return OdeState{s.v, qq * s.u - dm1 / x * s.v};
  };
  double h = x1 - x0;
  OdeState k1 = f(x0, y);
  OdeState k2 = f(mid, {y.u + 0.5 * h * k1.u, y.v + 0.5 * h * k1.v});
  OdeState k3 = f(mid, {y.u + 0.5 * h * k2.u, y.v + 0.5 * h * k2.v});
  OdeState k4 = f(x1, {y.u + h * k3.u, y.v + h * k3.v});
  return {y.u + h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
          y.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
}

void check_inputs(const PotentialProfile& q, double a, double b, double gamma,
                  int dimension) {
  q.validate();
  if (!q.scalar())
    throw validation_error("riccati decomposition requires a scalar profile, got " +
                           std::to_string(q.channel_dim) + " channels");
  if (!(a >= 1.0 && b > a))
    throw validation_error("interval [" + format17(a) + ", " + format17(b) +
                           "] must satisfy 1 <= a < b");
  if (!(gamma >= 0.0)) throw validation_error("gamma must be nonnegative");
  if (dimension < 1 || dimension > 9)
    throw validation_error("dimension must be in 1..9, got " + std::to_string(dimension));
}

}  // namespace

std::vector<double> radial_nodes(double a, double b, double h) {
  if (!(h > 0.0)) throw validation_error("node spacing must be positive");
  long n = std::max<long>(16, std::lround((b - a) / h));
  std::vector<double> r(static_cast<std::size_t>(n) + 1);
  double step = (b - a) / static_cast<double>(n);
  for (long i = 0; i <= n; ++i) r[static_cast<std::size_t>(i)] = a + step * static_cast<double>(i);
  r.back() = b;
  return r;
}

Shot shoot(const PotentialProfile& q, const std::vector<double>& nodes, double gamma,
           int dimension, double slope) {
  if (nodes.size() < 2) throw validation_error("shot needs at least two nodes");
  double gamma2 = gamma * gamma;
  std::vector<double> bps = q.breakpoints();

  Shot out;
  out.u.resize(nodes.size());
  out.du.resize(nodes.size());
  out.u[0] = 1.0;
  out.du[0] = slope;
  out.positive = true;
  int last_sign = 1;

  OdeState y{1.0, slope};
  auto bp = std::upper_bound(bps.begin(), bps.end(), nodes.front());
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    double x = nodes[i];
    double xe = nodes[i + 1];
    // split the cell at potential piece edges so every RK4 stage sees one
    // smooth polynomial
    while (bp != bps.end() && *bp < xe) {
      if (*bp > x) {
        y = rk4_step(q, gamma2, dimension, x, *bp, y);
        x = *bp;
      }
      ++bp;
    }
    y = rk4_step(q, gamma2, dimension, x, xe, y);
    out.u[i + 1] = y.u;
    out.du[i + 1] = y.v;
    if (!(y.u > 0.0)) out.positive = false;
    int sign = y.u > 0.0 ? 1 : (y.u < 0.0 ? -1 : 0);
    if (sign != 0 && sign != last_sign) {
      ++out.sign_changes;
      last_sign = sign;
    }
  }
  out.u_end = out.u.back();
  return out;
}

ShootingSolution positive_solution(const PotentialProfile& q, double a, double b,
                                   double gamma, int dimension,
                                   const RiccatiParams& params) {
  check_inputs(q, a, b, gamma, dimension);
  double bottom = lowest_eigenvalue_on(q, a, b, params.h);
  double bound = -gamma * gamma;
  if (bottom < bound)
    throw precondition_error(
        "lowest Dirichlet eigenvalue on [" + format17(a) + ", " + format17(b) + "] is " +
        format17(bottom) + ", below -gamma^2 = " + format17(bound) +
        "; no positive solution is guaranteed");

  std::vector<double> nodes = radial_nodes(a, b, params.h);

  // u_end is linear and strictly increasing in the slope, so the target
  // u(b) = 1 has a unique root; any slope at or above it gives u > 0 because
  // slopes below the zero-crossing threshold end with u(b) < 0.
  auto target = [&](double s) { return shoot(q, nodes, gamma, dimension, s); };

  double s_lo = 0.0, s_hi = 0.0;
  Shot probe = target(0.0);
  double g0 = probe.u_end - 1.0;
  if (g0 == 0.0 && probe.positive)
    return {std::move(nodes), std::move(probe.u), std::move(probe.du), 0.0, bottom};
  bool found = false;
  if (g0 > 0.0) {
    s_hi = 0.0;
    for (double s = -1.0; s >= -1e12; s *= 2.0) {
      if (target(s).u_end - 1.0 < 0.0) {
        s_lo = s;
        found = true;
        break;
      }
    }
  } else {
    s_lo = 0.0;
    for (double s = 1.0; s <= 1e12; s *= 2.0) {
      if (target(s).u_end - 1.0 > 0.0) {
        s_hi = s;
        found = true;
        break;
      }
    }
  }
  if (!found)
    throw precondition_error("slope search failed to bracket u(b) = 1 on [" + format17(a) +
                             ", " + format17(b) + "]; the shot family is degenerate");

  for (int it = 0; it < params.bisection_steps; ++it) {
    double mid = 0.5 * (s_lo + s_hi);
    if (mid == s_lo || mid == s_hi) break;
    if (target(mid).u_end - 1.0 > 0.0)
      s_hi = mid;
    else
      s_lo = mid;
  }

  Shot fin = target(s_hi);
  if (!fin.positive)
    throw precondition_error("shot at the selected slope " + format17(s_hi) +
                             " is not positive throughout [" + format17(a) + ", " +
                             format17(b) + "] despite the spectral bound " +
                             format17(bottom));
  ShootingSolution sol;
  sol.r = std::move(nodes);
  sol.u = std::move(fin.u);
  sol.du = std::move(fin.du);
  sol.slope = s_hi;
  sol.bottom = bottom;
  return sol;
}

RiccatiDecomposition decompose(const PotentialProfile& q, double a, double b, double gamma,
                               int dimension, const RiccatiParams& params) {
  check_inputs(q, a, b, gamma, dimension);
  PotentialProfile base = params.base ? *params.base : PotentialProfile::zero(1);
  if (params.base) {
    base.validate();
    if (!base.scalar()) throw validation_error("base potential must be scalar");
    if (base.neg_part_sup() > 1e-12)
      throw validation_error("base potential must be nonnegative, found negative part " +
                             format17(base.neg_part_sup()));
  }

  ShootingSolution sol = positive_solution(q, a, b, gamma, dimension, params);

  RiccatiDecomposition dec;
  dec.a = a;
  dec.b = b;
  dec.gamma = gamma;
  dec.dimension = dimension;
  dec.grid_h = sol.r[1] - sol.r[0];
  dec.initial_slope = sol.slope;
  dec.bottom = sol.bottom;
  dec.base = std::move(base);
  dec.r = std::move(sol.r);
  dec.u = std::move(sol.u);
  dec.du = std::move(sol.du);

  // Companion spectral bound (the sign-flipped potential, shifted by twice the
  // base part): the weighted estimates assume it as well, so its failure is
  // recorded but does not block the decomposition itself.
  PotentialProfile companion =
      params.base ? sum(scaled(q, -1.0), scaled(dec.base, 2.0)) : scaled(q, -1.0);
  dec.bottom_companion = lowest_eigenvalue_on(companion, a, b, params.h);
  if (dec.bottom_companion < -gamma * gamma)
    dec.warning = "companion bound fails: sign-flipped potential has bottom " +
                  format17(dec.bottom_companion) + " below -gamma^2 = " +
                  format17(-gamma * gamma) + "; weighted estimates are not covered";

  std::size_t n = dec.r.size();
  dec.A.resize(n);
  for (std::size_t i = 0; i < n; ++i) dec.A[i] = dec.du[i] / dec.u[i];

  dec.residual_nodes.assign(n, 0.0);
  double gamma2 = gamma * gamma;
  double dm1 = static_cast<double>(dimension - 1);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double dA = (dec.A[i + 1] - dec.A[i - 1]) / (dec.r[i + 1] - dec.r[i - 1]);
    double lhs = q.sample_scalar(dec.r[i]) + gamma2;
    double rhs = dA + dm1 * dec.A[i] / dec.r[i] + dec.A[i] * dec.A[i];
    dec.residual_nodes[i] = std::fabs(lhs - rhs);
    dec.residual = std::max(dec.residual, dec.residual_nodes[i]);
  }
  return dec;
}

ordered_json RiccatiDecomposition::to_json() const {
  ordered_json j;
  j["interval"] = {a, b};
  j["gamma"] = gamma;
  j["dimension"] = dimension;
  j["grid_h"] = grid_h;
  j["initial_slope"] = initial_slope;
  j["bottom"] = bottom;
  j["bottom_companion"] = bottom_companion;
  j["residual"] = residual;
  j["warning"] = warning;
  return j;
}

void RiccatiDecomposition::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out << "r,u,A,residual\n";
  char buf[96];
  for (std::size_t i = 0; i < r.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", r[i], u[i], A[i]);
    out << buf;
    // endpoints have no centered difference, so the residual field stays empty
    if (i > 0 && i + 1 < r.size()) {
      std::snprintf(buf, sizeof buf, ",%.17g", residual_nodes[i]);
      out << buf;
    } else {
      out << ',';
    }
    out << '\n';
  }
  if (!out) throw io_error("failed while writing " + path);
}

WeightedEstimateReport weighted_estimate(const RiccatiDecomposition& dec, double a_tilde,
                                         double b_tilde) {
  if (!(dec.a < a_tilde && a_tilde < b_tilde && b_tilde < dec.b))
    throw validation_error("window [" + format17(a_tilde) + ", " + format17(b_tilde) +
                           "] must sit strictly inside [" + format17(dec.a) + ", " +
                           format17(dec.b) + "]");
  if (dec.gamma > 0.0 && (dec.b - dec.a) > 67.0 / dec.gamma + 1e-12)
    throw precondition_error("interval width " + format17(dec.b - dec.a) +
                             " exceeds 67/gamma = " + format17(67.0 / dec.gamma));

  // trapezoid over the grid restricted to [a~, b~], with linear interpolation
  // of A at the fractional end cells
  auto interp = [&](double x) {
    double t = (x - dec.a) / dec.grid_h;
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(std::max(0.0, t)),
                                          dec.A.size() - 2);
    double w = t - static_cast<double>(i);
    return dec.A[i] * (1.0 - w) + dec.A[i + 1] * w;
  };
  std::size_t i0 = static_cast<std::size_t>(std::ceil((a_tilde - dec.a) / dec.grid_h - 1e-12));
  std::size_t i1 = static_cast<std::size_t>(std::floor((b_tilde - dec.a) / dec.grid_h + 1e-12));
  i0 = std::min(i0, dec.A.size() - 1);
  i1 = std::min(i1, dec.A.size() - 1);
  double acc = 0.0;
  if (i1 < i0) {
    // window narrower than one cell: single trapezoid on interpolated values
    double av = interp(a_tilde), bv = interp(b_tilde);
    acc = 0.5 * (av * av + bv * bv) * (b_tilde - a_tilde);
  } else {
    for (std::size_t i = i0; i + 1 <= i1; ++i)
      acc += 0.5 * (dec.A[i] * dec.A[i] + dec.A[i + 1] * dec.A[i + 1]) * dec.grid_h;
    double ra = dec.r[i0], rb = dec.r[i1];
    if (a_tilde < ra) {
      double av = interp(a_tilde);
      acc += 0.5 * (av * av + dec.A[i0] * dec.A[i0]) * (ra - a_tilde);
    }
    if (b_tilde > rb) {
      double bv = interp(b_tilde);
      acc += 0.5 * (dec.A[i1] * dec.A[i1] + bv * bv) * (b_tilde - rb);
    }
  }

  WeightedEstimateReport rep;
  rep.a = dec.a;
  rep.b = dec.b;
  rep.a_tilde = a_tilde;
  rep.b_tilde = b_tilde;
  rep.gamma = dec.gamma;
  rep.dimension = dec.dimension;
  rep.lhs = 0.5 * acc;
  rep.rhs_gamma_term = 67.0 * dec.gamma;
  rep.rhs_potential_term =
      dec.base.entry11_integral(dec.a, dec.b) + 6.0 * (1.0 / dec.a - 1.0 / dec.b);
  rep.rhs_edge_term = 6.0 * (1.0 / (a_tilde - dec.a) + 1.0 / (dec.b - b_tilde));
  rep.margin = rep.rhs_total() - rep.lhs;
  rep.two_sided = dec.warning.empty();
  return rep;
}

ordered_json WeightedEstimateReport::to_json() const {
  ordered_json j;
  j["interval"] = {a, b};
  j["window"] = {a_tilde, b_tilde};
  j["gamma"] = gamma;
  j["dimension"] = dimension;
  j["lhs"] = lhs;
  j["rhs_terms"]["gamma_term"] = rhs_gamma_term;
  j["rhs_terms"]["potential_term"] = rhs_potential_term;
  j["rhs_terms"]["edge_term"] = rhs_edge_term;
  j["rhs_terms"]["total"] = rhs_total();
  j["margin"] = margin;
  j["two_sided_hypothesis"] = two_sided;
  return j;
}

ProductIdentityCheck product_identity_check(const PotentialProfile& q, const Grid& grid,
                                            const std::vector<double>& psi, double lambda,
                                            const std::vector<double>& phi) {
  std::size_t m = static_cast<std::size_t>(grid.interior_count());
  if (psi.size() != m || phi.size() != m)
    throw validation_error("psi and phi must hold " + std::to_string(m) +
                           " interior values, got " + std::to_string(psi.size()) + " and " +
                           std::to_string(phi.size()));
  double h = grid.h;
  auto at = [&](const std::vector<double>& v, long i) -> double {
    if (i < 1 || i > static_cast<long>(m)) return 0.0;
    return v[static_cast<std::size_t>(i - 1)];
  };
  // phi is a cutoff, not a Dirichlet vector: extend it flat at the ends
  auto phi_at = [&](long i) -> double {
    if (i < 1) return phi.front();
    if (i > static_cast<long>(m)) return phi.back();
    return phi[static_cast<std::size_t>(i - 1)];
  };

  ProductIdentityCheck out;
  for (long i = 0; i <= static_cast<long>(m); ++i) {
    double p0 = phi_at(i) * at(psi, i);
    double p1 = phi_at(i + 1) * at(psi, i + 1);
    double dprod = (p1 - p0) / h;
    double dphi = (phi_at(i + 1) - phi_at(i)) / h;
    out.lhs += h * dprod * dprod;
    out.rhs += h * dphi * dphi * at(psi, i) * at(psi, i);
  }
  for (long i = 1; i <= static_cast<long>(m); ++i) {
    double p = phi_at(i) * at(psi, i);
    out.lhs += h * q.sample_scalar(grid.node(i)) * p * p;
    out.rhs += h * lambda * p * p;
  }
  out.gap = std::fabs(out.lhs - out.rhs);
  return out;
}

}  // namespace halflab
