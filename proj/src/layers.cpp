#include "halflab/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "halflab/eigensolver.hpp"
#include "halflab/grid.hpp"
#include "halflab/operator.hpp"

namespace halflab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PotentialProfile composed(const PotentialProfile& v, const PotentialProfile& w,
                          int sign) {
  return sum(w, sign >= 0 ? v : scaled(v, -1.0));
}

// Every eigensolve snaps its interval to the one lattice 1 + k h while the
// layer geometry stays exact. Rounding is monotone, so nested regions give
// nested node sets and their matrices are principal submatrices of one
// another: level monotonicity and the claim margins then hold to solver
// tolerance. Solving on raw endpoints instead would shift feature edges by
// up to h/2 relative to the nodes, an O(h) eigenvalue wobble that swamps
// those comparisons.
double lattice(double r, double h) {
  return 1.0 + std::round((r - 1.0) / h) * h;
}

// Lowest Dirichlet eigenvalue on [p, q], or +inf when the interval is narrow
// enough that the free box term alone dominates the potential.
double interval_bottom(const PotentialProfile& q, double p, double qq, double h,
                       double sup) {
  double width = qq - p;
  if (width < 0.5 && M_PI * M_PI / (width * width) - sup > 1.0) return kInf;
  return lowest_eigenvalue_on(q, lattice(p, h), lattice(qq, h), h);
}

struct LevelPick {
  double eps = 0.0;       // -lowest bottom, clamped at 0
  double bottom = kInf;   // the minimizing bottom itself
  double comp_a = 0.0, comp_b = 0.0;
  int sign = +1;
  bool tail = false;      // minimizing component touches the extent
};

std::vector<std::pair<double, double>> complement(
    const std::vector<Layer>& layers, double lo, double hi) {
  std::vector<std::pair<double, double>> covered;
  covered.reserve(layers.size());
  for (const auto& L : layers) covered.emplace_back(L.a, L.b);
  std::sort(covered.begin(), covered.end());
  std::vector<std::pair<double, double>> out;
  double cursor = lo;
  for (const auto& [a, b] : covered) {
    if (a > cursor) out.emplace_back(cursor, std::min(a, hi));
    cursor = std::max(cursor, b);
    if (cursor >= hi) break;
  }
  if (cursor < hi) out.emplace_back(cursor, hi);
  // drop slivers produced by touching endpoints
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const auto& c) { return c.second - c.first < 1e-12; }),
            out.end());
  return out;
}

void note(const LayerBuildParams& params, const std::string& line) {
  if (params.trace) params.trace(line);
}

void enforce(const LayerSystem& sys, const std::string& where) {
  auto bad = geometric_violations(sys);
  if (!bad.empty())
    throw error("internal: layer invariant violated after " + where + ": " +
                bad.front());
}

ordered_json interval_json(double a, double b) { return ordered_json{a, b}; }

double own_width_unit(const Layer& L) { return 6.0 / std::sqrt(L.eps); }

}  // namespace

ordered_json WindowReport::to_json() const {
  ordered_json j;
  j["window"] = interval_json(alpha, beta);
  j["center"] = c;
  j["gamma"] = gamma;
  j["mass"] = mass;
  j["rd_lhs"] = rd_lhs;
  j["rd_rhs"] = rd_rhs;
  j["rayleigh"] = rayleigh;
  j["bottom"] = bottom;
  return j;
}

WindowReport window_search(const PotentialProfile& q, double a, double b,
                           double gamma, double h) {
  q.validate();
  if (!q.scalar())
    throw validation_error("window search requires a scalar profile");
  if (!(a >= 1.0) || !(b > a))
    throw validation_error("window search needs 1 <= a < b");
  if (!(gamma > 0.0)) throw validation_error("gamma must be positive");
  if (b - a < 6.0 / gamma - 1e-12)
    throw precondition_error("interval width " + format17(b - a) +
                             " is below 6/gamma = " + format17(6.0 / gamma));
  double la = lattice(a, h), lb = lattice(b, h);
  double bottom_ab = lowest_eigenvalue_on(q, la, lb, h);
  if (std::fabs(bottom_ab + gamma * gamma) >
      std::max(1e-8, 1e-6 * gamma * gamma))
    throw precondition_error("lowest eigenvalue on the interval is " +
                             format17(bottom_ab) + ", not -gamma^2 = " +
                             format17(-gamma * gamma));

  Grid g = Grid::from_range(la, lb, h);
  DiscreteOperator op = assemble_operator(q, g);
  std::vector<double> psi = ground_state(op, bottom_ab);
  long m = g.interior_count();

  // prefix sums of the trapezoid quadrature of psi^2 over [a, r_i]
  std::vector<double> pre(static_cast<std::size_t>(m) + 2, 0.0);
  auto psi2 = [&](long i) {
    if (i <= 0 || i > m) return 0.0;  // Dirichlet ends
    double value = psi[static_cast<std::size_t>(i - 1)];
    return value * value;
  };
  for (long i = 1; i <= m + 1; ++i)
    pre[static_cast<std::size_t>(i)] =
        pre[static_cast<std::size_t>(i - 1)] +
        0.5 * h * (psi2(i - 1) + psi2(i));
  auto mass_between = [&](double lo, double hi) {
    lo = std::max(lo, la);
    hi = std::min(hi, lb);
    if (hi <= lo) return 0.0;
    // linear interpolation of the prefix integral at fractional nodes
    auto at = [&](double r) {
      double t = (r - la) / h;
      long i = static_cast<long>(std::floor(t));
      i = std::max(0L, std::min(i, m));
      double frac = t - static_cast<double>(i);
      double base = pre[static_cast<std::size_t>(i)];
      double seg = 0.5 * h * (psi2(i) + psi2(i + 1));
      return base + seg * frac;  // good to O(h^2), matches trapezoid at nodes
    };
    return at(hi) - at(lo);
  };

  double L = 1.0 / gamma;
  double step = 1.0 / (10.0 * gamma);
  double best_c = a, best_mass = -1.0;
  long nsteps = static_cast<long>(std::ceil((b - a) / step));
  for (long j = 0; j <= nsteps; ++j) {
    double c = std::min(a + static_cast<double>(j) * step, b);
    double f = mass_between(c - L, c + L);
    if (f > best_mass + 1e-15 * std::max(1.0, best_mass)) {
      best_mass = f;
      best_c = c;
    }
  }

  WindowReport rep;
  rep.c = best_c;
  rep.gamma = gamma;
  rep.mass = best_mass;

  // trapezoid cutoff of the construction: phi = 1 inside |r-c|<L, linear down
  // to 0 at 3L; its derivative is gamma/2 on the two shoulder bands
  auto phi_at = [&](double r) {
    double t = std::fabs(r - best_c);
    if (t < L) return 1.0;
    if (t >= 3.0 * L) return 0.0;
    return 1.5 - t / (2.0 * L);
  };
  double shoulders = mass_between(best_c - 3.0 * L, best_c - L) +
                     mass_between(best_c + L, best_c + 3.0 * L);
  rep.rd_lhs = (gamma * gamma / 4.0) * shoulders;
  double phi_psi_sq = 0.0;
  for (long i = 1; i <= m; ++i) {
    double r = g.node(i);
    double p = phi_at(r) * psi[static_cast<std::size_t>(i - 1)];
    phi_psi_sq += h * p * p;
  }
  rep.rd_rhs = 0.5 * gamma * gamma * phi_psi_sq;

  // Rayleigh quotient of phi*psi on the [a,b] grid (forward differences);
  // a direct upper-bound certificate for the window bottom up to O(h)
  double dird = 0.0, qterm = 0.0;
  auto pp = [&](long i) {
    if (i <= 0 || i > m) return 0.0;
    return phi_at(g.node(i)) * psi[static_cast<std::size_t>(i - 1)];
  };
  for (long i = 0; i <= m; ++i) {
    double d = (pp(i + 1) - pp(i)) / h;
    dird += h * d * d;
  }
  for (long i = 1; i <= m; ++i)
    qterm += h * q.sample_scalar(g.node(i)) * pp(i) * pp(i);
  rep.rayleigh = (dird + qterm) / phi_psi_sq;

  // support window clipped to [a,b], then enlarged to width exactly 6/gamma
  double alpha = std::max(a, best_c - 3.0 * L);
  double beta = std::min(b, best_c + 3.0 * L);
  beta = std::min(b, alpha + 6.0 * L);
  alpha = std::max(a, beta - 6.0 * L);
  rep.alpha = alpha;
  rep.beta = beta;

  rep.bottom = lowest_eigenvalue_on(q, lattice(alpha, h), lattice(beta, h), h);
  if (rep.bottom > -gamma * gamma / 2.0 + std::max(1e-8, 1e-4 * gamma * gamma))
    throw error(
        "internal: window certificate failed: bottom on the returned window "
        "is " +
        format17(rep.bottom) + ", above -gamma^2/2 = " +
        format17(-gamma * gamma / 2.0) +
        "; rayleigh quotient of the cutoff state = " + format17(rep.rayleigh));
  return rep;
}

ordered_json Layer::to_json() const {
  ordered_json j;
  j["interval"] = interval_json(a, b);
  j["eps"] = eps;
  j["window"] = interval_json(omega_a, omega_b);
  j["sign"] = sign;
  j["origin_case"] = origin_case;
  j["build_changes"] = build_changes;
  j["fill_changes"] = fill_changes;
  j["clipped"] = clipped;
  return j;
}

ordered_json GapLayer::to_json() const {
  ordered_json j;
  j["interval"] = interval_json(alpha, beta);
  j["left"] = left;
  j["right"] = right;
  return j;
}

ordered_json LayerSystem::to_json() const {
  ordered_json j;
  j["extent"] = extent;
  j["tol"] = tol;
  j["grid_h"] = grid_h;
  j["filled"] = filled;
  j["restarts"] = restarts;
  j["eigenvalue_count"] = eigenvalue_count;
  j["layers"] = ordered_json::array();
  for (const auto& L : layers) j["layers"].push_back(L.to_json());
  j["gaps"] = ordered_json::array();
  for (const auto& G : gaps) j["gaps"].push_back(G.to_json());
  j["history"] = ordered_json::array();
  for (const auto& r : history) j["history"].push_back(r);
  return j;
}

namespace {

LevelPick measure_level(const LayerSystem& sys, const LayerBuildParams& params,
                        double sup_plus, double sup_minus,
                        std::vector<ordered_json>* detail) {
  LevelPick pick;
  pick.bottom = kInf;
  auto comps = complement(sys.layers, 1.0, sys.extent);
  for (const auto& [p, q] : comps) {
    for (int sign : {+1, -1}) {
      double sup = sign > 0 ? sup_plus : sup_minus;
      PotentialProfile prof = composed(sys.v, sys.w, sign);
      double bottom = interval_bottom(prof, p, q, params.h, sup);
      if (detail) {
        ordered_json d;
        d["component"] = interval_json(p, q);
        d["sign"] = sign;
        d["bottom"] = std::isfinite(bottom) ? ordered_json(bottom)
                                            : ordered_json("narrow-positive");
        detail->push_back(d);
      }
      // strict improvement keeps the tie order: + before -, left to right
      if (bottom < pick.bottom) {
        pick.bottom = bottom;
        pick.comp_a = p;
        pick.comp_b = q;
        pick.sign = sign;
        pick.tail = (q >= sys.extent - 1e-12);
      }
    }
  }
  pick.eps = pick.bottom < 0.0 && std::isfinite(pick.bottom) ? -pick.bottom : 0.0;
  return pick;
}

}  // namespace

LayerSystem build_layers(const PotentialProfile& v, double extent,
                         double tol_eps, const LayerBuildParams& params) {
  return build_layers(v, PotentialProfile::zero(), extent, tol_eps, params);
}

LayerSystem build_layers(const PotentialProfile& v, const PotentialProfile& w,
                         double extent, double tol_eps,
                         const LayerBuildParams& params) {
  v.validate();
  w.validate();
  if (!v.scalar() || !w.scalar())
    throw validation_error("layer builder requires scalar profiles");
  if (w.neg_part_sup() > 1e-12)
    throw validation_error("base profile must be nonnegative");
  if (!(extent > 1.0 + 16.0 * params.h))
    throw validation_error("extent must leave room for the grid");
  if (!(tol_eps > 0.0)) throw validation_error("tol_eps must be positive");
  if (!(params.h > 0.0) || params.h > 0.1)
    throw validation_error("grid spacing out of range");

  LayerSystem sys;
  sys.v = v;
  sys.w = w;
  sys.extent = extent;
  sys.tol = tol_eps;
  sys.grid_h = params.h;

  double sup_plus = composed(v, w, +1).sup_norm();
  double sup_minus = composed(v, w, -1).sup_norm();

  // global negative spectrum, for the iteration cap and the level sum bound
  Grid full = Grid::from_range(1.0, lattice(extent, params.h), params.h);
  auto neg_plus = negative_spectrum(assemble_operator(composed(v, w, +1), full));
  auto neg_minus = negative_spectrum(assemble_operator(composed(v, w, -1), full));
  sys.eigenvalue_count =
      static_cast<long>(neg_plus.size() + neg_minus.size());

  double lowest = kInf;
  int low_sign = +1;
  if (!neg_plus.empty()) {
    lowest = neg_plus.front();
    low_sign = +1;
  }
  if (!neg_minus.empty() && neg_minus.front() < lowest) {
    lowest = neg_minus.front();
    low_sign = -1;
  }
  bool clamped = !(std::isfinite(lowest) && -lowest >= tol_eps);
  double eps0 = clamped ? tol_eps : -lowest;

  Layer ball;
  ball.eps = eps0;
  ball.sign = low_sign;
  ball.origin_case = 0;
  ball.a = 1.0;
  ball.b = std::min(extent, 12.0 / std::sqrt(eps0));
  ball.clipped = ball.b >= extent - 1e-12;
  ball.omega_a = 1.0;
  ball.omega_b = std::min(extent, 6.0 / std::sqrt(eps0));
  if (ball.b <= 1.0 + 4.0 * params.h)
    throw validation_error("initial level leaves no room for the first layer");
  sys.layers.push_back(ball);

  {
    ordered_json rec;
    rec["kind"] = "init";
    rec["eps0"] = eps0;
    rec["eps0_clamped"] = clamped;
    rec["sign"] = low_sign;
    rec["layer"] = interval_json(ball.a, ball.b);
    rec["window"] = interval_json(ball.omega_a, ball.omega_b);
    rec["negative_eigenvalues"] = sys.eigenvalue_count;
    sys.history.push_back(rec);
    note(params, "init: eps0=" + format17(eps0) + " ball=[1," +
                     format17(ball.b) + "]");
  }
  enforce(sys, "init");

  if (clamped) {
    ordered_json rec;
    rec["kind"] = "stop";
    rec["reason"] = "no level above tolerance";
    rec["eps"] = std::isfinite(lowest) ? -lowest : 0.0;
    sys.history.push_back(rec);
    return sys;
  }

  long cap = static_cast<long>(params.cap_factor) *
             std::max<long>(1, sys.eigenvalue_count);
  long step = 0;
  while (true) {
    if (++step > cap) {
      std::ostringstream os;
      os << "internal: layer builder exceeded " << cap << " iterations ("
         << sys.layers.size() << " layers, " << sys.restarts
         << " restarts); history length " << sys.history.size();
      throw error(os.str());
    }

    std::vector<ordered_json> detail;
    LevelPick pick = measure_level(sys, params, sup_plus, sup_minus, &detail);
    {
      ordered_json rec;
      rec["kind"] = "level";
      rec["step"] = step;
      rec["components"] = detail;
      rec["eps"] = pick.eps;
      rec["sign"] = pick.sign;
      sys.history.push_back(rec);
    }

    if (pick.eps < sys.tol) {
      ordered_json rec;
      rec["kind"] = "stop";
      rec["reason"] = "tolerance";
      rec["eps"] = pick.eps;
      sys.history.push_back(rec);
      note(params, "stop: eps=" + format17(pick.eps));
      break;
    }

    // outer-cap stability: the tail eigenvalue must not move when the
    // truncation is pushed out by the tail's own length
    if (pick.tail) {
      double doubled = lowest_eigenvalue_on(
          composed(sys.v, sys.w, pick.sign), lattice(pick.comp_a, params.h),
          lattice(sys.extent + (sys.extent - pick.comp_a), params.h),
          params.h);
      ordered_json rec;
      rec["kind"] = "cap_check";
      rec["bottom"] = pick.bottom;
      rec["doubled"] = doubled;
      sys.history.push_back(rec);
      if (std::fabs(doubled - pick.bottom) >
          std::max(1e-8, 1e-4 * std::fabs(pick.bottom)))
        throw hypothesis_error(
            "tail eigenvalue moved from " + format17(pick.bottom) + " to " +
            format17(doubled) +
            " when the outer cap was doubled; enlarge the extent");
    }

    double gamma = std::sqrt(pick.eps);
    double L = 6.0 / gamma;

    // certifying window: the full component when it is narrower than 6/gamma,
    // otherwise the mass-concentration search
    double wa = pick.comp_a, wb = pick.comp_b;
    ordered_json window_rec;
    if (pick.comp_b - pick.comp_a >= L) {
      WindowReport wr = window_search(composed(sys.v, sys.w, pick.sign),
                                      pick.comp_a, pick.comp_b, gamma,
                                      params.h);
      wa = wr.alpha;
      wb = wr.beta;
      window_rec = wr.to_json();
      window_rec["mode"] = "search";
    } else {
      window_rec["window"] = interval_json(wa, wb);
      window_rec["bottom"] = pick.bottom;
      window_rec["mode"] = "component";
    }
    window_rec["kind"] = "window";
    sys.history.push_back(window_rec);

    // neighbors: k the rightmost layer ending at or left of the window,
    // l the leftmost layer starting at or right of it (may not exist)
    std::optional<std::size_t> k, l;
    for (std::size_t i = 0; i < sys.layers.size(); ++i) {
      const Layer& Li = sys.layers[i];
      if (Li.b <= wa + 1e-12) {
        if (!k || Li.b > sys.layers[*k].b + 1e-15) k = i;
      }
      if (Li.a >= wb - 1e-12) {
        if (!l || Li.a < sys.layers[*l].a - 1e-15) l = i;
      }
    }
    if (!k) throw error("internal: window has no layer on its left");
    double bk = sys.layers[*k].b;
    double al = l ? sys.layers[*l].a : kInf;
    double Lm = own_width_unit(sys.layers[*k]);
    double Lp = l ? own_width_unit(sys.layers[*l]) : 0.0;

    if (l && al - bk < 2.0 * std::max(Lm, Lp)) {
      // narrow corridor between two existing layers: merge them to the exact
      // overlap min(Lm, Lp) and restart the pass
      Layer& K = sys.layers[*k];
      Layer& Ll = sys.layers[*l];
      if (Lm <= Lp) {
        K.b = std::min(sys.extent, bk + Lm);
        Ll.a = bk;
      } else {
        Ll.a = al - Lp;
        K.b = std::min(sys.extent, al);
      }
      K.build_changes += 1;
      Ll.build_changes += 1;
      sys.restarts += 1;
      ordered_json rec;
      rec["kind"] = "case1";
      rec["k"] = static_cast<long>(*k);
      rec["l"] = static_cast<long>(*l);
      rec["L_minus"] = Lm;
      rec["L_plus"] = Lp;
      rec["k_interval"] = interval_json(K.a, K.b);
      rec["l_interval"] = interval_json(Ll.a, Ll.b);
      rec["restart"] = sys.restarts;
      sys.history.push_back(rec);
      note(params, "case1: merge layers " + std::to_string(*k) + "," +
                       std::to_string(*l) + ", restart " +
                       std::to_string(sys.restarts));
      enforce(sys, "case1");
      continue;
    }

    bool left_close = wa - bk <= L;
    bool right_close = l && (al - wb <= L);

    Layer next;
    next.eps = pick.eps;
    next.sign = pick.sign;
    next.omega_a = wa;
    next.omega_b = wb;
    ordered_json rec;

    if (!left_close && !right_close) {
      next.origin_case = 2;
      next.a = std::max(1.0, wa - L);
      next.b = std::min(sys.extent, wb + L);
      next.clipped = (wb + L > sys.extent + 1e-12);
      rec["kind"] = "case2";
    } else if (left_close && right_close) {
      next.origin_case = 3;
      next.a = bk;
      next.b = al;
      Layer& K = sys.layers[*k];
      Layer& Ll = sys.layers[*l];
      K.b = std::min(sys.extent, bk + Lm);
      Ll.a = al - Lp;
      K.build_changes += 1;
      Ll.build_changes += 1;
      rec["kind"] = "case3";
      rec["k"] = static_cast<long>(*k);
      rec["l"] = static_cast<long>(*l);
      rec["k_interval"] = interval_json(K.a, K.b);
      rec["l_interval"] = interval_json(Ll.a, Ll.b);
    } else if (left_close) {
      next.origin_case = 4;
      next.a = bk;
      next.b = std::min(sys.extent, wb + L);
      next.clipped = (wb + L > sys.extent + 1e-12);
      Layer& K = sys.layers[*k];
      K.b = std::min(sys.extent, bk + Lm);
      K.build_changes += 1;
      rec["kind"] = "case4";
      rec["side"] = "left";
      rec["k"] = static_cast<long>(*k);
      rec["k_interval"] = interval_json(K.a, K.b);
    } else {
      next.origin_case = 4;
      next.a = std::max(1.0, wa - L);
      next.b = al;
      Layer& Ll = sys.layers[*l];
      Ll.a = al - Lp;
      Ll.build_changes += 1;
      rec["kind"] = "case4";
      rec["side"] = "right";
      rec["l"] = static_cast<long>(*l);
      rec["l_interval"] = interval_json(Ll.a, Ll.b);
    }
    rec["n"] = static_cast<long>(sys.layers.size());
    rec["eps"] = next.eps;
    rec["sign"] = next.sign;
    rec["interval"] = interval_json(next.a, next.b);
    rec["window"] = interval_json(next.omega_a, next.omega_b);
    rec["clipped"] = next.clipped;
    sys.layers.push_back(next);
    sys.history.push_back(rec);
    note(params, rec["kind"].get<std::string>() + ": layer " +
                     std::to_string(sys.layers.size() - 1) + " = [" +
                     format17(next.a) + "," + format17(next.b) + "] eps=" +
                     format17(next.eps));
    enforce(sys, rec["kind"].get<std::string>());
  }
  return sys;
}

LayerSystem fill_gaps(const LayerSystem& input, const LayerBuildParams& params) {
  if (input.filled) return input;
  if (input.layers.empty())
    throw precondition_error("fill_gaps needs a built system");
  LayerSystem sys = input;

  auto comps = complement(sys.layers, 1.0, sys.extent);
  for (const auto& [p, q] : comps) {
    // neighbors by shared boundary
    std::optional<std::size_t> left, right;
    for (std::size_t i = 0; i < sys.layers.size(); ++i) {
      if (std::fabs(sys.layers[i].b - p) <= 1e-9 &&
          (!left || sys.layers[i].b > sys.layers[*left].b)) left = i;
      if (std::fabs(sys.layers[i].a - q) <= 1e-9 &&
          (!right || sys.layers[i].a < sys.layers[*right].a)) right = i;
    }
    if (!left)
      throw error("internal: complement component [" + format17(p) + "," +
                  format17(q) + "] has no layer on its left");
    Layer& NL = sys.layers[*left];
    double dl = own_width_unit(NL);

    if (!right) {
      // outer tail: absorb when shorter than the neighbor's unit, else
      // register with a single exact overlap
      ordered_json rec;
      rec["gap"] = interval_json(p, q);
      rec["left"] = static_cast<long>(*left);
      if (q - p < dl) {
        NL.b = q;
        NL.fill_changes += 1;
        NL.clipped = true;
        rec["kind"] = "tail_absorb";
        rec["left_interval"] = interval_json(NL.a, NL.b);
      } else {
        NL.b = p + dl;
        NL.fill_changes += 1;
        GapLayer gap;
        gap.alpha = p;
        gap.beta = q;
        gap.left = static_cast<int>(*left);
        gap.right = -1;
        sys.gaps.push_back(gap);
        rec["kind"] = "tail_register";
        rec["left_interval"] = interval_json(NL.a, NL.b);
      }
      sys.history.push_back(rec);
      note(params, rec["kind"].get<std::string>() + ": [" + format17(p) + "," +
                       format17(q) + "]");
      continue;
    }

    Layer& NR = sys.layers[*right];
    double dr = own_width_unit(NR);
    ordered_json rec;
    rec["gap"] = interval_json(p, q);
    rec["left"] = static_cast<long>(*left);
    rec["right"] = static_cast<long>(*right);
    if (q - p < dl + dr) {
      // short component: the smaller-level neighbor absorbs it, the other
      // receives exactly its own overlap unit
      if (NL.eps >= NR.eps) {
        NR.a = p;
        NL.b = p + dl;
        rec["tie"] = "right-absorbs";
      } else {
        NL.b = q;
        NR.a = q - dr;
        rec["tie"] = "left-absorbs";
      }
      NL.fill_changes += 1;
      NR.fill_changes += 1;
      rec["kind"] = "absorb";
    } else {
      NL.b = p + dl;
      NR.a = q - dr;
      NL.fill_changes += 1;
      NR.fill_changes += 1;
      GapLayer gap;
      gap.alpha = p;
      gap.beta = q;
      gap.left = static_cast<int>(*left);
      gap.right = static_cast<int>(*right);
      sys.gaps.push_back(gap);
      rec["kind"] = "register";
    }
    rec["left_interval"] = interval_json(NL.a, NL.b);
    rec["right_interval"] = interval_json(NR.a, NR.b);
    sys.history.push_back(rec);
    note(params, rec["kind"].get<std::string>() + ": [" + format17(p) + "," +
                     format17(q) + "]");
  }

  sys.filled = true;
  {
    ordered_json rec;
    rec["kind"] = "filled";
    rec["gaps"] = static_cast<long>(sys.gaps.size());
    sys.history.push_back(rec);
  }
  enforce(sys, "fill");
  return sys;
}

std::vector<std::string> geometric_violations(const LayerSystem& sys) {
  std::vector<std::string> out;
  auto flag = [&](const std::string& s) { out.push_back(s); };
  const auto& Ls = sys.layers;
  const double slack = 1e-9;

  for (std::size_t n = 0; n < Ls.size(); ++n) {
    const Layer& L = Ls[n];
    std::string tag = "layer " + std::to_string(n);
    if (!(L.a >= 1.0 - 1e-12) || !(L.b > L.a) || L.b > sys.extent + 1e-12)
      flag(tag + " interval out of range");
    if (!(L.eps > 0.0)) flag(tag + " nonpositive level");
    if (L.omega_a < L.a - slack || L.omega_b > L.b + slack)
      flag(tag + " window escapes the layer");
    double bound = (sys.filled ? 67.0 : 42.0) / std::sqrt(L.eps);
    if (n >= 1 && L.b - L.a > bound + slack)
      flag(tag + " width " + format17(L.b - L.a) + " exceeds " +
           format17(bound));
    if (L.build_changes > 2) flag(tag + " changed more than twice in build");
    if (L.fill_changes > 2) flag(tag + " changed more than twice in fill");
    // lattice-aligned solves make nested-set bottoms interlace exactly;
    // the slack only absorbs eigensolver bisection tolerance
    if (n + 1 < Ls.size() && Ls[n + 1].eps > L.eps + 1e-9 * (1.0 + L.eps))
      flag("levels not nonincreasing at " + std::to_string(n));
  }

  // pairwise intersection widths and neighbor counts; width-positive overlaps
  // only, shared endpoints do not count
  std::vector<int> meets(Ls.size(), 0);
  for (std::size_t i = 0; i < Ls.size(); ++i)
    for (std::size_t j = i + 1; j < Ls.size(); ++j) {
      double lo = std::max(Ls[i].a, Ls[j].a);
      double hi = std::min(Ls[i].b, Ls[j].b);
      if (hi - lo <= slack) continue;
      meets[i] += 1;
      meets[j] += 1;
      double need = 6.0 / std::sqrt(Ls[std::min(i, j)].eps);
      if (hi - lo < need - 1e-6)
        flag("intersection of layers " + std::to_string(i) + "," +
             std::to_string(j) + " has width " + format17(hi - lo) +
             " below " + format17(need));
    }
  for (std::size_t i = 0; i < Ls.size(); ++i)
    if (meets[i] > 2)
      flag("layer " + std::to_string(i) + " meets " +
           std::to_string(meets[i]) + " others");

  // No lower bound is imposed on the separation of non-intersecting layers.
  // A narrow free strip can survive next to a padded side when the strip is
  // too thin to host any admissible window; gap filling later absorbs it or
  // registers it with exact overlaps. Only the windows carry a guaranteed
  // clearance, and those are pairwise disjoint by construction.

  // windows of distinct layers never overlap
  for (std::size_t i = 0; i < Ls.size(); ++i)
    for (std::size_t j = i + 1; j < Ls.size(); ++j) {
      double lo = std::max(Ls[i].omega_a, Ls[j].omega_a);
      double hi = std::min(Ls[i].omega_b, Ls[j].omega_b);
      if (hi - lo > slack)
        flag("windows of layers " + std::to_string(i) + "," +
             std::to_string(j) + " overlap");
    }

  if (sys.filled) {
    for (std::size_t g = 0; g < sys.gaps.size(); ++g) {
      const GapLayer& G = sys.gaps[g];
      std::string tag = "gap " + std::to_string(g);
      if (G.left < 0 || G.left >= static_cast<int>(Ls.size())) {
        flag(tag + " has no valid left neighbor");
        continue;
      }
      double dl = own_width_unit(Ls[static_cast<std::size_t>(G.left)]);
      double ol = Ls[static_cast<std::size_t>(G.left)].b - G.alpha;
      if (std::fabs(ol - dl) > 1e-9)
        flag(tag + " left overlap " + format17(ol) + " differs from " +
             format17(dl));
      if (G.right >= 0) {
        double drr = own_width_unit(Ls[static_cast<std::size_t>(G.right)]);
        double orr = G.beta - Ls[static_cast<std::size_t>(G.right)].a;
        if (std::fabs(orr - drr) > 1e-9)
          flag(tag + " right overlap " + format17(orr) + " differs from " +
               format17(drr));
        if (G.beta - G.alpha < dl + drr - 1e-9)
          flag(tag + " narrower than the sum of overlap units");
        int crossings = 0;
        for (const auto& L : Ls) {
          double lo = std::max(L.a, G.alpha);
          double hi = std::min(L.b, G.beta);
          if (hi - lo > slack) crossings += 1;
        }
        if (crossings != 2)
          flag(tag + " intersects " + std::to_string(crossings) +
               " layers, expected 2");
      }
    }
    // coverage of [1, extent] by layers plus registered gaps
    std::vector<std::pair<double, double>> cover;
    for (const auto& L : Ls) cover.emplace_back(L.a, L.b);
    for (const auto& G : sys.gaps) cover.emplace_back(G.alpha, G.beta);
    std::sort(cover.begin(), cover.end());
    double cursor = 1.0;
    for (const auto& [a, b] : cover) {
      if (a > cursor + 1e-9) {
        flag("coverage hole at [" + format17(cursor) + "," + format17(a) + "]");
        break;
      }
      cursor = std::max(cursor, b);
    }
    if (cursor < sys.extent - 1e-9)
      flag("coverage stops at " + format17(cursor));
  }
  return out;
}

SpectralReport spectral_report(const LayerSystem& sys) {
  if (sys.layers.empty())
    throw precondition_error("spectral report needs a built system");
  SpectralReport rep;
  rep.claim_level_margin = kInf;
  rep.window_margin = kInf;
  rep.complement_bottom = kInf;
  LayerBuildParams params;
  params.h = sys.grid_h;
  double sup_plus = composed(sys.v, sys.w, +1).sup_norm();
  double sup_minus = composed(sys.v, sys.w, -1).sup_norm();
  ordered_json layers_j = ordered_json::array();

  for (std::size_t n = 0; n < sys.layers.size(); ++n) {
    const Layer& L = sys.layers[n];
    ordered_json lj;
    lj["layer"] = static_cast<long>(n);
    // level claim: both operators sit above -eps_n on the union of the layer
    // with everything the older layers leave uncovered; the layer can bridge
    // adjacent uncovered pieces, so touching intervals merge before solving
    std::vector<Layer> older(sys.layers.begin(),
                             sys.layers.begin() + static_cast<long>(n));
    auto region = complement(older, 1.0, sys.extent);
    region.emplace_back(L.a, L.b);
    std::sort(region.begin(), region.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& piece : region) {
      if (!merged.empty() && piece.first <= merged.back().second + 1e-12)
        merged.back().second = std::max(merged.back().second, piece.second);
      else
        merged.push_back(piece);
    }
    ordered_json bottoms = ordered_json::array();
    for (int sign : {+1, -1}) {
      PotentialProfile prof = composed(sys.v, sys.w, sign);
      double sup = sign > 0 ? sup_plus : sup_minus;
      for (const auto& [p, q] : merged) {
        double bottom = interval_bottom(prof, p, q, sys.grid_h, sup);
        double margin = (std::isfinite(bottom) ? bottom : 1.0) + L.eps;
        rep.claim_level_margin = std::min(rep.claim_level_margin, margin);
        if (std::isfinite(bottom)) {
          ordered_json bj;
          bj["interval"] = interval_json(p, q);
          bj["sign"] = sign;
          bj["bottom"] = bottom;
          bottoms.push_back(bj);
        }
      }
    }
    lj["eps"] = L.eps;
    lj["region_bottoms"] = bottoms;
    // window certificate: the certifying sign has spectrum below -eps/2
    if (n >= 1) {
      double wb = interval_bottom(composed(sys.v, sys.w, L.sign), L.omega_a,
                                  L.omega_b, sys.grid_h,
                                  L.sign > 0 ? sup_plus : sup_minus);
      double wm = -L.eps / 2.0 - (std::isfinite(wb) ? wb : 1.0);
      rep.window_margin = std::min(rep.window_margin, wm);
      lj["window_bottom"] = std::isfinite(wb) ? ordered_json(wb)
                                              : ordered_json("narrow-positive");
    }
    layers_j.push_back(lj);
  }

  // final complement (registered gaps coincide with it when filled)
  for (const auto& [p, q] : complement(sys.layers, 1.0, sys.extent))
    for (int sign : {+1, -1}) {
      double b = interval_bottom(composed(sys.v, sys.w, sign), p, q,
                                 sys.grid_h, sign > 0 ? sup_plus : sup_minus);
      if (std::isfinite(b)) rep.complement_bottom = std::min(rep.complement_bottom, b);
    }
  for (const auto& G : sys.gaps)
    for (int sign : {+1, -1}) {
      double b = interval_bottom(composed(sys.v, sys.w, sign), G.alpha, G.beta,
                                 sys.grid_h, sign > 0 ? sup_plus : sup_minus);
      if (std::isfinite(b)) rep.complement_bottom = std::min(rep.complement_bottom, b);
    }

  rep.details = ordered_json::object();
  rep.details["layers"] = layers_j;
  return rep;
}

ordered_json SpectralReport::to_json() const {
  ordered_json j;
  j["claim_level_margin"] = claim_level_margin;
  j["window_margin"] = window_margin;
  j["complement_bottom"] = complement_bottom;
  j["details"] = details;
  return j;
}

LayerSystem replay_history(const LayerSystem& sys) {
  LayerSystem out;
  out.v = sys.v;
  out.w = sys.w;
  out.extent = sys.extent;
  out.tol = sys.tol;
  out.grid_h = sys.grid_h;
  auto set_interval = [](Layer& L, const ordered_json& j) {
    L.a = j.at(0).get<double>();
    L.b = j.at(1).get<double>();
  };
  for (const auto& rec : sys.history) {
    std::string kind = rec.at("kind").get<std::string>();
    if (kind == "init") {
      Layer ball;
      ball.eps = rec.at("eps0").get<double>();
      ball.sign = rec.at("sign").get<int>();
      set_interval(ball, rec.at("layer"));
      ball.omega_a = rec.at("window").at(0).get<double>();
      ball.omega_b = rec.at("window").at(1).get<double>();
      ball.clipped = ball.b >= out.extent - 1e-12;
      out.layers.push_back(ball);
      out.eigenvalue_count = rec.at("negative_eigenvalues").get<long>();
    } else if (kind == "case1") {
      auto k = rec.at("k").get<std::size_t>();
      auto l = rec.at("l").get<std::size_t>();
      set_interval(out.layers.at(k), rec.at("k_interval"));
      set_interval(out.layers.at(l), rec.at("l_interval"));
      out.layers.at(k).build_changes += 1;
      out.layers.at(l).build_changes += 1;
      out.restarts += 1;
    } else if (kind == "case2" || kind == "case3" || kind == "case4") {
      Layer next;
      next.eps = rec.at("eps").get<double>();
      next.sign = rec.at("sign").get<int>();
      next.origin_case = kind == "case2" ? 2 : (kind == "case3" ? 3 : 4);
      set_interval(next, rec.at("interval"));
      next.omega_a = rec.at("window").at(0).get<double>();
      next.omega_b = rec.at("window").at(1).get<double>();
      next.clipped = rec.at("clipped").get<bool>();
      if (rec.contains("k_interval")) {
        auto k = rec.at("k").get<std::size_t>();
        set_interval(out.layers.at(k), rec.at("k_interval"));
        out.layers.at(k).build_changes += 1;
      }
      if (rec.contains("l_interval")) {
        auto l = rec.at("l").get<std::size_t>();
        set_interval(out.layers.at(l), rec.at("l_interval"));
        out.layers.at(l).build_changes += 1;
      }
      out.layers.push_back(next);
    } else if (kind == "absorb" || kind == "register") {
      auto left = rec.at("left").get<std::size_t>();
      auto right = rec.at("right").get<std::size_t>();
      set_interval(out.layers.at(left), rec.at("left_interval"));
      set_interval(out.layers.at(right), rec.at("right_interval"));
      out.layers.at(left).fill_changes += 1;
      out.layers.at(right).fill_changes += 1;
      if (kind == "register") {
        GapLayer gap;
        gap.alpha = rec.at("gap").at(0).get<double>();
        gap.beta = rec.at("gap").at(1).get<double>();
        gap.left = static_cast<int>(left);
        gap.right = static_cast<int>(right);
        out.gaps.push_back(gap);
      }
    } else if (kind == "tail_absorb" || kind == "tail_register") {
      auto left = rec.at("left").get<std::size_t>();
      set_interval(out.layers.at(left), rec.at("left_interval"));
      out.layers.at(left).fill_changes += 1;
      if (kind == "tail_absorb") out.layers.at(left).clipped = true;
      if (kind == "tail_register") {
        GapLayer gap;
        gap.alpha = rec.at("gap").at(0).get<double>();
        gap.beta = rec.at("gap").at(1).get<double>();
        gap.left = static_cast<int>(left);
        gap.right = -1;
        out.gaps.push_back(gap);
      }
    } else if (kind == "filled") {
      out.filled = true;
    }
    // level/window/stop/cap_check records carry no geometry
  }
  return out;
}

bool same_geometry(const LayerSystem& x, const LayerSystem& y) {
  if (x.layers.size() != y.layers.size() || x.gaps.size() != y.gaps.size() ||
      x.filled != y.filled || x.restarts != y.restarts)
    return false;
  for (std::size_t i = 0; i < x.layers.size(); ++i) {
    const Layer &a = x.layers[i], &b = y.layers[i];
    if (a.a != b.a || a.b != b.b || a.eps != b.eps || a.omega_a != b.omega_a ||
        a.omega_b != b.omega_b || a.build_changes != b.build_changes ||
        a.fill_changes != b.fill_changes)
      return false;
  }
  for (std::size_t i = 0; i < x.gaps.size(); ++i) {
    const GapLayer &a = x.gaps[i], &b = y.gaps[i];
    if (a.alpha != b.alpha || a.beta != b.beta || a.left != b.left ||
        a.right != b.right)
      return false;
  }
  return true;
}

}  // namespace halflab
