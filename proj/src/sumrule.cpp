#include "halflab/sumrule.hpp"

#include <algorithm>
#include <cmath>

#include "halflab/eigensolver.hpp"
#include "halflab/numerics.hpp"
#include "halflab/spectral.hpp"

namespace halflab {

namespace {

constexpr double kFirstFreeZero = 4.0 * M_PI * M_PI;

std::vector<double> free_zeros_inside(double a, double b) {
  std::vector<double> zeros;
  for (int k = 1;; ++k) {
    double z = 4.0 * M_PI * M_PI * k * k;
    if (z >= b) break;
    if (z > a) zeros.push_back(z);
  }
  return zeros;
}

}  // namespace

ordered_json SumRuleReport::to_json() const {
  ordered_json j;
  j["interval"] = {a, b};
  j["weight_integral"] = weight_integral;
  j["lhs_entropy"] = json_extended(lhs_entropy);
  j["lhs_correction"] = lhs_correction;
  j["relative_entropy_variant"] = json_extended(relative_entropy_variant);
  j["rhs_terms"] = {{"potential_term", rhs.potential_term},
                    {"eigen_term", rhs.eigen_term},
                    {"depth_term", rhs.depth_term},
                    {"total", rhs.total()}};
  j["eigenvalues"] = eigenvalues;
  j["margin"] = json_extended(margin);
  j["margin_literal"] = json_extended(margin_literal);
  j["quadrature_errors"] = {{"lhs_entropy", lhs_entropy_error},
                            {"lhs_correction", lhs_correction_error},
                            {"relative_entropy_variant", relative_entropy_error}};
  j["constants"] = {{"dimension", constants.dimension},
                    {"sphere_area", constants.sphere_area},
                    {"c_d", constants.c_d},
                    {"alpha_d", constants.alpha_d}};
  j["grid"] = {{"h", grid_h}, {"L", grid_L}};
  return j;
}

SumRuleReport sum_rule_check(const PotentialProfile& q, double a, double b,
                             const SumRuleParams& params) {
  q.validate();
  if (!(a > 0.0) || !(b > a))
    throw precondition_error("sum rule window needs 0 < a < b, got [" + format17(a) + ", " +
                             format17(b) + "]");
  if (!q.compact())
    throw precondition_error("sum rule needs a compactly supported potential");
  if (params.dimension < 1)
    throw precondition_error("dimension must be a positive integer");
  if (q.support_end > params.L)
    throw precondition_error("potential support reaches " + format17(q.support_end) +
                             " beyond the eigensolver grid extent " + format17(params.L));
  if (!q.annihilates_e0_below_2())
    throw hypothesis_error(
        "potential does not annihilate e0 below r = 2; the inequality makes no claim for "
        "this profile");
  if (!q.scalar() && b >= kFirstFreeZero)
    throw precondition_error(
        "coupled channels use the pointwise density ratio, which needs b below the first "
        "free-density zero " +
        format17(kFirstFreeZero));

  SumRuleReport rep;
  rep.a = a;
  rep.b = b;
  rep.weight_integral = 2.0 * (std::sqrt(b) - std::sqrt(a));
  rep.grid_h = params.h;
  rep.grid_L = params.L;

  // Free reference entropy over the window; its quartic zeros are the only
  // delicate points and get the analytic window completion.
  auto free_part =
      log_density_integral_detail(free_density, a, b, free_zeros_inside(a, b), 1e-9, 1e-4);
  rep.lhs_correction = free_part.value.value - std::log(4.0) * rep.weight_integral;
  rep.lhs_correction_error = free_part.error_estimate;

  // Relative entropy. For scalar q the density factorizes through the regular
  // solution as mu'/mu'_free = 1/|F|^2 once q vanishes on [1,2), and |F|^2 is
  // smooth and positive on the whole window: a single weighted quadrature,
  // no zero windows. Coupled channels divide the two densities pointwise.
  QuadratureResult rel;
  if (q.scalar()) {
    rel = adaptive_simpson(
        [&q](double lam) { return -std::log(jost_sample(q, lam).jost_sq) / std::sqrt(lam); },
        a, b, params.quad_tol);
  } else {
    rel = adaptive_simpson(
        [&q](double lam) {
          return std::log(density_jost(q, lam) / free_density(lam)) / std::sqrt(lam);
        },
        a, b, params.quad_tol);
  }
  rep.relative_entropy_variant = ExtendedReal(rel.value);
  rep.relative_entropy_error = rel.error_estimate;

  rep.lhs_entropy = free_part.value + rep.relative_entropy_variant;
  rep.lhs_entropy_error = free_part.error_estimate + rel.error_estimate;

  rep.rhs.potential_term =
      -0.5 * M_PI * q.entry11_integral(2.0, std::max(2.0, q.support_end));
  auto op = assemble_operator(q, Grid::from_range(1.0, params.L, params.h));
  rep.eigenvalues = negative_spectrum(op);
  double sum_sqrt = 0.0;
  for (double lam : rep.eigenvalues) sum_sqrt += std::sqrt(-lam);
  rep.rhs.eigen_term = -2.0 * M_PI * sum_sqrt;
  rep.rhs.depth_term = -2.0 * M_PI * std::sqrt(q.neg_part_sup());

  double rhs_total = rep.rhs.total();
  rep.margin = rep.relative_entropy_variant +
               ExtendedReal(std::log(4.0) * rep.weight_integral) - rhs_total;
  rep.margin_literal = rep.lhs_entropy + ExtendedReal(rep.lhs_correction) - rhs_total;

  rep.constants.dimension = params.dimension;
  rep.constants.sphere_area = sphere_area(params.dimension);
  rep.constants.c_d = M_PI / (2.0 * rep.constants.sphere_area) + 2.0 * M_PI;
  rep.constants.alpha_d =
      2.0 * M_PI * std::sqrt(q.neg_part_sup() + 0.25) +
      (params.dimension - 1) * (params.dimension - 3) / 8.0 + rep.lhs_correction;
  return rep;
}

}  // namespace halflab
