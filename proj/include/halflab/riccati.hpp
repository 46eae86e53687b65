#pragma once

#include <optional>
#include <string>
#include <vector>

#include "halflab/common.hpp"
#include "halflab/grid.hpp"
#include "halflab/potential.hpp"

namespace halflab {

// Ground-state transformation on a radial interval: from a scalar potential q
// with the Dirichlet bottom of -u'' + q on [a,b] at or above -gamma^2, build a
// positive solution u of the radial equation
//
//   u'' = (q + gamma^2) u - ((d-1)/r) u'
//
// and the log-derivative field A = u'/u, which satisfies
//
//   q + gamma^2 = A' + (d-1) A / r + A^2
//
// exactly in the continuum. The reported residual is the discrete gap of that
// identity with a central-difference A'; it scales as h^2 where q is C^1 and
// degrades to O(h) at the (at most two) nodes straddling a jump of q.

struct RiccatiParams {
  double h = 1e-3;           // target node spacing on [a,b]
  int bisection_steps = 60;  // slope search iterations
  // Nonnegative base part of the potential (the q passed in is base + studied
  // part combined). Only the weighted estimate's rhs and the companion-bound
  // warning look at it; absent means zero.
  std::optional<PotentialProfile> base;
};

// One integration of the radial equation at a fixed initial slope,
// u(r0) = 1, u'(r0) = slope. Nodes must be ascending and start at r0 >= 1.
struct Shot {
  std::vector<double> u, du;
  int sign_changes = 0;  // strict sign alternations of u along the nodes
  bool positive = false; // u > 0 at every node
  double u_end = 0.0;
};

Shot shoot(const PotentialProfile& q, const std::vector<double>& nodes, double gamma,
           int dimension, double slope);

// Uniform nodes a = r_0 < ... < r_n = b with spacing ~h (at least 16 cells).
std::vector<double> radial_nodes(double a, double b, double h);

struct ShootingSolution {
  std::vector<double> r, u, du;
  double slope = 0.0;   // u'(a) of the returned solution
  double bottom = 0.0;  // Dirichlet bottom of -u'' + q on [a,b], the checked bound
};

// Positive solution by shooting with a binary search over the initial slope:
// too-small slopes drive u through zero, and the spectral bound makes the
// admissible slopes an upward-closed interval. The search targets u(b) = 1,
// which lies strictly inside that interval, so the free case returns u == 1.
// dimension = 1 solves the flat equation -u'' + (q + gamma^2) u = 0.
ShootingSolution positive_solution(const PotentialProfile& q, double a, double b,
                                   double gamma, int dimension = 1,
                                   const RiccatiParams& params = {});

struct RiccatiDecomposition {
  double a = 0.0, b = 0.0;
  double gamma = 0.0;
  int dimension = 3;
  double grid_h = 0.0;
  double initial_slope = 0.0;
  double bottom = 0.0;            // Dirichlet bottom of -u'' + q on [a,b]
  double bottom_companion = 0.0;  // same for the sign-flipped potential
  std::vector<double> r, u, du, A;
  // |q + gamma^2 - (A'_central + (d-1)A/r + A^2)| per node; endpoints carry 0
  // since the centered difference needs both neighbours.
  std::vector<double> residual_nodes;
  double residual = 0.0;  // max over interior nodes
  PotentialProfile base;  // nonnegative base part; zero profile unless supplied
  std::string warning;    // nonempty iff the companion bound fails (not fatal)

  ordered_json to_json() const;  // summary without the grid arrays
  void save_csv(const std::string& path) const;  // columns r,u,A,residual
};

RiccatiDecomposition decompose(const PotentialProfile& q, double a, double b,
                               double gamma, int dimension = 3,
                               const RiccatiParams& params = {});

// Weighted bound on the inner window [a~, b~] of [a,b] with the trapezoid
// cutoff (linear ramps on [a,a~] and [b~,b]): writing the d-dimensional
// integrals with weight |x|^{1-d} reduces both sides to plain radial
// integrals, and
//
//   1/2 int_{a~}^{b~} A^2 dr  <=  67 gamma + int_a^b (W + 6/r^2) dr
//                                 + 6 ((a~-a)^{-1} + (b-b~)^{-1})
//
// whenever both sign operators are bounded below by -gamma^2 and, for
// gamma > 0, b-a <= 67/gamma. The 6/r^2 term absorbs the angular part of the
// cutoff gradient for d <= 3; larger d would need 3(d-1)^2/2 in its place, so
// margins are only guaranteed up to d = 3.
struct WeightedEstimateReport {
  double a = 0.0, b = 0.0;
  double a_tilde = 0.0, b_tilde = 0.0;
  double gamma = 0.0;
  int dimension = 3;
  double lhs = 0.0;                 // (1/2) int over [a~,b~] of A^2
  double rhs_gamma_term = 0.0;      // 67 gamma
  double rhs_potential_term = 0.0;  // int_a^b W dr + 6(1/a - 1/b)
  double rhs_edge_term = 0.0;       // 6((a~-a)^{-1} + (b-b~)^{-1})
  double margin = 0.0;              // rhs_total() - lhs
  bool two_sided = false;           // companion bound verified

  double rhs_total() const { return rhs_gamma_term + rhs_potential_term + rhs_edge_term; }
  ordered_json to_json() const;
};

WeightedEstimateReport weighted_estimate(const RiccatiDecomposition& dec, double a_tilde,
                                         double b_tilde);

// Discrete integration-by-parts identity for a Dirichlet eigenpair (lambda,
// psi) and a cutoff phi with phi*psi vanishing at both ends:
//
//   int |(phi psi)'|^2 + q |phi psi|^2  =  int |phi'|^2 psi^2 + lambda |phi psi|^2.
//
// Both sides are evaluated with forward differences and Riemann sums over the
// grid, so they agree to O(h); the gap is returned for ratio tests. psi and
// phi hold interior-node values (i = 1..N-1); boundary values are taken as 0
// for psi and flat-extended for phi.
struct ProductIdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
};

ProductIdentityCheck product_identity_check(const PotentialProfile& q, const Grid& grid,
                                            const std::vector<double>& psi, double lambda,
                                            const std::vector<double>& phi);

}  // namespace halflab
