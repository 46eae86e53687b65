#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "halflab/common.hpp"
#include "nlohmann/json.hpp"

namespace halflab {

using ordered_json = nlohmann::ordered_json;

enum class PieceKind { constant, poly, centrifugal };

// One piece of a piecewise potential on [from, to). Polynomials are stored in
// powers of (r - from): expanding a bump like c(r-r0)^2(r1-r)^2 in absolute
// powers of r near r ~ 50 loses ~9 digits to cancellation, which the O(h^2)
// residual checks would see.
struct Piece {
  double from = 1.0;
  double to = 2.0;
  PieceKind kind = PieceKind::constant;

  // coeffs[k] is the n×n matrix coefficient of (r-from)^k for poly pieces;
  // constant and centrifugal pieces use coeffs[0] only (value, resp. c in c/r²).
  std::vector<Eigen::MatrixXd> coeffs;

  // Original decimal tokens (row-major per coefficient) plus the from/to
  // tokens, kept verbatim so save(load(f)) reproduces f byte for byte.
  std::vector<std::vector<std::string>> coeff_tokens;
  std::string from_token, to_token;

  bool unbounded() const { return std::isinf(to); }
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }

  void value_into(double r, Eigen::MatrixXd& out) const;
  double value_scalar(double r) const;
};

// Piecewise-defined scalar or small-matrix potential on [1, ∞), zero beyond
// support_end. Immutable after construction; all operations below are pure.
struct PotentialProfile {
  int channel_dim = 1;
  std::vector<Piece> pieces;   // contiguous cover of [1, support_end)
  double support_end = 1.0;    // R_Q; +inf when the last piece is unbounded
  std::string support_end_token = "1";

  static PotentialProfile zero(int n = 1);
  static PotentialProfile from_json(const ordered_json& j);
  static PotentialProfile load(const std::string& path);
  ordered_json to_json() const;
  void save(const std::string& path) const;

  void validate() const;

  bool scalar() const { return channel_dim == 1; }
  bool compact() const { return std::isfinite(support_end); }

  // Right-continuous evaluation; zero beyond support_end.
  double value_scalar(double r) const;
  void value_into(double r, Eigen::MatrixXd& out) const;
  Eigen::MatrixXd value_matrix(double r) const;

  // Two-sided mean (q(r-)+q(r+))/2 at interior breakpoints. A node that lands
  // exactly on a jump must not be attributed to one side only: that leaves an
  // O(h) eigenvalue term the h-Richardson step cannot cancel.
  double sample_scalar(double r) const;
  Eigen::MatrixXd sample_matrix(double r) const;

  std::vector<double> breakpoints() const;  // piece edges, including 1 and R_Q

  // Exact piecewise integral of the (1,1) entry, i.e. ∫ (Q e0, e0) dr.
  double entry11_integral(double lo, double hi) const;

  double neg_part_sup() const;  // ‖Q₋‖∞ = sup_r max(0, -λ_min(Q(r)))
  double sup_norm() const;      // sup_r ‖Q(r)‖ (spectral norm)

  // True iff Q(r)·e0 = 0 for all r ≤ 2 (up to tol); trivially needs checking
  // only on pieces meeting [1,2].
  bool annihilates_e0_below_2(double tol = 1e-14) const;
};

// ---- profile construction helpers -----------------------------------------

// Scalar constant piece [from, to) of the given value; fills with explicit
// zero pieces so callers can compose contiguous profiles easily.
PotentialProfile scalar_step_profile(const std::vector<double>& edges,
                                     const std::vector<double>& values);

// Scalar profile with a single constant piece `value` on [from,to), zero
// elsewhere on [1, max(to, 2)).
PotentialProfile scalar_well(double from, double to, double value);

// Scalar C¹ bump c·(r-r0)²·(r1-r)² on [r0,r1), normalized so the peak value is
// `amplitude`, zero elsewhere.
PotentialProfile scalar_bump(double r0, double r1, double amplitude);

// Centrifugal tail -(d-1)(d-3)/(4 r²) on [from, ∞).
PotentialProfile centrifugal_profile(int d, double from);

// ---- profile algebra --------------------------------------------------------

PotentialProfile scaled(const PotentialProfile& p, double t);
PotentialProfile sum(const PotentialProfile& a, const PotentialProfile& b);
// (1-χ_R)·p: zero the part inside radius R, keep the tail.
PotentialProfile zero_inside(const PotentialProfile& p, double R);
// χ_R·p: keep the part inside radius R.
PotentialProfile zero_outside(const PotentialProfile& p, double R);
// θ·p with the cubic fade θ = (1-s)²(1+2s), s=(r-x0)/(x1-x0), on [x0,x1]:
// 1 before x0, 0 after x1. Rejects centrifugal pieces under the fade window.
PotentialProfile faded(const PotentialProfile& p, double x0, double x1);
// Negative part (|p|-p)/2 of a scalar profile, as a piecewise profile with
// pieces split at the sign changes of the polynomial values.
PotentialProfile negative_part(const PotentialProfile& p);

}  // namespace halflab
