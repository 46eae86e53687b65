#pragma once

#include <functional>
#include <string>
#include <vector>

#include "halflab/spectral.hpp"

namespace halflab {

// Weighted log integral  int_a^b log(f(lambda)) lambda^{-1/2} dlambda  for a
// pointwise density evaluator f >= 0.
//
// Isolated quadratic zeros of f listed in `zeros` are cut out by symmetric
// windows of half-width `zero_window` and completed analytically: inside the
// window f ~ c (lambda-z)^2, and  int_{-w}^{w} log(c t^2) dt  has the
// elementary value 2w log(c) + 4w (log(w) - 1).  Returns -inf only when f
// stays below an absolute floor on a subinterval of positive length.
ExtendedReal log_density_integral(const std::function<double(double)>& f, double a, double b,
                                  const std::vector<double>& zeros = {}, double tol = 1e-8,
                                  double zero_window = 1e-4);

// Same integral with the quadrature bookkeeping attached (finite case only;
// error_estimate/evaluations are zero when the value is -inf).
struct LogIntegral {
  ExtendedReal value;
  double error_estimate = 0.0;
  long evaluations = 0;
};
LogIntegral log_density_integral_detail(const std::function<double(double)>& f, double a,
                                        double b, const std::vector<double>& zeros = {},
                                        double tol = 1e-8, double zero_window = 1e-4);

// Entropy integral of a sampled density over [a,b].  The samples are joined
// by local cubic interpolation; sample zeros that look quadratic get the
// analytic window treatment above; a density below 1e-300 across one or more
// whole sample cells inside [a,b] yields -inf.
// Requires the grid to cover [a,b] without gaps wider than (b-a)/16.
ExtendedReal entropy_integral(const SpectralDensity& density, double a, double b);

// A finite nonnegative measure on the compact interval spanned by its sample
// grid: an absolutely continuous part given by density samples (joined by
// linear interpolation) plus finitely many atoms.
struct Measure {
  std::vector<double> lambda;   // strictly increasing sample grid
  std::vector<double> density;  // values >= 0, same length
  struct Atom {
    double position = 0.0;
    double mass = 0.0;
  };
  std::vector<Atom> atoms;

  double lo() const { return lambda.front(); }
  double hi() const { return lambda.back(); }
  double value_at(double x) const;  // linear interpolation of the a.c. density
  double mass() const;              // a.c. mass + atom masses
  double moment(int power) const;   // int lambda^power dmu

  // Constant-density measure c dlambda on [lo,hi].
  static Measure constant(double lo, double hi, double c, int samples = 257);
  // Sampled from an evaluator on a uniform grid with optional extra breakpoints.
  static Measure sampled(const std::function<double(double)>& f, double lo, double hi,
                         int samples = 513, const std::vector<double>& breaks = {});

  void validate() const;  // grid monotone, densities >= 0, atoms inside [lo,hi]
};

struct MeasurePair {
  Measure rho;
  Measure nu;
};

// S(rho|nu) = -int log(drho/dnu) drho, and -inf unless rho is absolutely
// continuous with respect to nu: every rho-atom must sit on a nu-atom, and the
// a.c. part of rho must vanish wherever the a.c. part of nu does.
ExtendedReal relative_entropy(const MeasurePair& pair);

// Upper-semicontinuity check along a sequence of measure pairs converging
// weak-* to `limit`: asserts S(rho|nu) >= limsup_n S(rho_n|nu_n) - tol.
// Weak-* convergence is pretested on the moments {1, lambda, lambda^2,
// lambda^3}; if the moments do not settle, the verdict is "inconclusive"
// rather than a failure.  A -inf limit is accepted when the tail of the
// sequence is itself -inf or keeps descending.
struct SemicontinuityVerdict {
  std::string verdict;  // "pass" | "fail" | "inconclusive"
  bool weak_star_ok = false;
  ExtendedReal limit_entropy;
  std::vector<ExtendedReal> sequence_entropies;
  std::string detail;
};
SemicontinuityVerdict semicontinuity_check(const std::vector<MeasurePair>& sequence,
                                           const MeasurePair& limit, double tol = 1e-6);

// Cutoff construction reducing the weighted inequality
//   int_a^b log(mu'(lambda)) lambda^{-1/2} dlambda >= limsup (same for mu_n)
// to the plain semicontinuity check: rho is the fixed reference measure
// chi_[a,b](lambda) lambda^{-1/2} dlambda and nu_n = theta(lambda) dmu_n with
// a C^1 shoulder theta equal to 1 on [a,b].  The verdict also records the
// weighted integrals themselves and cross-checks the identity
//   S(rho|nu_n) = int_a^b log(mu_n'(lambda) lambda^{1/2}) lambda^{-1/2} dlambda
// at the last sequence element.
struct WeightedSemicontinuity {
  SemicontinuityVerdict pair_verdict;
  std::vector<ExtendedReal> weighted_sequence;  // int log(mu_n') lambda^{-1/2}
  ExtendedReal weighted_limit;
  double identity_residual = 0.0;  // |S(rho|nu_n) - weighted form|, last n
  std::string verdict;             // combined: pass/fail/inconclusive
};
WeightedSemicontinuity weighted_semicontinuity_check(const std::vector<Measure>& mu_sequence,
                                                     const Measure& mu_limit, double a, double b,
                                                     double tol = 1e-6);

}  // namespace halflab
