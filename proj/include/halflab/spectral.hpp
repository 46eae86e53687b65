#pragma once

#include <complex>
#include <string>
#include <vector>

#include "halflab/operator.hpp"

namespace halflab {

// (1 - cos sqrt(lambda))^2 / (pi lambda^{3/2}); zeros at lambda = (2 pi k)^2.
double free_density(double lambda);

// Geometric grid on [0.05, 100] with extra points packed around the zeros of
// the free density that fall inside the range.
std::vector<double> default_lambda_grid(int points = 2000);

// One regular-solution pass at real lambda > 0 for a compact scalar profile:
// phi'' = (q - lambda) phi, phi(1) = 0, phi'(1) = 1, integrated to
// R = max(R_Q, 2) with m = int_1^2 phi accumulated on the way.
struct JostSample {
  double lambda = 0.0;
  double k = 0.0;        // sqrt(lambda)
  double phi = 0.0;      // phi(R)
  double dphi = 0.0;     // phi'(R)
  double m = 0.0;        // int_1^2 phi
  double jost_sq = 0.0;  // |F|^2 = k^2 phi(R)^2 + phi'(R)^2
  double density = 0.0;  // k m^2 / (pi |F|^2)
};
JostSample jost_sample(const PotentialProfile& q, double lambda);

// Outgoing boundary-value solve at complex z (Im z >= 0) for a compact
// profile of any channel dimension: -u'' + (Q - z)u = e0 chi_[1,2],
// u(1) = 0, u'(R) = i sqrt(z) u(R); returns M(z) = int_1^2 (u, e0) dr.
std::complex<double> stieltjes_continuum(const PotentialProfile& q, std::complex<double> z);

// mu'(lambda): regular-solution formula for scalar profiles, outgoing solve
// at real lambda for coupled channels. Exact up to the ODE integrator.
double density_jost(const PotentialProfile& q, double lambda);

// mu'(lambda) as lim_{eps->0} Im M(lambda + i eps)/pi, approached on the
// ladder eps in {1e-3, 5e-4, 2.5e-4} and Richardson-extrapolated twice; the
// smoothing bias is first order in eps, so the residue is O(eps^3).
double density_resolvent_limit(const PotentialProfile& q, double lambda);

struct SpectralDensity {
  std::vector<double> lambda_grid;
  std::vector<double> density;
  std::string method;     // "jost-exact" | "resolvent-limit"
  double epsilon = 0.0;   // imaginary offset when method is resolvent-limit
  ordered_json to_json() const;
};

SpectralDensity density_jost(const PotentialProfile& q, const std::vector<double>& grid);
SpectralDensity density_resolvent_limit(const PotentialProfile& q,
                                        const std::vector<double>& grid);

// Single-offset discrete variant: (1/pi) Im stieltjes(lambda + i eps) on the
// given grid. Carries the full O(eps) smoothing bias; eigenvalues show up as
// eps-wide Lorentzian bumps.
SpectralDensity density_resolvent_limit(const DiscreteOperator& op,
                                        const std::vector<double>& grid, double epsilon);

}  // namespace halflab
