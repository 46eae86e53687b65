#pragma once

#include <string>
#include <vector>

#include "halflab/operator.hpp"

namespace halflab {

// Number of eigenvalues strictly below x, by Sylvester inertia of the shifted
// block LDL^T factorization.
long count_below(const DiscreteOperator& op, double x);

// All eigenvalues below -1e-10, ascending, each located by bisection on
// count_below to absolute tolerance tol.
std::vector<double> negative_spectrum(const DiscreteOperator& op, double tol = 1e-12);

// Same spectrum through LAPACK dense/banded solvers; independent of the
// bisection path, intended as a cross-check on moderate grids.
std::vector<double> negative_spectrum_dense(const DiscreteOperator& op);

// Bottom of the spectrum (any sign), bisection within the Gershgorin bracket.
double lowest_eigenvalue(const DiscreteOperator& op, double tol = 1e-12);

// Dirichlet box [a,b] with spacing h; the box must span at least 4 intervals.
double lowest_eigenvalue_on(const PotentialProfile& q, double a, double b, double h);

// Inverse iteration at a shift just below lambda1. Result has h-weighted unit
// norm and positive first component; a scalar ground state must not change
// sign in the interior.
std::vector<double> ground_state(const DiscreteOperator& op, double lambda1);

struct EigenReport {
  std::vector<double> eigenvalues;
  double sum_sqrt = 0.0;
  std::string method;
  Grid grid;
  ordered_json to_json() const;
};

EigenReport eigen_report(const PotentialProfile& q, const Grid& g);

}  // namespace halflab
