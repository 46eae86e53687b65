#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "halflab/grid.hpp"
#include "halflab/potential.hpp"

namespace halflab {

// Finite-difference model of -d^2/dr^2 + Q(r) with Dirichlet data at r_min
// (and at r_max unless neumann_cap). Block tridiagonal: diagonal blocks
// kinetic*2/h^2 + Q(r_i), off-diagonal -kinetic/h^2 times identity. Blocks are
// stored contiguously, column-major, n*n doubles per interior node.
struct DiscreteOperator {
  Grid grid;
  int n = 1;
  double kinetic = 1.0;
  bool neumann_cap = false;
  std::vector<double> blocks;

  long size() const { return grid.interior_count() * n; }
  double off() const { return -kinetic / (grid.h * grid.h); }

  double dval(long i) const { return blocks[static_cast<std::size_t>(i)]; }
  Eigen::Map<const Eigen::MatrixXd> block(long i) const {
    return {blocks.data() + static_cast<std::size_t>(i) * n * n, n, n};
  }
};

// Potential samples use the two-sided mean at piece boundaries, so grid
// refinement converges at second order even across jumps.
DiscreteOperator assemble_operator(const PotentialProfile& q, const Grid& g,
                                   bool neumann_cap = false, double kinetic = 1.0);

DiscreteOperator assemble_scalar_operator(const std::function<double(double)>& q,
                                          const Grid& g, bool neumann_cap = false,
                                          double kinetic = 1.0);

// chi_[1,2] e0 sampled at interior nodes; a node landing on r=2 gets 1/2.
std::vector<double> f_vector(const DiscreteOperator& op);

// (T - z)^{-1} rhs via complex block Thomas elimination.
std::vector<std::complex<double>> resolvent_apply(const DiscreteOperator& op,
                                                  std::complex<double> z,
                                                  const std::vector<std::complex<double>>& rhs);

// (f, (T - z)^{-1} f) in the h-weighted inner product.
std::complex<double> stieltjes(const DiscreteOperator& op, std::complex<double> z);

double weighted_norm_sq(const std::vector<std::complex<double>>& u, double h);

// h sum |u_i|^2 + h sum |(u_{i+1}-u_i)/h|^2 per channel, boundary edges
// included with zero boundary values.
double h1_norm_sq(const std::vector<std::complex<double>>& u, const DiscreteOperator& op);

Eigen::MatrixXd to_dense(const DiscreteOperator& op);

}  // namespace halflab
