#include <complex>

#include "doctest.h"
#include "halflab/operator.hpp"
#include "oracles.hpp"

using namespace halflab;
using cd = std::complex<double>;

TEST_CASE("assembly reproduces the five-point stencil numbers") {
  Grid g = Grid::from_range(1.0, 2.0, 0.25, 4);
  CHECK(g.N == 4);
  CHECK(g.node(1) == doctest::Approx(1.25));
  DiscreteOperator op = assemble_operator(PotentialProfile::zero(), g);
  CHECK(op.size() == 3);
  CHECK(op.dval(0) == doctest::Approx(32.0));  // 2/h^2
  CHECK(op.off() == doctest::Approx(-16.0));

  DiscreteOperator shifted = assemble_operator(scalar_well(1.0, 2.0, -4.0), g);
  CHECK(shifted.dval(1) == doctest::Approx(28.0));

  DiscreteOperator half = assemble_operator(PotentialProfile::zero(), g, false, 0.5);
  CHECK(half.dval(0) == doctest::Approx(16.0));
  CHECK(half.off() == doctest::Approx(-8.0));

  DiscreteOperator cap = assemble_operator(PotentialProfile::zero(), g, true);
  CHECK(cap.dval(2) == doctest::Approx(16.0));  // last node loses one coupling
  CHECK(cap.dval(1) == doctest::Approx(32.0));
}

TEST_CASE("grid construction rejects coarse ranges") {
  CHECK_THROWS_AS(Grid::from_range(1.0, 1.01, 1e-3), precondition_error);
  CHECK_NOTHROW(Grid::from_range(1.0, 1.016, 1e-3));
  CHECK_THROWS_AS(Grid::from_range(2.0, 2.003, 1e-3, 4), precondition_error);
}

TEST_CASE("f vector samples chi_[1,2] e0 with a half weight on the edge node") {
  Grid g = Grid::from_range(1.0, 3.0, 0.25, 4);
  DiscreteOperator op = assemble_operator(PotentialProfile::zero(), g);
  auto f = f_vector(op);
  REQUIRE(f.size() == 7);
  CHECK(f[0] == 1.0);  // r = 1.25
  CHECK(f[2] == 1.0);  // r = 1.75
  CHECK(f[3] == 0.5);  // r = 2.00 exactly
  CHECK(f[4] == 0.0);  // r = 2.25

  // matrix case: only the first channel is driven
  ordered_json doc{{"channel_dim", 2},
                   {"support_end", "2"},
                   {"pieces", ordered_json::array({ordered_json{
                                  {"from", "1"},
                                  {"to", "2"},
                                  {"kind", "const"},
                                  {"coeffs", ordered_json::array({ordered_json::array(
                                                 {ordered_json::array({"0", "1"}),
                                                  ordered_json::array({"1", "0"})})})}}})}};
  DiscreteOperator mop = assemble_operator(PotentialProfile::from_json(doc), g);
  auto mf = f_vector(mop);
  REQUIRE(mf.size() == 14);
  CHECK(mf[0] == 1.0);
  CHECK(mf[1] == 0.0);
  CHECK(mf[6] == 0.5);
  CHECK(mf[7] == 0.0);
}

TEST_CASE("block Thomas solve agrees with a dense LU") {
  Grid g = Grid::from_range(1.0, 4.0, 0.125, 4);
  for (int n : {1, 3}) {
    PotentialProfile q;
    if (n == 1) {
      q = sum(scalar_well(2.0, 3.0, -4.0), scalar_bump(1.5, 3.5, 2.0));
    } else {
      ordered_json doc{{"channel_dim", 3},
                       {"support_end", "3"},
                       {"pieces",
                        ordered_json::array({ordered_json{
                            {"from", "1"},
                            {"to", "3"},
                            {"kind", "const"},
                            {"coeffs",
                             ordered_json::array({ordered_json::array(
                                 {ordered_json::array({"-2", "1", "0"}),
                                  ordered_json::array({"1", "-3", "0.5"}),
                                  ordered_json::array({"0", "0.5", "1"})})})}}})}};
      q = PotentialProfile::from_json(doc);
    }
    DiscreteOperator op = assemble_operator(q, g);
    cd z(0.7, 0.31);
    auto f = f_vector(op);
    std::vector<cd> rhs(f.begin(), f.end());
    auto u = resolvent_apply(op, z, rhs);

    Eigen::MatrixXcd T = to_dense(op).cast<cd>();
    T.diagonal().array() -= z;
    Eigen::VectorXcd b(op.size());
    for (long i = 0; i < op.size(); ++i) b(i) = rhs[static_cast<std::size_t>(i)];
    Eigen::VectorXcd x = T.partialPivLu().solve(b);
    for (long i = 0; i < op.size(); ++i)
      CHECK(std::abs(u[static_cast<std::size_t>(i)] - x(i)) < 1e-12);
  }
}

TEST_CASE("stieltjes transform is Herglotz and conjugate-symmetric") {
  Grid g = Grid::from_range(1.0, 30.0, 2e-3);
  DiscreteOperator op = assemble_operator(scalar_well(2.0, 3.0, -4.0), g);
  for (cd z : {cd(0.5, 1.0), cd(-1.0, 0.25), cd(4.0, 0.05), cd(0.0, 3.0)}) {
    cd m = stieltjes(op, z);
    CHECK(m.imag() > 0.0);
    cd mbar = stieltjes(op, std::conj(z));
    CHECK(std::abs(mbar - std::conj(m)) < 1e-13 * std::abs(m));
  }
}

TEST_CASE("stieltjes at z=i matches the free closed form on the default grid") {
  // Finite volume and h bias both enter; the check pins the combined budget.
  Grid g = Grid::from_range(1.0, 50.0, 1e-3);
  DiscreteOperator op = assemble_operator(PotentialProfile::zero(), g);
  cd m = stieltjes(op, cd(0.0, 1.0));
  CHECK(std::abs(m - oracles::free_stieltjes_at_i()) < 2e-3);
}

TEST_CASE("hilbert identity residual stays at solver precision") {
  // (T-z1)^{-1} - (T-z2)^{-1} = (z1-z2)(T-z1)^{-1}(T-z2)^{-1} contracted with f
  Grid g = Grid::from_range(1.0, 20.0, 2e-3);
  DiscreteOperator op = assemble_operator(scalar_bump(2.0, 5.0, -1.5), g);
  cd z1(0.4, 0.8), z2(-0.3, 1.7);
  auto f = f_vector(op);
  std::vector<cd> rhs(f.begin(), f.end());
  auto u2 = resolvent_apply(op, z2, rhs);
  auto u12 = resolvent_apply(op, z1, u2);
  cd lhs = stieltjes(op, z1) - stieltjes(op, z2);
  cd rhs_val = 0.0;
  for (std::size_t i = 0; i < u12.size(); ++i) rhs_val += f[i] * u12[i];
  rhs_val *= (z1 - z2) * op.grid.h;
  CHECK(std::abs(lhs - rhs_val) < 1e-10);
}

TEST_CASE("weighted and H1 norms on a hand example") {
  Grid g = Grid::from_range(0.0, 1.0, 0.25, 4);
  DiscreteOperator op = assemble_operator(PotentialProfile::zero(), g);
  // u = (1, 2, 1) at h=0.25: l2 = 0.25*6; gradient edges (1,1,-1,-1)/h
  std::vector<cd> u{1.0, 2.0, 1.0};
  CHECK(weighted_norm_sq(u, g.h) == doctest::Approx(1.5));
  CHECK(h1_norm_sq(u, op) == doctest::Approx(1.5 + 4.0 / 0.25));
}
