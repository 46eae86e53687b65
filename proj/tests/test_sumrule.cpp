#include <cmath>

#include "doctest.h"
#include "halflab/corpus.hpp"
#include "halflab/sumrule.hpp"

using namespace halflab;

namespace {

// int_1^4 log mu'_free lambda^{-1/2} d lambda, mpmath, 2 independent routes
constexpr double kFreeEntropy14 = -5.085310008678011244;
// same over [0.5, 20]
constexpr double kFreeEntropy0520 = -23.919288125799806195;
// log(4) * int_a^b lambda^{-1/2}
constexpr double kSlack14 = 2.7725887222397812376;       // [1,4]: 2 log 4
constexpr double kSlack0520 = 10.438877426217773250;     // [0.5,20]
// bound state of the well -1 on [3,4] with the Dirichlet wall at r=1:
// matching kappa coth(2 kappa) through the well against the decaying tail
constexpr double kLambdaWell1 = -0.13167745496714011676;
// well -4 on [2,5]: exactly two bound states behind the wall
constexpr double kLambdaDeep0 = -3.3846227502922145171;
constexpr double kLambdaDeep1 = -1.6402935007636613940;
constexpr double kDeepSumSqrt = 3.1204738590042207622;

constexpr std::uint64_t kCorpusSeed = 0xAB5EED;

PotentialProfile diag_profile(double from, double to, double q11, double q22) {
  PotentialProfile p;
  p.channel_dim = 2;
  Piece lead;
  lead.from = 1.0;
  lead.to = from;
  lead.kind = PieceKind::constant;
  lead.coeffs = {Eigen::MatrixXd::Zero(2, 2)};
  Piece mid;
  mid.from = from;
  mid.to = to;
  mid.kind = PieceKind::constant;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = q11;
  m(1, 1) = q22;
  mid.coeffs = {m};
  p.pieces = {lead, mid};
  p.support_end = to;
  p.validate();
  return p;
}

}  // namespace

TEST_CASE("free profile sum rule baseline") {
  auto rep = sum_rule_check(PotentialProfile::zero(), 1.0, 4.0);

  CHECK(rep.weight_integral == doctest::Approx(2.0).epsilon(1e-15));
  REQUIRE(rep.relative_entropy_variant.finite());
  CHECK(std::fabs(rep.relative_entropy_variant.value) < 1e-8);
  REQUIRE(rep.lhs_entropy.finite());
  CHECK(rep.lhs_entropy.value == doctest::Approx(kFreeEntropy14).epsilon(1e-8));
  CHECK(rep.lhs_correction ==
        doctest::Approx(kFreeEntropy14 - kSlack14).epsilon(1e-8));

  CHECK(rep.rhs.potential_term == 0.0);
  CHECK(rep.rhs.eigen_term == 0.0);
  CHECK(rep.rhs.depth_term == 0.0);
  CHECK(rep.eigenvalues.empty());

  REQUIRE(rep.margin.finite());
  CHECK(rep.margin.value == doctest::Approx(kSlack14).epsilon(1e-8));
  REQUIRE(rep.margin_literal.finite());
  CHECK(rep.margin_literal.value ==
        doctest::Approx(2.0 * kFreeEntropy14 - kSlack14).epsilon(1e-7));

  CHECK(rep.constants.dimension == 1);
  CHECK(rep.constants.sphere_area == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(rep.constants.c_d == doctest::Approx(M_PI / 4.0 + 2.0 * M_PI).epsilon(1e-15));
  CHECK(rep.constants.alpha_d == doctest::Approx(M_PI + rep.lhs_correction).epsilon(1e-13));
  CHECK(rep.lhs_entropy_error > 0.0);
  CHECK(rep.lhs_entropy_error < 1e-6);
}

TEST_CASE("square well: bound state, terms, positive margin" * doctest::test_suite("slow")) {
  auto q = scalar_well(3.0, 4.0, -1.0);
  auto rep = sum_rule_check(q, 0.5, 20.0);

  REQUIRE(rep.eigenvalues.size() == 1);
  CHECK(rep.eigenvalues[0] == doctest::Approx(kLambdaWell1).epsilon(1e-5));
  CHECK(rep.rhs.potential_term == doctest::Approx(M_PI / 2.0).epsilon(1e-13));
  CHECK(rep.rhs.depth_term == doctest::Approx(-2.0 * M_PI).epsilon(1e-13));
  CHECK(rep.rhs.eigen_term ==
        doctest::Approx(-2.0 * M_PI * std::sqrt(-kLambdaWell1)).epsilon(1e-4));

  REQUIRE(rep.margin.finite());
  CHECK(rep.margin.value > 10.0);
  CHECK(rep.margin >= ExtendedReal(0.0));

  // the margin must recompute from its stored pieces exactly
  double recomputed = rep.relative_entropy_variant.value +
                      std::log(4.0) * rep.weight_integral - rep.rhs.total();
  CHECK(std::fabs(recomputed - rep.margin.value) < 1e-12);
  double literal = rep.lhs_entropy.value + rep.lhs_correction - rep.rhs.total();
  CHECK(std::fabs(literal - rep.margin_literal.value) < 1e-12);
}

TEST_CASE("deep well keeps both frozen bound states" * doctest::test_suite("slow")) {
  auto rep = sum_rule_check(scalar_well(2.0, 5.0, -4.0), 0.5, 20.0);

  REQUIRE(rep.eigenvalues.size() == 2);
  CHECK(rep.eigenvalues[0] == doctest::Approx(kLambdaDeep0).epsilon(2e-5));
  CHECK(rep.eigenvalues[1] == doctest::Approx(kLambdaDeep1).epsilon(2e-5));
  CHECK(rep.rhs.eigen_term == doctest::Approx(-2.0 * M_PI * kDeepSumSqrt).epsilon(1e-4));
  CHECK(rep.rhs.depth_term == doctest::Approx(-4.0 * M_PI).epsilon(1e-13));
  CHECK(rep.rhs.potential_term == doctest::Approx(6.0 * M_PI).epsilon(1e-13));
  REQUIRE(rep.margin.finite());
  CHECK(rep.margin.value > 10.0);
}

TEST_CASE("barrier bump follows the area law" * doctest::test_suite("slow")) {
  // peak 4, width 1.5: area (8/15)*4*1.5 = 3.2
  auto rep = sum_rule_check(scalar_bump(4.0, 5.5, 4.0), 0.5, 20.0);

  CHECK(rep.eigenvalues.empty());
  // the nonnegative polynomial's extremum scan leaves rounding-level noise
  CHECK(std::fabs(rep.rhs.depth_term) < 1e-6);
  CHECK(rep.rhs.potential_term == doctest::Approx(-0.5 * M_PI * 3.2).epsilon(1e-12));
  REQUIRE(rep.relative_entropy_variant.finite());
  CHECK(rep.relative_entropy_variant.value < 0.0);

  // full-line estimate: margin ~ log4-slack - (pi/2) * area ~ +5.4; the
  // window drops the barrier's large positive log|F|^2 at low k, lifting the
  // margin above that floor
  REQUIRE(rep.margin.finite());
  CHECK(rep.margin.value > 4.0);
  CHECK(rep.margin.value < 16.0);
}

TEST_CASE("scaling sweep is continuous down to the free end" * doctest::test_suite("slow")) {
  auto base = scalar_well(3.0, 4.0, -2.0);
  // the depth term -2 pi sqrt(2t) is exact but has unbounded slope at t=0,
  // so continuity is checked on the margin with that term removed
  std::vector<double> smooth;
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    auto rep = sum_rule_check(scaled(base, t), 0.5, 20.0);
    REQUIRE(rep.margin.finite());
    CHECK(rep.rhs.depth_term ==
          doctest::Approx(-2.0 * M_PI * std::sqrt(2.0 * t)).epsilon(1e-12));
    smooth.push_back(rep.margin.value + rep.rhs.depth_term);
    if (t == 0.0) {
      CHECK(std::fabs(rep.relative_entropy_variant.value) < 1e-7);
      CHECK(rep.margin.value == doctest::Approx(kSlack0520).epsilon(1e-7));
      CHECK(rep.lhs_entropy.value == doctest::Approx(kFreeEntropy0520).epsilon(1e-8));
    }
  }
  for (std::size_t i = 0; i + 1 < smooth.size(); ++i)
    CHECK(std::fabs(smooth[i + 1] - smooth[i]) < 2.0);
}

TEST_CASE("deepening the negative part lowers both rhs terms" * doctest::test_suite("slow")) {
  double prev_eigen = 1.0, prev_depth = 1.0;
  for (double depth : {1.0, 2.0, 4.0}) {
    auto rep = sum_rule_check(scalar_well(3.0, 4.0, -depth), 0.5, 20.0);
    REQUIRE(rep.margin.finite());
    CHECK(rep.rhs.eigen_term <= prev_eigen);
    CHECK(rep.rhs.depth_term <= prev_depth);
    prev_eigen = rep.rhs.eigen_term;
    prev_depth = rep.rhs.depth_term;
  }
}

TEST_CASE("hypothesis and precondition failures") {
  CHECK_THROWS_WITH_AS(sum_rule_check(scalar_well(1.5, 3.0, -1.0), 1.0, 4.0),
                       doctest::Contains("hypothesis"), hypothesis_error);
  CHECK_THROWS_WITH_AS(sum_rule_check(diag_profile(1.5, 2.5, -1.0, 0.0), 1.0, 4.0),
                       doctest::Contains("hypothesis"), hypothesis_error);
  CHECK_THROWS_WITH_AS(sum_rule_check(PotentialProfile::zero(), -1.0, 4.0),
                       doctest::Contains("precondition"), precondition_error);
  // coupled channels need the window below the first free zero
  CHECK_THROWS_WITH_AS(sum_rule_check(diag_profile(3.0, 4.0, -1.0, 0.0), 0.5, 50.0),
                       doctest::Contains("free-density zero"), precondition_error);
  // support sticking out of the eigensolver grid
  SumRuleParams short_grid;
  short_grid.L = 6.0;
  CHECK_THROWS_WITH_AS(sum_rule_check(scalar_well(3.0, 8.0, -1.0), 1.0, 4.0, short_grid),
                       doctest::Contains("support"), precondition_error);
}

TEST_CASE("coupled channels reduce to the scalar pipeline" * doctest::test_suite("slow")) {
  // diag(q, 0): the e0 channel decouples and carries all of q
  auto rep2 = sum_rule_check(diag_profile(3.0, 4.0, -1.0, 0.0), 1.0, 4.0);
  auto rep1 = sum_rule_check(scalar_well(3.0, 4.0, -1.0), 1.0, 4.0);
  REQUIRE(rep2.relative_entropy_variant.finite());
  CHECK(rep2.relative_entropy_variant.value ==
        doctest::Approx(rep1.relative_entropy_variant.value).epsilon(1e-4));
  CHECK(rep2.margin.value == doctest::Approx(rep1.margin.value).epsilon(1e-4));

  // diag(0, q): potential lives entirely off the e0 channel, measure is free
  auto repoff = sum_rule_check(diag_profile(2.5, 3.5, 0.0, -1.0), 1.0, 4.0);
  CHECK(std::fabs(repoff.relative_entropy_variant.value) < 1e-5);
  CHECK(repoff.rhs.potential_term == 0.0);
  // the off-channel well still has a bound state and a negative part
  CHECK(repoff.rhs.depth_term == doctest::Approx(-2.0 * M_PI).epsilon(1e-13));
  CHECK(repoff.eigenvalues.size() == 1);
}

TEST_CASE("report serializes and margins recompute from JSON") {
  auto rep = sum_rule_check(PotentialProfile::zero(), 1.0, 4.0);
  auto j = rep.to_json();

  CHECK(j["interval"][0].get<double>() == 1.0);
  CHECK(j["interval"][1].get<double>() == 4.0);
  REQUIRE(j.contains("rhs_terms"));
  for (const char* key : {"potential_term", "eigen_term", "depth_term", "total"})
    CHECK(j["rhs_terms"].contains(key));

  double rel = j["relative_entropy_variant"].get<double>();
  double w = j["weight_integral"].get<double>();
  double total = j["rhs_terms"]["total"].get<double>();
  CHECK(std::fabs(rel + std::log(4.0) * w - total - j["margin"].get<double>()) < 1e-12);
  double lhs = j["lhs_entropy"].get<double>();
  double corr = j["lhs_correction"].get<double>();
  CHECK(std::fabs(lhs + corr - total - j["margin_literal"].get<double>()) < 1e-12);

  CHECK(json_extended(ExtendedReal::minus_infinity()) == ordered_json("-inf"));
  CHECK(j["constants"]["dimension"].get<int>() == 1);
}

TEST_CASE("dimension enters only the recorded constants" * doctest::test_suite("slow")) {
  auto q = scalar_well(3.0, 4.0, -1.0);
  SumRuleParams p1, p3;
  p3.dimension = 3;
  auto r1 = sum_rule_check(q, 1.0, 4.0, p1);
  auto r3 = sum_rule_check(q, 1.0, 4.0, p3);

  CHECK(r1.margin.value == r3.margin.value);
  CHECK(r1.rhs.total() == r3.rhs.total());
  // (d-1)(d-3)/8 vanishes at d=1 and d=3, so alpha agrees too
  CHECK(r1.constants.alpha_d == doctest::Approx(r3.constants.alpha_d).epsilon(1e-15));
  CHECK(r3.constants.sphere_area == doctest::Approx(4.0 * M_PI).epsilon(1e-14));
  CHECK(r3.constants.c_d == doctest::Approx(1.0 / 8.0 + 2.0 * M_PI).epsilon(1e-14));
  CHECK(r1.constants.c_d == doctest::Approx(M_PI / 4.0 + 2.0 * M_PI).epsilon(1e-14));
}

TEST_CASE("corpus construction: constraints and determinism") {
  auto corpus = sum_rule_corpus(kCorpusSeed, 50);
  REQUIRE(corpus.size() == 50);
  for (const auto& q : corpus) {
    CHECK(q.scalar());
    CHECK(q.compact());
    CHECK(q.annihilates_e0_below_2());
    CHECK(q.support_end <= 8.0 + 1e-9);
    CHECK(q.sup_norm() <= 4.0 + 1e-9);
  }
  auto again = sum_rule_corpus(kCorpusSeed, 50);
  for (std::size_t i = 0; i < corpus.size(); ++i)
    CHECK(corpus[i].to_json() == again[i].to_json());
  auto other = sum_rule_corpus(kCorpusSeed + 1, 50);
  bool any_different = false;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (corpus[i].to_json() != other[i].to_json()) any_different = true;
  CHECK(any_different);
}

TEST_CASE("corpus margins stay nonnegative" * doctest::test_suite("slow")) {
  auto corpus = sum_rule_corpus(kCorpusSeed, 50);
  double min_margin = 1e300;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto rep = sum_rule_check(corpus[i], 0.5, 20.0);
    REQUIRE(rep.margin.finite());
    CHECK(rep.margin.value >= -1e-6);
    min_margin = std::min(min_margin, rep.margin.value);
  }
  MESSAGE("minimum corpus margin: ", min_margin);
  CHECK(min_margin < 100.0);
}

TEST_CASE("relative entropy is stable under quadrature refinement" *
          doctest::test_suite("slow")) {
  auto corpus = sum_rule_corpus(kCorpusSeed, 5);
  for (const auto& q : corpus) {
    SumRuleParams coarse, fine;
    fine.quad_tol = 1e-10;
    auto rc = sum_rule_check(q, 0.5, 20.0, coarse);
    auto rf = sum_rule_check(q, 0.5, 20.0, fine);
    CHECK(std::fabs(rc.relative_entropy_variant.value - rf.relative_entropy_variant.value) <
          1e-8);
  }
}
