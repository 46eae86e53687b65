#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "halflab/corpus.hpp"
#include "halflab/eigensolver.hpp"
#include "halflab/grid.hpp"
#include "halflab/layers.hpp"
#include "halflab/operator.hpp"

using namespace halflab;

namespace {

constexpr std::uint64_t kCorpusSeed = 0xAB5EED;

// ground state of -u'' - 2 chi_[14,16] u on the Dirichlet box [6,24]; even
// mode about r = 15 matches k tan(k) = kappa coth(8 kappa), k^2 + kappa^2 = 2;
// root frozen from the transcendental equation and confirmed by h-Richardson
constexpr double kBoxWellSym = -1.2077956466777877774;

// half-line wall at r = 1, well of depth 4 on [10,11]: log-derivative of the
// interior solution matched to the kappa tail through the well
constexpr double kFarWell4 = -1.8150126634064802023;

// same geometry at depth 1
constexpr double kFarWell1 = -0.1892386446245574359;

double overlap_width(const Layer& x, const Layer& y) {
  return std::min(x.b, y.b) - std::max(x.a, y.a);
}

std::vector<Layer> sorted_by_left(const LayerSystem& sys) {
  std::vector<Layer> ls = sys.layers;
  std::sort(ls.begin(), ls.end(),
            [](const Layer& x, const Layer& y) { return x.a < y.a; });
  return ls;
}

double sqrt_level_sum(const LayerSystem& sys) {
  double s = 0.0;
  for (std::size_t n = 1; n < sys.layers.size(); ++n)
    s += std::sqrt(sys.layers[n].eps);
  return s;
}

// sqrt(2) * (sum sqrt|lambda| over both operators' negative spectra)
double sqrt_spectrum_budget(const PotentialProfile& v, const PotentialProfile& w,
                            double extent) {
  Grid g = Grid::from_range(1.0, extent, 1e-3);
  double s = 0.0;
  for (const PotentialProfile& prof : {sum(w, v), sum(w, scaled(v, -1.0))})
    for (double lam : negative_spectrum(assemble_operator(prof, g)))
      s += std::sqrt(-lam);
  return std::sqrt(2.0) * s;
}

}  // namespace

TEST_CASE("window search concentrates on a symmetric box well") {
  PotentialProfile q = scalar_well(14.0, 16.0, -2.0);
  double bottom = lowest_eigenvalue_on(q, 6.0, 24.0, 1e-3);
  CHECK(bottom == doctest::Approx(kBoxWellSym).epsilon(2e-5));

  double gamma = std::sqrt(-bottom);
  WindowReport rep = window_search(q, 6.0, 24.0, gamma);

  // mass maximization lands on the well center up to the c-grid resolution
  CHECK(std::fabs(rep.c - 15.0) < 0.15);
  CHECK(rep.mass > 0.6);
  CHECK(rep.mass < 1.0 + 1e-9);

  // interior window of width exactly 6/gamma
  CHECK(rep.beta - rep.alpha == doctest::Approx(6.0 / gamma).epsilon(1e-12));
  CHECK(rep.alpha > 8.0);
  CHECK(rep.beta < 22.0);

  // cutoff inequality and both certificates
  CHECK(rep.rd_lhs <= rep.rd_rhs);
  CHECK(rep.rayleigh <= -gamma * gamma / 2.0);
  CHECK(rep.bottom <= -gamma * gamma / 2.0 + 1e-4 * gamma * gamma);
  CHECK(rep.bottom >= bottom - 1e-9);  // window is a subinterval of the box
}

TEST_CASE("window search with no spare width returns the whole interval") {
  // constant well tuned so the box bottom is exactly -1 and 6/gamma = b - a
  PotentialProfile q =
      scalar_well(10.0, 16.0, -(1.0 + M_PI * M_PI / 36.0));
  double bottom = lowest_eigenvalue_on(q, 10.0, 16.0, 1e-3);
  CHECK(bottom == doctest::Approx(-1.0).epsilon(1e-6));

  double gamma = std::sqrt(-bottom);
  WindowReport rep = window_search(q, 10.0, 16.0, gamma);
  CHECK(rep.alpha == doctest::Approx(10.0).epsilon(1e-5));
  CHECK(rep.beta == doctest::Approx(16.0).epsilon(1e-5));
  CHECK(rep.beta - rep.alpha == doctest::Approx(6.0 / gamma).epsilon(1e-12));

  CHECK_THROWS_WITH_AS(window_search(q, 10.0, 15.0, 1.0),
                       doctest::Contains("6/gamma"), precondition_error);
  CHECK_THROWS_WITH_AS(window_search(PotentialProfile::zero(), 10.0, 16.0, 1.0),
                       doctest::Contains("not -gamma^2"), precondition_error);
}

TEST_CASE("spectrally positive input yields the single clamped ball") {
  // gentle barrier: too weak to bind even sign-flipped against the wall
  PotentialProfile v = scalar_bump(5.0, 6.0, 0.15);
  double extent = 30.0;
  Grid g = Grid::from_range(1.0, extent, 1e-3);
  REQUIRE(negative_spectrum(assemble_operator(v, g)).empty());
  REQUIRE(negative_spectrum(assemble_operator(scaled(v, -1.0), g)).empty());

  LayerSystem sys = build_layers(v, extent, 1e-3);
  REQUIRE(sys.layers.size() == 1);
  CHECK(sys.layers[0].eps == 1e-3);  // clamped to the tolerance level
  CHECK(sys.layers[0].a == 1.0);
  CHECK(sys.layers[0].b == extent);  // 12/sqrt(tol) far exceeds the extent
  CHECK(sys.layers[0].clipped);
  CHECK(sys.eigenvalue_count == 0);
  REQUIRE(sys.history.size() == 2);
  CHECK(sys.history[0].at("kind") == "init");
  CHECK(sys.history[0].at("eps0_clamped") == true);
  CHECK(sys.history[1].at("kind") == "stop");

  LayerSystem filled = fill_gaps(sys);
  CHECK(filled.filled);
  CHECK(filled.gaps.empty());
  CHECK(geometric_violations(filled).empty());
}

TEST_CASE("distant well: swallowed by the ball or split off by depth") {
  double extent = 30.0;

  // depth 1: the level is shallow, so the ball radius 12/sqrt(eps0) already
  // covers the well and nothing else is created
  {
    PotentialProfile v = scalar_well(10.0, 11.0, -1.0);
    LayerSystem sys = build_layers(v, extent, 1e-3);
    REQUIRE(sys.layers.size() == 1);
    CHECK(sys.layers[0].eps == doctest::Approx(-kFarWell1).epsilon(2e-5));
    CHECK(sys.layers[0].b == doctest::Approx(12.0 / std::sqrt(sys.layers[0].eps))
                                 .epsilon(1e-12));
    CHECK(sys.layers[0].b > 11.0);  // ball covers the well
    CHECK_FALSE(sys.layers[0].clipped);
    CHECK(geometric_violations(sys).empty());
  }

  // depth 4: the ball stops short of the well and a second layer forms
  // around it, attached to the ball with the exact overlap unit
  {
    PotentialProfile v = scalar_well(10.0, 11.0, -4.0);
    LayerSystem sys = build_layers(v, extent, 1e-3);
    REQUIRE(sys.layers.size() == 2);
    const Layer& ball = sys.layers[0];
    const Layer& well = sys.layers[1];
    CHECK(ball.eps == doctest::Approx(-kFarWell4).epsilon(2e-5));
    CHECK(well.eps <= ball.eps);
    CHECK(well.eps > 1.4);
    CHECK(well.origin_case == 4);
    CHECK(well.a < 10.0);
    CHECK(well.b > 11.0);
    CHECK(ball.build_changes == 1);
    CHECK(overlap_width(ball, well) ==
          doctest::Approx(6.0 / std::sqrt(ball.eps)).epsilon(1e-12));
    CHECK(geometric_violations(sys).empty());

    CHECK(sqrt_level_sum(sys) <=
          sqrt_spectrum_budget(v, PotentialProfile::zero(), extent) + 1e-9);

    SpectralReport rep = spectral_report(sys);
    CHECK(rep.claim_level_margin >= -1e-6);
    CHECK(rep.window_margin >= -1e-3);
  }
}

TEST_CASE("deep twin wells build isolated layers; a corridor well merges them") {
  double extent = 35.0;
  PotentialProfile wells =
      sum(scalar_well(12.0, 13.0, -9.0), scalar_well(22.0, 23.0, -9.0));

  // without the corridor feature: ball plus two isolated layers, no restarts
  {
    LayerSystem sys = build_layers(wells, extent, 1e-3);
    REQUIRE(sys.layers.size() == 3);
    CHECK(sys.restarts == 0);
    CHECK(sys.layers[1].origin_case == 2);
    CHECK(sys.layers[2].origin_case == 2);
    CHECK(overlap_width(sys.layers[1], sys.layers[2]) < 0.0);
    CHECK(geometric_violations(sys).empty());
  }

  // a moderate well in the corridor binds between the two layers, triggers
  // the merge-and-restart action, and ends up covered by the merged pair
  {
    PotentialProfile v = sum(wells, scalar_well(16.9, 17.9, -4.0));
    LayerSystem sys = build_layers(v, extent, 1e-3);
    REQUIRE(sys.layers.size() == 3);
    CHECK(sys.restarts == 1);

    bool merged = false;
    for (const auto& rec : sys.history)
      if (rec.at("kind") == "case1") {
        merged = true;
        auto k = rec.at("k").get<std::size_t>();
        auto l = rec.at("l").get<std::size_t>();
        double lm = rec.at("L_minus").get<double>();
        double lp = rec.at("L_plus").get<double>();
        CHECK(overlap_width(sys.layers[k], sys.layers[l]) ==
              doctest::Approx(std::min(lm, lp)).epsilon(1e-12));
      }
    REQUIRE(merged);

    // corridor well sits inside the merged coverage
    auto ls = sorted_by_left(sys);
    bool covered = false;
    for (const auto& L : ls) covered = covered || (L.a <= 16.9 && L.b >= 17.9);
    CHECK(covered);
    CHECK(geometric_violations(sys).empty());

    CHECK(sqrt_level_sum(sys) <=
          sqrt_spectrum_budget(v, PotentialProfile::zero(), extent) + 1e-9);

    SpectralReport rep = spectral_report(sys);
    CHECK(rep.claim_level_margin >= -1e-6);
    CHECK(rep.window_margin >= -1e-3);

    CHECK(same_geometry(replay_history(sys), sys));
  }
}

TEST_CASE("gap filling absorbs short components and registers long ones") {
  double extent = 45.0;
  PotentialProfile v =
      sum(scalar_well(12.0, 13.0, -9.0), scalar_well(32.0, 33.0, -9.0));
  LayerSystem sys = build_layers(v, extent, 1e-3);
  REQUIRE(sys.layers.size() == 3);

  LayerSystem filled = fill_gaps(sys);
  REQUIRE(filled.filled);
  CHECK(geometric_violations(filled).empty());

  // one long corridor registered, plus the outer tail; the short piece
  // behind the ball was absorbed
  REQUIRE(filled.gaps.size() == 2);
  const GapLayer* corridor = nullptr;
  const GapLayer* tail = nullptr;
  for (const auto& gap : filled.gaps)
    (gap.right >= 0 ? corridor : tail) = &gap;
  REQUIRE(corridor != nullptr);
  REQUIRE(tail != nullptr);
  CHECK(corridor->alpha > 13.0);
  CHECK(corridor->beta < 32.0);
  CHECK(tail->beta == extent);

  // absorbed short piece: the ball and its neighbor overlap by one exact unit
  auto ls = sorted_by_left(filled);
  REQUIRE(ls.size() == 3);
  double unit0 = 6.0 / std::sqrt(ls[0].eps);
  CHECK(overlap_width(ls[0], ls[1]) == doctest::Approx(unit0).epsilon(1e-6));

  // registered-gap overlaps are exact by construction (checked by the
  // invariant sweep); coverage is complete
  for (const auto& gap : filled.gaps) {
    const Layer& left = filled.layers[static_cast<std::size_t>(gap.left)];
    CHECK(left.b - gap.alpha ==
          doctest::Approx(6.0 / std::sqrt(left.eps)).epsilon(1e-9));
  }

  SpectralReport rep = spectral_report(filled);
  CHECK(rep.claim_level_margin >= -1e-6);
  CHECK(rep.window_margin >= -1e-3);
  CHECK(rep.complement_bottom > 0.0);  // gaps here carry zero potential

  CHECK(sqrt_level_sum(filled) <=
        sqrt_spectrum_budget(v, PotentialProfile::zero(), extent) + 1e-9);

  CHECK(same_geometry(replay_history(filled), filled));
  // filling an already filled system is the identity
  CHECK(same_geometry(fill_gaps(filled), filled));
}

TEST_CASE("seeded covering corpus: invariants, claims, determinism"
          * doctest::test_suite("slow")) {
  auto corpus = layer_corpus(kCorpusSeed, 20);
  REQUIRE(corpus.size() == 20);

  long total_layers = 0, total_gaps = 0, total_restarts = 0;
  int multi_layer = 0;

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CAPTURE(i);
    const LayerScenario& s = corpus[i];

    std::vector<std::string> trace;
    LayerBuildParams params;
    params.trace = [&trace](const std::string& line) { trace.push_back(line); };

    LayerSystem sys = build_layers(s.v, s.w, s.extent, s.tol, params);
    REQUIRE(geometric_violations(sys).empty());
    CHECK_FALSE(trace.empty());

    LayerSystem filled = fill_gaps(sys);
    auto bad = geometric_violations(filled);
    if (!bad.empty()) MESSAGE("violation: ", bad.front());
    REQUIRE(bad.empty());

    // level decay is summable against the negative spectra of both operators
    CHECK(sqrt_level_sum(filled) <=
          sqrt_spectrum_budget(s.v, s.w, s.extent) + 1e-9);

    SpectralReport rep = spectral_report(filled);
    CHECK(rep.claim_level_margin >= -1e-6);
    CHECK(rep.window_margin >= -1e-3);
    CHECK(rep.complement_bottom >= -s.tol - 1e-6);

    // cutoff inequality holds at every searched window
    for (const auto& recj : filled.history)
      if (recj.at("kind") == "window" && recj.at("mode") == "search")
        CHECK(recj.at("rd_lhs").get<double>() <=
              recj.at("rd_rhs").get<double>() + 1e-9);

    // history replay reproduces the geometry bit for bit, and so does a
    // second build from the same inputs
    CHECK(same_geometry(replay_history(filled), filled));
    LayerSystem again = build_layers(s.v, s.w, s.extent, s.tol);
    CHECK(same_geometry(again, sys));

    total_layers += static_cast<long>(filled.layers.size());
    total_gaps += static_cast<long>(filled.gaps.size());
    total_restarts += filled.restarts;
    if (filled.layers.size() > 1) ++multi_layer;
  }

  MESSAGE("corpus totals: layers ", total_layers, ", gaps ", total_gaps,
          ", restarts ", total_restarts, ", multi-layer scenarios ",
          multi_layer);
  CHECK(total_layers >= 40);
  CHECK(total_gaps >= 10);
  CHECK(multi_layer >= 15);
  CHECK(total_restarts >= 1);
}
