#include <complex>

#include "doctest.h"
#include "halflab/eigensolver.hpp"
#include "halflab/spectral.hpp"
#include "oracles.hpp"

using namespace halflab;
using cd = std::complex<double>;

TEST_CASE("free density closed form emerges from the regular solution") {
  PotentialProfile q = PotentialProfile::zero();
  for (double lam : {0.5, 1.0, 3.7, 9.87, 20.0, 35.0, 50.0, 77.3}) {
    double mine = density_jost(q, lam);
    double ref = oracles::free_density(lam);
    CHECK(mine == doctest::Approx(ref).epsilon(1e-9));
  }
  CHECK(free_density(M_PI * M_PI) ==
        doctest::Approx(oracles::kFreeDensityAtPiSq).epsilon(1e-14));
}

TEST_CASE("scalar jost formula agrees with the outgoing solve at real lambda") {
  PotentialProfile q = sum(scalar_well(2.0, 3.0, -2.5), scalar_bump(3.0, 5.0, 1.5));
  for (double lam : {0.6, 2.0, 7.3, 19.0, 42.0}) {
    double a = jost_sample(q, lam).density;
    double b = stieltjes_continuum(q, cd(lam, 0.0)).imag() / M_PI;
    CHECK(a == doctest::Approx(b).epsilon(1e-8));
    CHECK(a > 0.0);
  }
}

TEST_CASE("diagonal matrix channel reduces to the scalar density") {
  ordered_json doc{{"channel_dim", 2},
                   {"support_end", "3"},
                   {"pieces", ordered_json::array({ordered_json{
                                  {"from", "1"},
                                  {"to", "3"},
                                  {"kind", "const"},
                                  {"coeffs", ordered_json::array({ordered_json::array(
                                                 {ordered_json::array({"-2", "0"}),
                                                  ordered_json::array({"0", "5"})})})}}})}};
  PotentialProfile m2 = PotentialProfile::from_json(doc);
  PotentialProfile s = scalar_well(1.0, 3.0, -2.0);
  for (double lam : {0.8, 3.0, 11.0}) {
    CHECK(density_jost(m2, lam) == doctest::Approx(density_jost(s, lam)).epsilon(1e-8));
  }
}

TEST_CASE("resolvent limit converges at first order and extrapolates") {
  PotentialProfile q = PotentialProfile::zero();
  const double lam = M_PI * M_PI;
  const double exact = oracles::kFreeDensityAtPiSq;
  double e1 = stieltjes_continuum(q, cd(lam, 1e-2)).imag() / M_PI - exact;
  double e2 = stieltjes_continuum(q, cd(lam, 1e-3)).imag() / M_PI - exact;
  double e3 = stieltjes_continuum(q, cd(lam, 1e-4)).imag() / M_PI - exact;
  CHECK(e1 / e2 == doctest::Approx(10.0).epsilon(0.15));  // O(eps) smoothing bias
  CHECK(e2 / e3 == doctest::Approx(10.0).epsilon(0.15));
  CHECK(std::fabs(density_resolvent_limit(q, lam) - exact) < 1e-6 * exact);
}

TEST_CASE("both density routes match the closed form at awkward points") {
  // lambda = 50 sits where the free density is ~8e-5; lambda = 37.5 is close
  // to the excluded window around 4 pi^2.
  PotentialProfile q = PotentialProfile::zero();
  for (double lam : {0.5, 12.0, 25.0, 37.5, 41.5, 50.0}) {
    double ref = oracles::free_density(lam);
    CHECK(std::fabs(density_jost(q, lam) - ref) < 1e-6 * ref);
    CHECK(std::fabs(density_resolvent_limit(q, lam) - ref) < 1e-6 * ref);
  }
}

TEST_CASE("continuum stieltjes hits the closed form at z=i") {
  cd m = stieltjes_continuum(PotentialProfile::zero(), cd(0.0, 1.0));
  CHECK(std::abs(m - oracles::free_stieltjes_at_i()) < 1e-9);
}

TEST_CASE("continuum and discrete stieltjes agree within the grid budget") {
  PotentialProfile q = scalar_well(2.0, 3.0, -4.0);
  Grid g = Grid::from_range(1.0, 50.0, 1e-3);
  DiscreteOperator op = assemble_operator(q, g);
  for (cd z : {cd(0.0, 1.0), cd(1.0, 1.0), cd(10.0, 1.0)}) {
    cd cont = stieltjes_continuum(q, z);
    cd disc = stieltjes(op, z);
    CHECK(std::abs(cont - disc) < 2e-3);
    CHECK(cont.imag() > 0.0);
  }
}

TEST_CASE("density mass never exceeds the norm of f") {
  PotentialProfile q = scalar_well(2.0, 4.0, -3.0);
  auto grid = default_lambda_grid(800);
  SpectralDensity d = density_jost(q, grid);
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    mass += 0.5 * (d.density[i] + d.density[i + 1]) * (grid[i + 1] - grid[i]);
  CHECK(mass < 1.0);
  CHECK(mass > 0.5);  // most of it is below lambda = 100
  for (double v : d.density) CHECK(v >= 0.0);
}

TEST_CASE("discrete resolvent limit shows eigenvalues as lorentzian bumps") {
  PotentialProfile q = scalar_well(1.0, 2.0, -4.0);
  Grid g = Grid::from_range(1.0, 40.0, 2e-3);
  DiscreteOperator op = assemble_operator(q, g);
  auto spec = negative_spectrum(op);
  REQUIRE(spec.size() == 1);
  const double eps = 5e-3;
  std::vector<double> grid;
  for (double x = spec[0] - 0.05; x <= spec[0] + 0.05; x += 1e-3) grid.push_back(x);
  SpectralDensity d = density_resolvent_limit(op, grid, eps);
  std::size_t peak = 0;
  for (std::size_t i = 0; i < d.density.size(); ++i)
    if (d.density[i] > d.density[peak]) peak = i;
  CHECK(std::fabs(grid[peak] - spec[0]) < 2e-3);
  // Lorentzian height ~ mass/(pi eps), mass <= 1
  CHECK(d.density[peak] > 1.0);
  CHECK(d.density[peak] <= 1.0 / (M_PI * eps) + 1.0);
  CHECK(d.to_json()["epsilon"] == eps);
  CHECK(d.to_json()["method"] == "resolvent-limit");
}

TEST_CASE("spectral density serialization carries the contract fields") {
  PotentialProfile q = PotentialProfile::zero();
  SpectralDensity d = density_jost(q, {1.0, 2.0});
  ordered_json j = d.to_json();
  CHECK(j["method"] == "jost-exact");
  CHECK(!j.contains("epsilon"));
  CHECK(j["lambda_grid"].size() == 2);
  CHECK(j["density"].size() == 2);
}

TEST_CASE("default lambda grid brackets the free-density zero") {
  auto grid = default_lambda_grid(500);
  CHECK(grid.front() == doctest::Approx(0.05));
  CHECK(grid.back() == doctest::Approx(100.0));
  double z = 4.0 * M_PI * M_PI;
  bool close = false;
  for (double x : grid)
    if (std::fabs(x - z) < 0.011) close = true;
  CHECK(close);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) CHECK(grid[i] < grid[i + 1]);
}
