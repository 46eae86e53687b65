#pragma once

#include <cstdint>
#include <vector>

#include "halflab/potential.hpp"

namespace halflab {

// Seeded corpora backing the randomized checks. Each corpus is a pure
// function of (seed, count); artifacts record the seed so every run
// reproduces the same profiles bit for bit.

// Scalar profiles for the trace-inequality sweep: box wells, C^1 bumps of
// both signs, and disjoint combinations. Supports lie inside [2,8], the sup
// norm stays <= 4, and every profile vanishes on [1,2) so the e0 hypothesis
// holds throughout.
std::vector<PotentialProfile> sum_rule_corpus(std::uint64_t seed, int count = 50);

// One ground-state decomposition scenario: a C^1 bump profile on an interval
// whose edges and bump breakpoints sit on multiples of 1/4 (so refinement
// grids h, h/2 keep nodes on the kinks). Peak heights scale with the bump
// width squared, keeping the decomposition residual below 1e-6 at h = 1e-3
// and both measured Dirichlet bottoms positive; gamma alternates between 0
// and a moderate positive draw so both estimate forms get coverage.
struct RiccatiScenario {
  PotentialProfile q;
  double a = 0.0, b = 0.0;
  double gamma = 0.0;
  double bottom_plus = 0.0;   // Dirichlet bottom of -u'' + q on [a,b]
  double bottom_minus = 0.0;  // same for -q
  int dimension = 3;
};

std::vector<RiccatiScenario> riccati_corpus(std::uint64_t seed, int count = 10);

// One covering scenario: wells of assorted depth for the plus operator and
// occasional inverted features that bind only for the minus operator, spread
// over [8, extent-18] with seeded gaps. The 18-unit outer margin keeps every
// feature's tail decay ahead of the cap-doubling stability threshold, and
// every fifth scenario carries a nonnegative base profile.
struct LayerScenario {
  PotentialProfile v;  // sign-flipped part
  PotentialProfile w;  // nonnegative base
  double extent = 40.0;
  double tol = 1e-3;
};

std::vector<LayerScenario> layer_corpus(std::uint64_t seed, int count = 20);

}  // namespace halflab
