#pragma once

#include <functional>
#include <string>
#include <vector>

#include "halflab/common.hpp"
#include "halflab/potential.hpp"

namespace halflab {

// Interval machinery for covering the radial line by overlapping layers whose
// widths are tied to the local depth of the negative spectrum. Two operators
// are tracked throughout: plus = -d^2/dr^2 + w + v and minus = -d^2/dr^2 + w - v,
// both Dirichlet. A layer records the level eps it was created at, the
// certifying window inside it, and which operator sign produced the level.

// Mass-concentration window: inside [a, b], where the lowest Dirichlet
// eigenvalue of q is -gamma^2, find a subinterval of width exactly 6/gamma on
// which the lowest eigenvalue is still <= -gamma^2/2. The search maximizes the
// ground-state mass over centers c on a grid of spacing 1/(10 gamma), builds
// the trapezoid cutoff (1 inside |r-c|<L, 0 outside 3L, linear between,
// L = 1/gamma), and certifies the returned window by a direct eigensolve.
struct WindowReport {
  double alpha = 0.0, beta = 0.0;  // returned window
  double c = 0.0;                  // mass-maximizing center
  double gamma = 0.0;
  double mass = 0.0;      // ground-state mass in |r-c| < L
  double rd_lhs = 0.0;    // int phi'^2 psi^2
  double rd_rhs = 0.0;    // (gamma^2/2) int (phi psi)^2
  double rayleigh = 0.0;  // quotient of phi*psi, an upper bound certificate
  double bottom = 0.0;    // lowest eigenvalue on [alpha, beta]
  ordered_json to_json() const;
};

WindowReport window_search(const PotentialProfile& q, double a, double b,
                           double gamma, double h = 1e-3);

struct Layer {
  double a = 0.0, b = 0.0;
  double eps = 0.0;                    // level at creation
  double omega_a = 0.0, omega_b = 0.0; // certifying window
  int sign = +1;                       // operator that produced the level
  int origin_case = 0;                 // 0 initial ball, else 2..4
  int build_changes = 0;               // enlargements during the build (<= 2)
  int fill_changes = 0;                // enlargements during gap filling (<= 2)
  bool clipped = false;                // truncated at the outer extent
  ordered_json to_json() const;
};

// A complement component kept after gap filling. Geometry is the original
// component; the neighbors were each extended 6 eps^{-1/2} into it, so the
// overlap widths are exact by construction. right == -1 marks the outer tail.
struct GapLayer {
  double alpha = 0.0, beta = 0.0;
  int left = -1, right = -1;
  ordered_json to_json() const;
};

struct LayerBuildParams {
  double h = 1e-3;
  int cap_factor = 10;  // iteration cap = cap_factor * max(1, #negative eigenvalues)
  std::function<void(const std::string&)> trace;  // optional case-decision stream
};

struct LayerSystem {
  PotentialProfile v = PotentialProfile::zero();
  PotentialProfile w = PotentialProfile::zero();
  double extent = 0.0;
  double tol = 0.0;
  double grid_h = 1e-3;
  std::vector<Layer> layers;  // creation order; layers[0] is the initial ball
  std::vector<GapLayer> gaps;
  bool filled = false;
  int restarts = 0;
  long eigenvalue_count = 0;  // negative eigenvalues of both signs on the extent
  std::vector<ordered_json> history;  // append-only; post-state record per mutation
  ordered_json to_json() const;
};

// Inductive construction. Starting from the initial ball at the level of the
// deepest eigenvalue, repeatedly measure the lowest eigenvalue of both
// operators on the uncovered set, certify a window at that level, and commit
// one of four case actions (merge-and-restart, isolated, bridging, one-sided
// attach). Stops when the uncovered set is spectrally above -tol_eps.
LayerSystem build_layers(const PotentialProfile& v, const PotentialProfile& w,
                         double extent, double tol_eps,
                         const LayerBuildParams& params = {});
LayerSystem build_layers(const PotentialProfile& v, double extent,
                         double tol_eps, const LayerBuildParams& params = {});

// Complement handling: short components are absorbed by the neighbor with the
// smaller level (the other neighbor receives its exact overlap piece); long
// components are registered as gap layers with both neighbors extended by
// exactly 6 eps^{-1/2}. Afterwards layers and gaps cover [1, extent].
LayerSystem fill_gaps(const LayerSystem& sys, const LayerBuildParams& params = {});

// Pure-geometry invariant sweep (no eigensolves); returns human-readable
// violations, empty when the system is consistent. Checked internally after
// every mutation; public so tests can assert on final systems directly.
std::vector<std::string> geometric_violations(const LayerSystem& sys);

// Eigensolve-backed claims on a finished system: layer bottoms against their
// levels, prefix-complement bottoms, window certificates, and positivity of
// the final complement (registered gaps included).
struct SpectralReport {
  double claim_level_margin = 0.0;   // min over layers/prefixes of bottom + eps_n
  double window_margin = 0.0;        // min over n>=1 of -eps_n/2 - bottom(omega_n)
  double complement_bottom = 0.0;    // min bottom over uncovered/gap components
  ordered_json details;
  ordered_json to_json() const;
};
SpectralReport spectral_report(const LayerSystem& sys);

// Rebuild the geometry purely from the history records; bit-exact equality
// with the builder's output is the determinism check.
LayerSystem replay_history(const LayerSystem& sys);
bool same_geometry(const LayerSystem& x, const LayerSystem& y);

}  // namespace halflab
