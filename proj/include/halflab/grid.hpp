#pragma once

#include <cmath>

#include "halflab/common.hpp"

namespace halflab {

// Uniform finite-difference grid on [r_min, r_min + N h] with Dirichlet data
// at both ends; unknowns live at interior nodes i = 1..N-1.
struct Grid {
  double r_min = 1.0;
  double h = 1e-3;
  long N = 0;

  static Grid from_range(double r_min, double r_max, double h, long min_intervals = 16) {
    if (!(h > 0.0)) throw precondition_error("grid spacing must be positive");
    if (!(r_max > r_min))
      throw precondition_error("grid range [" + format17(r_min) + ", " + format17(r_max) +
                               "] is empty");
    Grid g;
    g.r_min = r_min;
    g.h = h;
    g.N = std::lround((r_max - r_min) / h);
    if (g.N < min_intervals)
      throw precondition_error("grid too coarse: [" + format17(r_min) + ", " +
                               format17(r_max) + "] at h=" + format17(h) + " gives " +
                               std::to_string(g.N) + " intervals, need at least " +
                               std::to_string(min_intervals));
    return g;
  }

  long interior_count() const { return N - 1; }
  double node(long i) const { return r_min + static_cast<double>(i) * h; }
  double r_max() const { return node(N); }
};

}  // namespace halflab
