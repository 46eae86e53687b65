#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace halflab {

// Error taxonomy. Every user-facing failure carries one of these prefixes so
// the CLI can map it to an exit code and tests can match on the category.
struct error : std::runtime_error {
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input: bad piece cover, wrong dimensions, unknown kinds.
struct validation_error : error {
  explicit validation_error(const std::string& m) : error("validation: " + m) {}
};

// A theorem hypothesis fails on the given data; the claim is simply not made.
struct hypothesis_error : error {
  explicit hypothesis_error(const std::string& m) : error("hypothesis: " + m) {}
};

// An operation's entry condition fails (grid too coarse, interval too narrow).
struct precondition_error : error {
  explicit precondition_error(const std::string& m) : error("precondition: " + m) {}
};

// A pipeline stage is missing something an earlier stage should have produced.
struct dependency_error : error {
  explicit dependency_error(const std::string& m) : error("dependency: " + m) {}
};

struct io_error : error {
  explicit io_error(const std::string& m) : error("io: " + m) {}
};

// Value in R ∪ {-inf}. Entropy integrals legitimately diverge when a density
// vanishes on a set of positive measure; a tagged value keeps that case
// distinct from any float and serializes as the string "-inf".
struct ExtendedReal {
  double value = 0.0;
  bool neg_inf = false;

  ExtendedReal() = default;
  ExtendedReal(double v) : value(v), neg_inf(false) {}  // NOLINT: implicit by design
  static ExtendedReal minus_infinity() { return ExtendedReal(0.0, true); }

  bool finite() const { return !neg_inf; }

  ExtendedReal operator+(const ExtendedReal& o) const {
    if (neg_inf || o.neg_inf) return minus_infinity();
    return ExtendedReal(value + o.value);
  }
  ExtendedReal operator-(double v) const {
    if (neg_inf) return minus_infinity();
    return ExtendedReal(value - v);
  }
  bool operator>=(const ExtendedReal& o) const {
    if (o.neg_inf) return true;
    if (neg_inf) return false;
    return value >= o.value;
  }

 private:
  ExtendedReal(double v, bool ni) : value(v), neg_inf(ni) {}
};

// SplitMix64: splittable generator for corpus construction. The seed is
// recorded in every artifact so corpora reproduce byte for byte.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  // uniform in [0,1), 53 bits
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // inclusive bounds
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  SplitMix64 split() { return SplitMix64(next()); }
};

// Area of the unit sphere in R^d: |S_d| = 2 pi^{d/2} / Gamma(d/2).
inline double sphere_area(int d) {
  return 2.0 * std::pow(M_PI, 0.5 * d) / std::exp(std::lgamma(0.5 * d));
}

// Fixed 17-significant-digit formatting for CSV artifacts: enough digits to
// round-trip any double, and byte-stable across runs.
inline std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace halflab
