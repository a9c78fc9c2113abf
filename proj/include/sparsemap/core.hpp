// Shared numeric substrate: matrix/vector aliases, error types, seeded sampling.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace sparsemap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Shape of an argument does not match the ambient problem dimensions.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The linear system Mx = p has no solution (p outside the range of M).
class InconsistentSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point that must lie in a given set (or intersection) does not.
class InfeasiblePoint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A combinatorial enumeration would exceed the configured cap.
class EnumerationLimit : public std::runtime_error {
 public:
  EnumerationLimit(const std::string& what, std::uint64_t count)
      : std::runtime_error(what), count(count) {}
  std::uint64_t count;
};

/// A dense factorization failed to produce finite, converged output.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Finiteness guards: NaN/Inf are rejected at every construction boundary.
// ---------------------------------------------------------------------------

inline void require_finite(const Matrix& a, const char* name) {
  if (!a.allFinite())
    throw std::invalid_argument(std::string(name) + ": non-finite entries");
}

inline void require_finite(const Vector& v, const char* name) {
  if (!v.allFinite())
    throw std::invalid_argument(std::string(name) + ": non-finite entries");
}

// ---------------------------------------------------------------------------
// Seeded sampling. All randomized code paths take an explicit engine (or a
// seed) so that every run is reproducible bit for bit.
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a base seed and a salt
/// (splitmix64 finalizer).
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Vector gaussian_vector(Rng& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  return v;
}

/// Uniform direction on the unit sphere of R^dim.
inline Vector random_unit(Rng& rng, int dim) {
  for (;;) {
    Vector g = gaussian_vector(rng, dim);
    double nrm = g.norm();
    if (nrm > 1e-12) return g / nrm;
  }
}

/// Uniform sample from the closed ball of the given radius in R^dim.
inline Vector random_in_ball(Rng& rng, int dim, double radius) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double r = radius * std::pow(unif(rng), 1.0 / static_cast<double>(dim));
  return r * random_unit(rng, dim);
}

}  // namespace sparsemap
