// The affine constraint set B = {x : Mx = p}: construction with cached
// pseudoinverse and fundamental-subspace bases, exact projection, membership.
#pragma once

#include "sparsemap/core.hpp"
#include "sparsemap/linalg.hpp"

namespace sparsemap {

/// B = {x : Mx = p} with everything the projector and the angle computations
/// need, factored once: M^+, orthonormal bases of ker M (the parallel space)
/// and ran M^T (the normal space), the numeric rank, and one solution M^+ p.
/// Immutable after build; all operations on it are read-only.
struct AffineSet {
  Matrix m;
  Vector p;
  Matrix pinv;       // n x m
  Matrix kernel;     // n x (n - rank), orthonormal columns
  Matrix row_space;  // n x rank, orthonormal columns
  int rank = 0;
  Vector anchor;     // min-norm solution M^+ p

  int ambient_dim() const { return static_cast<int>(m.cols()); }
};

/// Relative consistency tolerance: p must lie in ran M to within
/// tol * max(1, ||p||).
inline constexpr double kAffineTol = 1e-8;

inline AffineSet build_affine(const Matrix& m, const Vector& p) {
  require_finite(m, "build_affine: M");
  require_finite(p, "build_affine: p");
  if (m.rows() != p.size())
    throw DimensionError("build_affine: M row count does not match p length");

  SvdResult f = svd_factor(m);
  AffineSet b;
  b.m = m;
  b.p = p;
  b.rank = numeric_rank(f.singular_values, static_cast<int>(m.rows()),
                        static_cast<int>(m.cols()));
  Matrix pinv = Matrix::Zero(m.cols(), m.rows());
  if (b.rank > 0) {
    Vector inv_sigma = f.singular_values.head(b.rank).cwiseInverse();
    pinv = f.right.leftCols(b.rank) * inv_sigma.asDiagonal() *
           f.left.leftCols(b.rank).transpose();
  }
  b.pinv = std::move(pinv);
  b.kernel = f.right.rightCols(m.cols() - b.rank);
  b.row_space = f.right.leftCols(b.rank);
  b.anchor = b.pinv * p;

  if ((m * b.anchor - p).norm() > kAffineTol * std::max(1.0, p.norm()))
    throw InconsistentSystem("build_affine: inconsistent system, p is not in the range of M");
  return b;
}

/// P_B x = x - M^+ (Mx - p), the nearest point of B.
inline Vector project_affine(const AffineSet& b, const Vector& x) {
  if (x.size() != b.m.cols())
    throw DimensionError("project_affine: dimension mismatch");
  return x - b.pinv * (b.m * x - b.p);
}

inline bool affine_contains(const AffineSet& b, const Vector& x, double tol = kAffineTol) {
  if (x.size() != b.m.cols())
    throw DimensionError("affine_contains: dimension mismatch");
  return (b.m * x - b.p).norm() <= tol * std::max(1.0, b.p.norm());
}

}  // namespace sparsemap
