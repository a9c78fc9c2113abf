// Dense linear-algebra kernel: SVD-backed pseudoinverse, fundamental-subspace
// bases, numeric rank, and principal/Friedrichs angles between subspaces.
//
// Subspaces are represented by matrices whose columns form an orthonormal
// basis; an n x 0 matrix is the trivial subspace {0} of an n-dimensional
// ambient space.
#pragma once

#include <algorithm>
#include <vector>

#include "sparsemap/core.hpp"

namespace sparsemap {

/// Principal cosines within this distance of 1 are treated as directions in
/// the exact intersection of the two subspaces. In double precision the
/// cosines of genuinely intersecting subspaces cluster within ~1e-12 of 1.
inline constexpr double kIntersectionTol = 1e-9;

struct SvdResult {
  Matrix left;             // m x m, orthogonal
  Vector singular_values;  // min(m,n), descending, nonnegative
  Matrix right;            // n x n, orthogonal
};

/// Full SVD A = left * diag(singular_values) * right^T.
inline SvdResult svd_factor(const Matrix& a) {
  require_finite(a, "svd_factor: matrix");
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success)
    throw FactorizationError("svd_factor: factorization did not converge");
  SvdResult out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  if (!out.left.allFinite() || !out.singular_values.allFinite() ||
      !out.right.allFinite())
    throw FactorizationError("svd_factor: non-finite factor output");
  return out;
}

/// Count of singular values above max(m,n) * eps * sigma_max.
inline int numeric_rank(const Vector& singular_values, int rows, int cols) {
  if (singular_values.size() == 0) return 0;
  double sigma_max = singular_values[0];
  if (sigma_max <= 0.0) return 0;
  double tol = std::max(rows, cols) *
               std::numeric_limits<double>::epsilon() * sigma_max;
  int rank = 0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i)
    if (singular_values[i] > tol) ++rank;
  return rank;
}

inline int numeric_rank(const Matrix& a) {
  return numeric_rank(svd_factor(a).singular_values,
                      static_cast<int>(a.rows()), static_cast<int>(a.cols()));
}

/// Moore-Penrose inverse via the SVD, reciprocating only the singular values
/// above the rank tolerance.
inline Matrix pseudoinverse(const Matrix& a) {
  SvdResult f = svd_factor(a);
  int r = numeric_rank(f.singular_values, static_cast<int>(a.rows()),
                       static_cast<int>(a.cols()));
  Matrix pinv = Matrix::Zero(a.cols(), a.rows());
  if (r > 0) {
    Vector inv_sigma = f.singular_values.head(r).cwiseInverse();
    pinv = f.right.leftCols(r) * inv_sigma.asDiagonal() *
           f.left.leftCols(r).transpose();
  }
  return pinv;
}

/// Orthonormal basis of ker A = {x : Ax = 0}; n x (n - rank).
inline Matrix kernel_basis(const Matrix& a) {
  SvdResult f = svd_factor(a);
  int r = numeric_rank(f.singular_values, static_cast<int>(a.rows()),
                       static_cast<int>(a.cols()));
  return f.right.rightCols(a.cols() - r);
}

/// Orthonormal basis of ran A^T (the row space); n x rank.
inline Matrix range_transpose_basis(const Matrix& a) {
  SvdResult f = svd_factor(a);
  int r = numeric_rank(f.singular_values, static_cast<int>(a.rows()),
                       static_cast<int>(a.cols()));
  return f.right.leftCols(r);
}

inline bool is_orthonormal(const Matrix& basis, double tol = 1e-10) {
  if (basis.cols() == 0) return true;
  Matrix gram = basis.transpose() * basis;
  return (gram - Matrix::Identity(basis.cols(), basis.cols()))
             .cwiseAbs()
             .maxCoeff() <= tol;
}

/// Cosines of the principal angles between two subspaces given by orthonormal
/// column bases: the singular values of U^T V, clamped into [0,1], descending.
/// Empty when either subspace is trivial.
inline std::vector<double> principal_angle_cosines(const Matrix& u,
                                                   const Matrix& v) {
  if (u.rows() != v.rows())
    throw DimensionError("principal_angle_cosines: ambient dimension mismatch");
  if (u.cols() == 0 || v.cols() == 0) return {};
  if (!is_orthonormal(u, 1e-8) || !is_orthonormal(v, 1e-8))
    throw std::invalid_argument("principal_angle_cosines: basis not orthonormal");
  Matrix gram = u.transpose() * v;
  Eigen::JacobiSVD<Matrix> svd(gram);
  if (svd.info() != Eigen::Success)
    throw FactorizationError("principal_angle_cosines: SVD failed");
  std::vector<double> cosines(svd.singularValues().size());
  for (std::size_t i = 0; i < cosines.size(); ++i)
    cosines[i] = std::clamp(svd.singularValues()[static_cast<Eigen::Index>(i)],
                            0.0, 1.0);
  return cosines;
}

/// Cosine of the Friedrichs angle between the subspaces spanned by u and v:
/// the largest principal cosine after removing the common intersection.
/// Returns 0 when nothing remains (one subspace contained in the other, or
/// either trivial), so the value is always strictly below 1.
inline double friedrichs_cosine(const Matrix& u, const Matrix& v) {
  std::vector<double> cosines = principal_angle_cosines(u, v);
  for (double c : cosines)
    if (c < 1.0 - kIntersectionTol) return c;
  return 0.0;
}

}  // namespace sparsemap
