// A-priori certification of local linear convergence for alternating
// projections between the sparsity set A and the affine set B.
//
// For a solution c in A cap B the certificate collects:
//   theta_bar    = max{ c(A_J, B) : supp(c) in J, |J| = s }, the largest
//                  Friedrichs-angle cosine between an active coordinate
//                  subspace and (the parallel space of) B; always < 1.
//   delta_bar    = min{|c_j| : j in supp(c)} / 3, the radius within which A
//                  locally coincides with the coordinate subspaces through c.
//   basin_radius = (1 - theta_bar) * delta / (6 (2 - theta_bar)) for a chosen
//                  delta in (0, delta_bar]: starting the iteration inside this
//                  ball guarantees linear convergence to a point of A cap B
//                  within delta of c, with rate theta_bar^2 per iteration.
// Also provided: the classical diagnostics that fail for this problem
// (transversality, Mordukhovich constraint qualification) and a seeded
// Monte-Carlo estimator of the restricted-normal-cone CQ-number that
// theta_bar certifies.
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "sparsemap/affine.hpp"
#include "sparsemap/solver.hpp"
#include "sparsemap/sparsity.hpp"

namespace sparsemap {

// ---------------------------------------------------------------------------
// Support enumeration
// ---------------------------------------------------------------------------

/// All J with |J| = s and base within J, lexicographically ordered. Their
/// number is C(n - |base|, s - |base|); beyond max_enum an EnumerationLimit
/// carrying the count is thrown so callers can raise the cap deliberately.
inline std::vector<IndexSet> supports_containing(const IndexSet& base, int n, int s,
                                                 int max_enum) {
  if (base.size() > s)
    throw InfeasiblePoint("supports_containing: support already larger than s");
  std::vector<int> free = base.complement();
  std::uint64_t count = detail::binomial(static_cast<int>(free.size()), s - base.size());
  if (count > static_cast<std::uint64_t>(max_enum))
    throw EnumerationLimit("supports_containing: " + std::to_string(count) +
                               " supports exceed max_enum=" + std::to_string(max_enum),
                           count);
  std::vector<IndexSet> out;
  out.reserve(static_cast<std::size_t>(count));
  for (const auto& fill : detail::combinations(free, s - base.size())) {
    std::vector<int> members = base.members;
    members.insert(members.end(), fill.begin(), fill.end());
    out.emplace_back(n, std::move(members));
  }
  std::sort(out.begin(), out.end(),
            [](const IndexSet& a, const IndexSet& b) { return a.members < b.members; });
  return out;
}

// ---------------------------------------------------------------------------
// Friedrichs angles per support and the joint-CQ number
// ---------------------------------------------------------------------------

/// c(A_J, B): the Friedrichs-angle cosine between the coordinate subspace
/// A_J and the affine set B, which reduces to the angle between A_J and the
/// parallel subspace ker M. Strictly below 1.
inline double friedrichs_AJ_B(const IndexSet& j, const AffineSet& b) {
  if (j.n != b.ambient_dim())
    throw DimensionError("friedrichs_AJ_B: ambient dimension mismatch");
  return friedrichs_cosine(coordinate_basis(j.n, j.members), b.kernel);
}

struct SupportAngle {
  IndexSet j;
  double cosine = 0.0;
};

struct ThetaBar {
  double value = 0.0;
  std::vector<SupportAngle> per_support;
};

inline void require_in_intersection(const Vector& c, const SparsityConfig& cfg,
                                    const AffineSet& b, const char* where) {
  require_dim(c, cfg.n, where);
  if (!in_sparsity_set(c, cfg))
    throw InfeasiblePoint(std::string(where) + ": point is not s-sparse");
  if (!affine_contains(b, c))
    throw InfeasiblePoint(std::string(where) + ": point does not satisfy Mx = p");
}

/// theta_bar at c: the maximum of c(A_J, B) over every size-s support J
/// containing supp(c), together with the full per-support list.
inline ThetaBar theta_bar(const Vector& c, const SparsityConfig& cfg, const AffineSet& b) {
  require_in_intersection(c, cfg, b, "theta_bar");
  ThetaBar out;
  for (IndexSet& j : supports_containing(support(c, cfg), cfg.n, cfg.s, cfg.max_enum)) {
    double cosine = friedrichs_AJ_B(j, b);
    out.value = std::max(out.value, cosine);
    out.per_support.push_back(SupportAngle{std::move(j), cosine});
  }
  return out;
}

/// delta_bar = min{|c_j| : j in supp(c)} / 3. Requires c != 0 and s <= n-1.
inline double delta_bar(const Vector& c, const SparsityConfig& cfg) {
  return min_escape_distance(c, cfg) / 3.0;
}

// ---------------------------------------------------------------------------
// Classical diagnostics
// ---------------------------------------------------------------------------

/// Transversality T_A(c) + T_B(c) = R^n, equivalent to some active A_J
/// satisfying A_J + ker M = R^n. Fails outright when s < rank(M), which is a
/// necessary condition and serves as the fast reject.
inline bool check_transversality(const Vector& c, const SparsityConfig& cfg,
                                 const AffineSet& b) {
  require_in_intersection(c, cfg, b, "check_transversality");
  if (cfg.s < b.rank) return false;
  for (const IndexSet& j : supports_containing(support(c, cfg), cfg.n, cfg.s, cfg.max_enum)) {
    Matrix stacked(cfg.n, static_cast<Eigen::Index>(cfg.s) + b.kernel.cols());
    stacked << coordinate_basis(cfg.n, j.members), b.kernel;
    if (numeric_rank(stacked) == cfg.n) return true;
  }
  return false;
}

struct NormalIntersection {
  int dim = 0;
  Matrix basis;  // n x dim, orthonormal directions common to A_J^perp and ran M^T
};

/// Directions shared by A_J^perp and ran M^T (principal cosines at 1): the
/// witness of a classical-CQ failure at supports J.
inline NormalIntersection normal_intersection_witness(const IndexSet& j, const AffineSet& b) {
  if (j.n != b.ambient_dim())
    throw DimensionError("normal_intersection_witness: ambient dimension mismatch");
  Matrix perp = coordinate_basis(j.n, j.complement());
  NormalIntersection out;
  out.basis = Matrix::Zero(j.n, 0);
  if (perp.cols() == 0 || b.row_space.cols() == 0) return out;
  Matrix gram = perp.transpose() * b.row_space;
  Eigen::JacobiSVD<Matrix> svd(gram, Eigen::ComputeFullU);
  int dim = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] >= 1.0 - kIntersectionTol) ++dim;
  out.dim = dim;
  if (dim > 0) out.basis = perp * svd.matrixU().leftCols(dim);
  return out;
}

/// Classical Mordukhovich constraint qualification
/// N_A(c) cap (-N_B(c)) = {0}. Since N_B(c) = ran M^T is a subspace, this
/// holds iff every active A_J^perp meets ran M^T only at the origin.
inline bool check_classical_cq(const Vector& c, const SparsityConfig& cfg,
                               const AffineSet& b) {
  require_in_intersection(c, cfg, b, "check_classical_cq");
  for (const IndexSet& j : supports_containing(support(c, cfg), cfg.n, cfg.s, cfg.max_enum))
    if (normal_intersection_witness(j, b).dim > 0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Certificate
// ---------------------------------------------------------------------------

struct Certificate {
  Vector c;
  double theta_bar = 0.0;
  double delta_bar = 0.0;
  double delta = 0.0;
  double basin_radius = 0.0;
  double rate_bound = 0.0;  // theta_bar^2
  std::vector<SupportAngle> per_support;
  bool transversal = false;
  bool classical_cq_holds = false;
  int enumerated_supports = 0;
};

/// Assembles the convergence certificate at a feasible point c. The chosen
/// delta defaults to delta_bar * (1 - 1e-6); a caller-supplied delta must lie
/// in (0, delta_bar] (the closed right endpoint reproduces the worked
/// numerics, where the ball is quoted at delta = delta_bar exactly).
inline Certificate certify(const Vector& c, const SparsityConfig& cfg, const AffineSet& b,
                           std::optional<double> delta = std::nullopt) {
  require_in_intersection(c, cfg, b, "certify");

  Certificate cert;
  cert.c = c;
  cert.delta_bar = delta_bar(c, cfg);
  if (delta) {
    if (!(*delta > 0.0) || *delta > cert.delta_bar * (1.0 + 1e-12))
      throw std::invalid_argument("certify: delta must lie in (0, delta_bar]");
    cert.delta = *delta;
  } else {
    cert.delta = cert.delta_bar * (1.0 - 1e-6);
  }

  ThetaBar theta = theta_bar(c, cfg, b);
  cert.theta_bar = theta.value;
  cert.per_support = std::move(theta.per_support);
  cert.enumerated_supports = static_cast<int>(cert.per_support.size());
  cert.rate_bound = cert.theta_bar * cert.theta_bar;
  cert.basin_radius =
      (1.0 - cert.theta_bar) * cert.delta / (6.0 * (2.0 - cert.theta_bar));
  cert.transversal = check_transversality(c, cfg, b);
  cert.classical_cq_holds = check_classical_cq(c, cfg, b);
  return cert;
}

// ---------------------------------------------------------------------------
// Empirical CQ-number (restricted proximal normal cones)
// ---------------------------------------------------------------------------

/// Seeded Monte-Carlo lower bound on the CQ-number theta_delta at c for the
/// coordinate-subspace decomposition of A restricted by itself (and likewise
/// B): the supremum of <u, v> over
///   u in cone( (B cap P_{A_J}^{-1} a) - a ),  a in A_J, ||a - c|| <= delta,
///   v in -cone( (A_J cap P_B^{-1} b) - b ),   b in B,   ||b - c|| <= delta,
/// unit u and v (zero allowed, so the estimate is floored at 0), over every
/// size-s support J containing supp(c).
///
/// The restricted proximal normals are generated the way the cones are
/// defined: a point y of B gives the pair a = P_{A_J} y, u || y - a, and a
/// point x of A_J gives b = P_B x, v || -(x - b). Both projections are
/// nonexpansive and fix c, so sampling y and x inside ball(c, delta) keeps a
/// and b inside it too. Expanding in principal vectors shows every score is
/// at most the Friedrichs cosine c(A_J, B) -- intersection directions cancel
/// in the projection differences -- with equality at matched principal pairs,
/// so the estimate approaches theta_bar from below. Deterministic per seed.
inline double estimate_cq_number_empirical(const Vector& c, const SparsityConfig& cfg,
                                           const AffineSet& b, double delta,
                                           int n_samples, std::uint64_t rng_seed) {
  require_in_intersection(c, cfg, b, "estimate_cq_number_empirical");
  if (!(delta > 0.0))
    throw std::invalid_argument("estimate_cq_number_empirical: delta must be > 0");
  if (n_samples < 1)
    throw std::invalid_argument("estimate_cq_number_empirical: n_samples must be >= 1");

  const int n = cfg.n;
  std::vector<IndexSet> supports =
      supports_containing(support(c, cfg), n, cfg.s, cfg.max_enum);
  std::vector<Matrix> aj_bases;
  aj_bases.reserve(supports.size());
  for (const IndexSet& j : supports) aj_bases.push_back(coordinate_basis(n, j.members));

  const Eigen::Index k_cols = b.kernel.cols();
  Rng rng(rng_seed);
  double best = 0.0;  // the defining sup admits u = v = 0
  for (int i = 0; i < n_samples; ++i) {
    const std::size_t which = static_cast<std::size_t>(i) % supports.size();
    const IndexSet& j = supports[which];
    const Matrix& e_j = aj_bases[which];

    // u-direction: y in B cap ball(c, delta), a = P_{A_J} y.
    Vector u = Vector::Zero(n);
    if (k_cols > 0) {
      Vector y = c + b.kernel * random_in_ball(rng, static_cast<int>(k_cols), delta);
      Vector d = y - project_onto_AJ(y, j);
      if (d.norm() > 1e-14) u = d / d.norm();
    }

    // v-direction: x in A_J cap ball(c, delta), b_pt = P_B x.
    Vector x = c + e_j * random_in_ball(rng, j.size(), delta);
    Vector d = x - project_affine(b, x);
    Vector v = Vector::Zero(n);
    if (d.norm() > 1e-14) v = -d / d.norm();

    best = std::max(best, u.dot(v));
  }
  return best;
}

/// CQ-number of two distinct lines R w_a and R w_b through the origin:
/// |<w_a, w_b>|, verified against the Friedrichs-angle computation.
inline double two_lines_cq(const Vector& w_a, const Vector& w_b) {
  if (w_a.size() != w_b.size()) throw DimensionError("two_lines_cq: dimension mismatch");
  if (std::abs(w_a.norm() - 1.0) > 1e-10 || std::abs(w_b.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("two_lines_cq: vectors must be unit");
  double cosine = std::abs(w_a.dot(w_b));
  if (cosine >= 1.0 - kIntersectionTol)
    throw std::invalid_argument("two_lines_cq: lines must be distinct");
  double via_friedrichs = friedrichs_cosine(w_a, w_b);
  if (std::abs(cosine - via_friedrichs) > 1e-10)
    throw std::logic_error("two_lines_cq: disagreement with the Friedrichs computation");
  return cosine;
}

}  // namespace sparsemap
