// Geometry of the sparsity set A = {x : ||x||_0 <= s}: supports, the index
// sets C_s(x) selecting the s largest-magnitude coordinates, projections and
// distances onto/to A and its coordinate subspaces A_J, the proximal /
// limiting normal cones and the tangent cone, and the escape distance
// min{|c_j| : j in supp(c)}.
//
// A is the union of the coordinate subspaces A_J = span{e_j : j in J} over
// all index sets J of cardinality s; everything here works through that
// decomposition. Indices are 0-based internally; serialized output is 1-based.
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "sparsemap/core.hpp"
#include "sparsemap/linalg.hpp"

namespace sparsemap {

// ---------------------------------------------------------------------------
// Index sets
// ---------------------------------------------------------------------------

/// A sorted, duplicate-free subset of {0, ..., n-1}.
struct IndexSet {
  int n = 0;
  std::vector<int> members;

  IndexSet() = default;
  IndexSet(int ambient, std::vector<int> idx) : n(ambient), members(std::move(idx)) {
    if (n <= 0) throw std::invalid_argument("IndexSet: ambient dimension must be positive");
    std::sort(members.begin(), members.end());
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (members[i] < 0 || members[i] >= n)
        throw std::invalid_argument("IndexSet: index out of range");
      if (i > 0 && members[i] == members[i - 1])
        throw std::invalid_argument("IndexSet: duplicate index");
    }
  }

  int size() const { return static_cast<int>(members.size()); }

  bool contains(int i) const {
    return std::binary_search(members.begin(), members.end(), i);
  }

  bool contains_all(const IndexSet& other) const {
    return std::includes(members.begin(), members.end(),
                         other.members.begin(), other.members.end());
  }

  std::vector<int> complement() const {
    std::vector<int> out;
    out.reserve(n - size());
    for (int i = 0; i < n; ++i)
      if (!contains(i)) out.push_back(i);
    return out;
  }

  friend bool operator==(const IndexSet& a, const IndexSet& b) {
    return a.n == b.n && a.members == b.members;
  }
};

/// Problem dimensions for the sparsity set: ambient n, sparsity bound s, the
/// magnitude below which an entry counts as zero, and the cap on combinatorial
/// enumerations (support families can have binomial size).
struct SparsityConfig {
  int n;
  int s;
  double zero_tol;
  int max_enum;

  explicit SparsityConfig(int n, int s, double zero_tol = 0.0, int max_enum = 10000)
      : n(n), s(s), zero_tol(zero_tol), max_enum(max_enum) {
    if (n < 1) throw std::invalid_argument("SparsityConfig: n must be >= 1");
    if (s < 1 || s > n) throw std::invalid_argument("SparsityConfig: need 1 <= s <= n");
    if (zero_tol < 0.0) throw std::invalid_argument("SparsityConfig: zero_tol must be >= 0");
    if (max_enum < 1) throw std::invalid_argument("SparsityConfig: max_enum must be >= 1");
  }
};

inline void require_dim(const Vector& x, int n, const char* where) {
  if (x.size() != n) throw DimensionError(std::string(where) + ": dimension mismatch");
}

/// Matrix whose columns are the standard unit vectors e_j, j in members;
/// orthonormal basis of the coordinate subspace they span.
inline Matrix coordinate_basis(int n, const std::vector<int>& members) {
  Matrix basis = Matrix::Zero(n, static_cast<Eigen::Index>(members.size()));
  for (std::size_t k = 0; k < members.size(); ++k) basis(members[k], static_cast<Eigen::Index>(k)) = 1.0;
  return basis;
}

// ---------------------------------------------------------------------------
// Supports
// ---------------------------------------------------------------------------

/// I(x) = {i : |x_i| > zero_tol}.
inline IndexSet support(const Vector& x, const SparsityConfig& cfg) {
  require_dim(x, cfg.n, "support");
  std::vector<int> idx;
  for (int i = 0; i < cfg.n; ++i)
    if (std::abs(x[i]) > cfg.zero_tol) idx.push_back(i);
  return IndexSet(cfg.n, std::move(idx));
}

/// ||x||_0, the number of nonzero entries.
inline int zero_norm(const Vector& x, const SparsityConfig& cfg) {
  return support(x, cfg).size();
}

inline bool in_sparsity_set(const Vector& x, const SparsityConfig& cfg) {
  return zero_norm(x, cfg) <= cfg.s;
}

// ---------------------------------------------------------------------------
// The family C_s(x) and projections
// ---------------------------------------------------------------------------

namespace detail {

/// Indices of x ordered by (|x_i| descending, index ascending).
inline std::vector<int> magnitude_order(const Vector& x) {
  std::vector<int> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    double ma = std::abs(x[a]), mb = std::abs(x[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  });
  return order;
}

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t out = 1;
  for (int i = 1; i <= k; ++i) {
    out = out * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    if (out > (1ULL << 62)) return 1ULL << 62;  // saturate, caller only compares to a cap
  }
  return out;
}

/// All k-element subsets of `pool` (already sorted), in lexicographic order.
inline std::vector<std::vector<int>> combinations(const std::vector<int>& pool, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > static_cast<int>(pool.size())) return out;
  std::vector<int> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  const int m = static_cast<int>(pool.size());
  for (;;) {
    std::vector<int> subset(k);
    for (int i = 0; i < k; ++i) subset[i] = pool[pick[i]];
    out.push_back(std::move(subset));
    int i = k - 1;
    while (i >= 0 && pick[i] == m - k + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return out;
}

}  // namespace detail

/// The lexicographically smallest member of C_s(x): all indices whose
/// magnitude exceeds the s-th largest, completed with the lowest-indexed
/// entries at the threshold magnitude.
inline IndexSet top_s_support(const Vector& x, const SparsityConfig& cfg) {
  require_dim(x, cfg.n, "top_s_support");
  std::vector<int> order = detail::magnitude_order(x);
  std::vector<int> members(order.begin(), order.begin() + cfg.s);
  return IndexSet(cfg.n, std::move(members));
}

/// C_s(x): every J with |J| = s and min_{j in J} |x_j| >= max_{k not in J} |x_k|,
/// sorted lexicographically. When ||x||_0 = s this is exactly {I(x)}. Ties at
/// the threshold magnitude make the family combinatorial; enumeration beyond
/// cfg.max_enum raises EnumerationLimit.
inline std::vector<IndexSet> top_s_index_sets(const Vector& x, const SparsityConfig& cfg) {
  require_dim(x, cfg.n, "top_s_index_sets");
  std::vector<int> order = detail::magnitude_order(x);
  const double threshold = std::abs(x[order[cfg.s - 1]]);

  std::vector<int> mandatory, tied;
  for (int i = 0; i < cfg.n; ++i) {
    double m = std::abs(x[i]);
    if (m > threshold) mandatory.push_back(i);
    else if (m == threshold) tied.push_back(i);
  }
  const int need = cfg.s - static_cast<int>(mandatory.size());

  std::uint64_t count = detail::binomial(static_cast<int>(tied.size()), need);
  if (count > static_cast<std::uint64_t>(cfg.max_enum))
    throw EnumerationLimit("top_s_index_sets: " + std::to_string(count) +
                               " tied index sets exceed max_enum=" + std::to_string(cfg.max_enum),
                           count);

  std::vector<IndexSet> out;
  out.reserve(static_cast<std::size_t>(count));
  for (const auto& fill : detail::combinations(tied, need)) {
    std::vector<int> members = mandatory;
    members.insert(members.end(), fill.begin(), fill.end());
    out.emplace_back(cfg.n, std::move(members));
  }
  std::sort(out.begin(), out.end(),
            [](const IndexSet& a, const IndexSet& b) { return a.members < b.members; });
  return out;
}

/// P_{A_J} x: keep the coordinates in J, zero the rest.
inline Vector project_onto_AJ(const Vector& x, const IndexSet& j) {
  require_dim(x, j.n, "project_onto_AJ");
  Vector y = Vector::Zero(x.size());
  for (int i : j.members) y[i] = x[i];
  return y;
}

/// d_{A_J}(x) = sqrt(sum of |x_k|^2 over k outside J).
inline double dist_to_AJ(const Vector& x, const IndexSet& j) {
  require_dim(x, j.n, "dist_to_AJ");
  double sq = 0.0;
  for (int i = 0; i < j.n; ++i)
    if (!j.contains(i)) sq += x[i] * x[i];
  return std::sqrt(sq);
}

/// Deterministic selection from the multivalued projection P_A(x): hard
/// thresholding onto the lexicographically smallest member of C_s(x).
inline Vector project_sparse(const Vector& x, const SparsityConfig& cfg) {
  return project_onto_AJ(x, top_s_support(x, cfg));
}

/// The full multivalued projection P_A(x): one point per J in C_s(x),
/// deduplicated (distinct J can mask to the same point when threshold
/// entries are zero).
inline std::vector<Vector> project_sparse_all(const Vector& x, const SparsityConfig& cfg) {
  std::vector<Vector> out;
  for (const IndexSet& j : top_s_index_sets(x, cfg)) {
    Vector y = project_onto_AJ(x, j);
    bool dup = false;
    for (const Vector& seen : out)
      if (seen == y) { dup = true; break; }
    if (!dup) out.push_back(std::move(y));
  }
  return out;
}

/// d_A(x) = d_{A_J}(x) for any J in C_s(x).
inline double dist_to_A(const Vector& x, const SparsityConfig& cfg) {
  return dist_to_AJ(x, top_s_support(x, cfg));
}

// ---------------------------------------------------------------------------
// Projection preimages and cones
// ---------------------------------------------------------------------------

inline void require_in_A(const Vector& a, const SparsityConfig& cfg, const char* where) {
  if (!in_sparsity_set(a, cfg))
    throw InfeasiblePoint(std::string(where) + ": point has more than s nonzero entries");
}

/// Is y in P_A^{-1}(a)? At full sparsity ||a||_0 = s this holds iff y agrees
/// with a on supp(a) and every off-support magnitude of y is at most the
/// smallest on-support magnitude of a; below full sparsity only y = a.
/// Equalities are tested with tolerance 1e-12, the magnitude comparison is
/// exact.
inline bool preimage_contains(const Vector& a, const Vector& y, const SparsityConfig& cfg) {
  require_dim(a, cfg.n, "preimage_contains");
  require_dim(y, cfg.n, "preimage_contains");
  require_in_A(a, cfg, "preimage_contains");
  constexpr double eq_tol = 1e-12;
  IndexSet ia = support(a, cfg);
  if (ia.size() < cfg.s) return (y - a).cwiseAbs().maxCoeff() <= eq_tol;

  double min_on = std::numeric_limits<double>::infinity();
  for (int j : ia.members) {
    if (std::abs(y[j] - a[j]) > eq_tol) return false;
    min_on = std::min(min_on, std::abs(a[j]));
  }
  double max_off = 0.0;
  for (int k = 0; k < cfg.n; ++k)
    if (!ia.contains(k)) max_off = std::max(max_off, std::abs(y[k]));
  return max_off <= min_on;
}

/// Proximal normal cone to A at a, as an orthonormal basis of its span:
/// supp(a)^perp = span{e_k : k outside I(a)} at full sparsity, the zero cone
/// (an n x 0 basis) below it.
inline Matrix proximal_normal_AJperp(const Vector& a, const SparsityConfig& cfg) {
  require_dim(a, cfg.n, "proximal_normal_AJperp");
  require_in_A(a, cfg, "proximal_normal_AJperp");
  IndexSet ia = support(a, cfg);
  if (ia.size() < cfg.s) return Matrix::Zero(cfg.n, 0);
  return coordinate_basis(cfg.n, ia.complement());
}

namespace detail {

/// Smallest-index witness J with |J| = s, J containing `base` and avoiding
/// `avoid`; nullopt when no such J exists.
inline std::optional<IndexSet> padded_support(const IndexSet& base, const IndexSet& avoid,
                                              int n, int s) {
  std::vector<int> members = base.members;
  for (int i = 0; i < n && static_cast<int>(members.size()) < s; ++i)
    if (!base.contains(i) && !avoid.contains(i)) members.push_back(i);
  if (static_cast<int>(members.size()) != s) return std::nullopt;
  return IndexSet(n, std::move(members));
}

}  // namespace detail

/// Is u in the limiting (Mordukhovich) normal cone N_A(a)? Closed form:
/// ||u||_0 <= n - s and u vanishes on supp(a). The equivalent union form --
/// u in A_J^perp for some J of size s with I(a) inside J -- is evaluated as
/// well; the two must agree.
inline bool mordukhovich_normal_contains(const Vector& a, const Vector& u,
                                         const SparsityConfig& cfg) {
  require_dim(a, cfg.n, "mordukhovich_normal_contains");
  require_dim(u, cfg.n, "mordukhovich_normal_contains");
  require_in_A(a, cfg, "mordukhovich_normal_contains");
  IndexSet ia = support(a, cfg);
  IndexSet iu = support(u, cfg);

  bool direct = iu.size() <= cfg.n - cfg.s;
  for (int j : ia.members)
    if (std::abs(u[j]) > cfg.zero_tol) { direct = false; break; }

  bool union_form = false;
  bool disjoint = true;
  for (int j : ia.members)
    if (iu.contains(j)) { disjoint = false; break; }
  if (disjoint) {
    if (auto j = detail::padded_support(ia, iu, cfg.n, cfg.s)) {
      union_form = true;
      for (int k : iu.members)
        if (j->contains(k)) { union_form = false; break; }
    }
  }

  if (direct != union_form)
    throw std::logic_error("mordukhovich_normal_contains: characterizations disagree");
  return direct;
}

/// Is v in the tangent cone T_A(a)? Closed form: the off-support part of v
/// has at most s - ||a||_0 nonzero entries. Cross-checked against the
/// union-of-subspaces form v in A_J for some J of size s containing I(a).
inline bool tangent_cone_contains(const Vector& a, const Vector& v,
                                  const SparsityConfig& cfg) {
  require_dim(a, cfg.n, "tangent_cone_contains");
  require_dim(v, cfg.n, "tangent_cone_contains");
  require_in_A(a, cfg, "tangent_cone_contains");
  IndexSet ia = support(a, cfg);
  IndexSet iv = support(v, cfg);

  int off_support = 0;
  for (int k : iv.members)
    if (!ia.contains(k)) ++off_support;
  bool direct = off_support <= cfg.s - ia.size();

  bool union_form = false;
  std::vector<int> joint = ia.members;
  for (int k : iv.members)
    if (!ia.contains(k)) joint.push_back(k);
  if (static_cast<int>(joint.size()) <= cfg.s) {
    IndexSet base(cfg.n, std::move(joint));
    if (auto j = detail::padded_support(base, IndexSet(cfg.n, {}), cfg.n, cfg.s))
      union_form = j->contains_all(iv) && j->contains_all(ia);
  }

  if (direct != union_form)
    throw std::logic_error("tangent_cone_contains: characterizations disagree");
  return direct;
}

/// min{d_{A_J}(c) : c not in A_J, |J| = s} = min{|c_j| : j in supp(c)}, the
/// distance from c to the nearest excluded coordinate subspace. Undefined at
/// c = 0 (empty support) and at s = n (no subspace excludes c).
inline double min_escape_distance(const Vector& c, const SparsityConfig& cfg) {
  require_dim(c, cfg.n, "min_escape_distance");
  require_in_A(c, cfg, "min_escape_distance");
  if (cfg.s == cfg.n)
    throw std::invalid_argument("min_escape_distance: undefined for s = n");
  IndexSet ic = support(c, cfg);
  if (ic.size() == 0)
    throw std::invalid_argument("min_escape_distance: undefined at c = 0");
  double out = std::numeric_limits<double>::infinity();
  for (int j : ic.members) out = std::min(out, std::abs(c[j]));
  return out;
}

}  // namespace sparsemap
