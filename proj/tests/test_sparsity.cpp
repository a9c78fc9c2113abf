#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "sparsemap/sparsity.hpp"

using namespace sparsemap;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

std::vector<int> members_of(const IndexSet& j) { return j.members; }

Vector random_sparse(Rng& rng, int n, int nnz) {
  std::uniform_real_distribution<double> unif(0.2, 2.0);
  std::uniform_int_distribution<int> coin(0, 1);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < nnz; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[static_cast<std::size_t>(pick(rng))]);
  }
  Vector v = Vector::Zero(n);
  for (int i = 0; i < nnz; ++i) v[idx[i]] = unif(rng) * (coin(rng) ? 1.0 : -1.0);
  return v;
}

}  // namespace

TEST_CASE("config validation") {
  REQUIRE_THROWS_AS(SparsityConfig(3, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(SparsityConfig(3, 4), std::invalid_argument);
  REQUIRE_THROWS_AS(SparsityConfig(0, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(SparsityConfig(3, 1, -1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(IndexSet(3, {0, 0}), std::invalid_argument);
  REQUIRE_THROWS_AS(IndexSet(3, {3}), std::invalid_argument);
}

TEST_CASE("support and zero norm") {
  SparsityConfig cfg(3, 1);
  REQUIRE(members_of(support(vec({1, 0, 0}), cfg)) == std::vector<int>{0});
  REQUIRE(support(vec({0, 0, 0}), cfg).size() == 0);
  REQUIRE(zero_norm(vec({1, 0, 0}), cfg) == 1);
  REQUIRE(zero_norm(vec({5, -5, 5}), cfg) == 3);

  SparsityConfig with_tol(4, 2, 1e-12);
  REQUIRE(members_of(support(vec({3, 0, -2, 1e-18}), with_tol)) == std::vector<int>{0, 2});

  REQUIRE_THROWS_AS(support(vec({1, 0}), cfg), DimensionError);
}

TEST_CASE("top-s index sets") {
  SECTION("unique selection") {
    SparsityConfig cfg(3, 2);
    auto sets = top_s_index_sets(vec({3, -1, 2}), cfg);
    REQUIRE(sets.size() == 1);
    REQUIRE(members_of(sets[0]) == std::vector<int>{0, 2});
  }
  SECTION("tie produces both singletons") {
    SparsityConfig cfg(3, 1);
    auto sets = top_s_index_sets(vec({1, -1, 0}), cfg);
    REQUIRE(sets.size() == 2);
    REQUIRE(members_of(sets[0]) == std::vector<int>{0});
    REQUIRE(members_of(sets[1]) == std::vector<int>{1});
  }
  SECTION("exactly s nonzeros gives the support") {
    SparsityConfig cfg(3, 1);
    auto sets = top_s_index_sets(vec({1, 0, 0}), cfg);
    REQUIRE(sets.size() == 1);
    REQUIRE(members_of(sets[0]) == std::vector<int>{0});
  }
  SECTION("matches the defining inequality on random vectors") {
    Rng rng(101);
    std::uniform_int_distribution<int> small(-2, 2);
    for (int t = 0; t < 200; ++t) {
      int n = 2 + static_cast<int>(rng() % 5);
      Vector x(n);
      for (int i = 0; i < n; ++i) x[i] = static_cast<double>(small(rng));  // many ties
      for (int s = 1; s <= n; ++s) {
        SparsityConfig cfg(n, s);
        auto got = top_s_index_sets(x, cfg);
        auto want = oracle::top_magnitude_family(x, s);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) REQUIRE(got[i].members == want[i]);
      }
    }
  }
  SECTION("enumeration cap") {
    int n = 20;
    SparsityConfig cfg(n, 10, 0.0, 100);
    REQUIRE_THROWS_AS(top_s_index_sets(Vector::Ones(n), cfg), EnumerationLimit);
  }
}

TEST_CASE("projection onto a coordinate subspace") {
  IndexSet j(3, {0, 2});
  REQUIRE(project_onto_AJ(vec({3, -1, 2}), j) == vec({3, 0, 2}));
  IndexSet all(2, {0, 1});
  REQUIRE(project_onto_AJ(vec({1, 1}), all) == vec({1, 1}));
  IndexSet none(2, {});
  REQUIRE(project_onto_AJ(vec({1, 1}), none) == vec({0, 0}));

  REQUIRE(dist_to_AJ(vec({3, -1, 2}), j) == Catch::Approx(1.0));
  REQUIRE(dist_to_AJ(vec({3, 0, 2}), j) == 0.0);
  REQUIRE(dist_to_AJ(vec({1, 0, 0}), IndexSet(3, {1})) == Catch::Approx(1.0));

  SECTION("distance agrees with the displacement norm") {
    Rng rng(103);
    for (int t = 0; t < 100; ++t) {
      int n = 2 + static_cast<int>(rng() % 6);
      Vector x = gaussian_vector(rng, n);
      for (const auto& members : oracle::subsets_of_size(n, 1 + static_cast<int>(rng() % n))) {
        IndexSet jj(n, members);
        REQUIRE(dist_to_AJ(x, jj) ==
                Catch::Approx((x - project_onto_AJ(x, jj)).norm()).margin(1e-12));
      }
    }
  }
}

TEST_CASE("sparse projection") {
  SECTION("lexicographic tie-break") {
    SparsityConfig cfg(3, 1);
    REQUIRE(project_sparse(vec({1, -1, 0}), cfg) == vec({1, 0, 0}));
  }
  SECTION("fixed point on the set") {
    SparsityConfig cfg(3, 2);
    Vector x = vec({0, 2, 0});
    REQUIRE(project_sparse(x, cfg) == x);
  }
  SECTION("largest magnitude wins") {
    SparsityConfig cfg(3, 1);
    REQUIRE(project_sparse(vec({0.5, 0.5, 0.9}), cfg) == vec({0, 0, 0.9}));
  }
  SECTION("multivalued projection enumerates ties") {
    SparsityConfig cfg(3, 1);
    auto all = project_sparse_all(vec({1, -1, 0}), cfg);
    REQUIRE(all.size() == 2);
    REQUIRE(all[0] == vec({1, 0, 0}));
    REQUIRE(all[1] == vec({0, -1, 0}));

    SparsityConfig cfg2(3, 2);
    auto all2 = project_sparse_all(vec({2, 1, 1}), cfg2);
    REQUIRE(all2.size() == 2);
    REQUIRE(all2[0] == vec({2, 1, 0}));
    REQUIRE(all2[1] == vec({2, 0, 1}));
  }
  SECTION("points of the set project to themselves only") {
    SparsityConfig cfg(4, 2);
    Vector x = vec({0, 3, 0, 0});
    auto all = project_sparse_all(x, cfg);
    REQUIRE(all.size() == 1);
    REQUIRE(all[0] == x);
  }
  SECTION("distance to the sparsity set") {
    SparsityConfig s2(3, 2), s1(3, 1);
    REQUIRE(dist_to_A(vec({3, -1, 2}), s2) == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(dist_to_A(vec({0, 2, 0}), s2) == 0.0);
    REQUIRE(dist_to_A(vec({1, 1, 1}), s1) == Catch::Approx(std::sqrt(2.0)).margin(1e-15));
  }
  SECTION("hard-thresholding optimality against full enumeration") {
    Rng rng(107);
    for (int t = 0; t < 200; ++t) {
      int n = 2 + static_cast<int>(rng() % 9);
      Vector x = gaussian_vector(rng, n);
      for (int s = 1; s <= n; ++s) {
        SparsityConfig cfg(n, s);
        double got = (x - project_sparse(x, cfg)).norm();
        REQUIRE(got == Catch::Approx(oracle::min_masked_distance(x, s)).margin(1e-12));
        REQUIRE(dist_to_A(x, cfg) == Catch::Approx(got).margin(1e-12));
        REQUIRE(zero_norm(project_sparse(x, cfg), cfg) == std::min(zero_norm(x, cfg), s));
      }
    }
  }
}

TEST_CASE("projection preimage") {
  SparsityConfig cfg(3, 1);
  Vector a = vec({1, 0, 0});
  REQUIRE(preimage_contains(a, vec({1, 0.5, -0.9}), cfg));
  REQUIRE_FALSE(preimage_contains(a, vec({1, 1.5, 0}), cfg));

  SparsityConfig cfg2(3, 2);
  Vector b = vec({1, 0, 0});  // one nonzero < s
  REQUIRE(preimage_contains(b, b, cfg2));
  REQUIRE_FALSE(preimage_contains(b, vec({1, 0.1, 0}), cfg2));

  REQUIRE_THROWS_AS(preimage_contains(vec({1, 1, 0}), vec({1, 1, 0}), cfg), InfeasiblePoint);

  SECTION("equivalence with multivalued projection membership") {
    Rng rng(109);
    for (int t = 0; t < 300; ++t) {
      int n = 2 + static_cast<int>(rng() % 7);
      int s = 1 + static_cast<int>(rng() % n);
      SparsityConfig c(n, s);
      Vector y = gaussian_vector(rng, n);
      std::vector<Vector> projections = project_sparse_all(y, c);
      Vector a2 = (t % 2 == 0)
                      ? projections[static_cast<std::size_t>(rng()) % projections.size()]
                      : random_sparse(rng, n, 1 + static_cast<int>(rng() % s));
      bool in_preimage = preimage_contains(a2, y, c);
      bool in_projections = false;
      for (const Vector& z : project_sparse_all(y, c))
        if ((z - a2).cwiseAbs().maxCoeff() <= 1e-12) { in_projections = true; break; }
      REQUIRE(in_preimage == in_projections);
    }
  }
}

TEST_CASE("proximal normal cone basis") {
  SECTION("full sparsity: complement coordinates") {
    SparsityConfig cfg(3, 1);
    Matrix basis = proximal_normal_AJperp(vec({1, 0, 0}), cfg);
    REQUIRE(basis.cols() == 2);
    REQUIRE(basis(1, 0) == 1.0);
    REQUIRE(basis(2, 1) == 1.0);
  }
  SECTION("below full sparsity: the zero cone") {
    SparsityConfig cfg(3, 2);
    REQUIRE(proximal_normal_AJperp(vec({1, 0, 0}), cfg).cols() == 0);
  }
  SECTION("four-dimensional example") {
    SparsityConfig cfg(4, 2);
    Matrix basis = proximal_normal_AJperp(vec({0, 2, 0, 3}), cfg);
    REQUIRE(basis.cols() == 2);
    REQUIRE(basis(0, 0) == 1.0);  // e1: first off-support coordinate
    REQUIRE(basis(2, 1) == 1.0);  // e3: second off-support coordinate
  }
}

TEST_CASE("normal and tangent cone membership") {
  SECTION("worked normal-cone example") {
    SparsityConfig cfg(3, 1);
    Vector a = vec({1, 0, 0});
    REQUIRE(mordukhovich_normal_contains(a, vec({0, 5, -2}), cfg));
    REQUIRE(mordukhovich_normal_contains(a, vec({0, 0, 0}), cfg));
    SparsityConfig cfg2(3, 2);
    Vector a2 = vec({1, 1, 0});
    REQUIRE(mordukhovich_normal_contains(a2, vec({0, 0, 1}), cfg2));
    REQUIRE_FALSE(mordukhovich_normal_contains(a2, vec({1, 0, 0}), cfg2));
  }
  SECTION("tangent cone at full and partial sparsity") {
    SparsityConfig cfg(4, 2);
    Vector a = vec({1, 0, 0, 0});
    REQUIRE(tangent_cone_contains(a, vec({7, 0, 3, 0}), cfg));
    REQUIRE_FALSE(tangent_cone_contains(a, vec({7, 0, 3, 1}), cfg));
    REQUIRE(tangent_cone_contains(a, vec({0, 0, 0, 0}), cfg));

    SparsityConfig full(3, 1);
    Vector af = vec({1, 0, 0});
    REQUIRE(tangent_cone_contains(af, vec({-2, 0, 0}), full));   // support contained
    REQUIRE_FALSE(tangent_cone_contains(af, vec({0, 1, 0}), full));
  }
  SECTION("agreement with exhaustive enumeration") {
    Rng rng(113);
    for (int t = 0; t < 300; ++t) {
      int n = 2 + static_cast<int>(rng() % 7);
      int s = 1 + static_cast<int>(rng() % n);
      SparsityConfig cfg(n, s);
      Vector a = random_sparse(rng, n, 1 + static_cast<int>(rng() % s));
      Vector probe = (t % 3 == 0) ? Vector(random_sparse(rng, n, 1 + static_cast<int>(rng() % n)))
                                  : Vector(gaussian_vector(rng, n));
      REQUIRE(mordukhovich_normal_contains(a, probe, cfg) ==
              oracle::normal_cone_contains(a, probe, s));
      REQUIRE(tangent_cone_contains(a, probe, cfg) ==
              oracle::tangent_cone_contains(a, probe, s));
    }
  }
  SECTION("cones are orthogonal complements at full sparsity") {
    Rng rng(127);
    for (int t = 0; t < 50; ++t) {
      int n = 2 + static_cast<int>(rng() % 7);
      int s = 1 + static_cast<int>(rng() % n);
      SparsityConfig cfg(n, s);
      Vector a = random_sparse(rng, n, s);
      IndexSet ia = support(a, cfg);
      Matrix normal = proximal_normal_AJperp(a, cfg);          // supp(a)^perp
      Matrix tangent = coordinate_basis(n, ia.members);        // supp(a)
      REQUIRE(normal.cols() + tangent.cols() == n);
      if (normal.cols() > 0)
        REQUIRE((normal.transpose() * tangent).cwiseAbs().maxCoeff() == 0.0);
      // membership duality on probes
      Vector u = normal.cols() > 0 ? Vector(normal * gaussian_vector(rng, static_cast<int>(normal.cols())))
                                   : Vector(Vector::Zero(n));
      REQUIRE(mordukhovich_normal_contains(a, u, cfg));
      Vector v = tangent * gaussian_vector(rng, s);
      REQUIRE(tangent_cone_contains(a, v, cfg));
      REQUIRE(std::abs(u.dot(v)) == 0.0);
    }
  }
}

TEST_CASE("support arithmetic") {
  Rng rng(131);
  for (int t = 0; t < 200; ++t) {
    int n = 2 + static_cast<int>(rng() % 7);
    SparsityConfig cfg(n, n);
    Vector x = random_sparse(rng, n, 1 + static_cast<int>(rng() % n));
    Vector y = random_sparse(rng, n, 1 + static_cast<int>(rng() % n));
    IndexSet ix = support(x, cfg), iy = support(y, cfg), ixy = support(x + y, cfg);

    // union bound on the support, subadditivity of the zero norm
    for (int i : ixy.members) REQUIRE((ix.contains(i) || iy.contains(i)));
    REQUIRE(zero_norm(x + y, cfg) <= zero_norm(x, cfg) + zero_norm(y, cfg));

    // incomparable supports bound the sum from below
    bool x_in_y = iy.contains_all(ix), y_in_x = ix.contains_all(iy);
    if (!x_in_y && !y_in_x) {
      double min_x = std::numeric_limits<double>::infinity();
      double min_y = std::numeric_limits<double>::infinity();
      for (int i : ix.members) min_x = std::min(min_x, std::abs(x[i]));
      for (int i : iy.members) min_y = std::min(min_y, std::abs(y[i]));
      REQUIRE((x + y).squaredNorm() >= min_x * min_x + min_y * min_y - 1e-12);
    }
  }
}

TEST_CASE("minimum escape distance") {
  SparsityConfig cfg(3, 1);
  REQUIRE(min_escape_distance(vec({1, 0, 0}), cfg) == 1.0);
  SparsityConfig cfg4(4, 3);
  REQUIRE(min_escape_distance(vec({5, -0.2, 0, 1}), cfg4) == Catch::Approx(0.2));
  REQUIRE(min_escape_distance(vec({-7, 0, 0}), cfg) == 7.0);

  REQUIRE_THROWS_AS(min_escape_distance(vec({0, 0, 0}), cfg), std::invalid_argument);
  SparsityConfig cfg_full(3, 3);
  REQUIRE_THROWS_AS(min_escape_distance(vec({1, 0, 0}), cfg_full), std::invalid_argument);

  SECTION("matches enumeration") {
    Rng rng(137);
    for (int t = 0; t < 200; ++t) {
      int n = 2 + static_cast<int>(rng() % 7);
      int s = 1 + static_cast<int>(rng() % (n - 1));
      SparsityConfig c(n, s);
      Vector x = random_sparse(rng, n, 1 + static_cast<int>(rng() % s));
      REQUIRE(min_escape_distance(x, c) ==
              Catch::Approx(oracle::escape_distance(x, s)).margin(1e-12));
    }
  }
}
