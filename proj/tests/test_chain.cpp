#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mmw/chain.hpp"
#include "mmw/models.hpp"
#include "oracles.hpp"

using namespace mmw;

namespace {

Mod2Chain octahedron_equator(const ComplexPtr& K) { return Mod2Chain(K, 1, {0, 1, 2, 3}); }

// Vertical circle x = i/g on the torus grid.
Mod2Chain vertical_circle(const ModelPtr& T, int i) {
  const auto& K = *T->complex();
  std::vector<int> cells;
  for (int e = 0; e < K.num_cells(1); ++e)
    if (T->lattice_axes(1, e) == 2u && T->lattice_base(1, e)[0] == i) cells.push_back(e);
  return Mod2Chain(T->complex(), 1, cells);
}

}  // namespace

TEST_CASE("add is symmetric difference") {
  auto T = build_torus(1, 4);
  Mod2Chain a(T->complex(), 1, {1, 2}), b(T->complex(), 1, {2, 3});
  CHECK((a + b).cells() == std::vector<int>{1, 3});
  CHECK((a + a).empty());
  CHECK(a + Mod2Chain(T->complex(), 1) == a);
  CHECK_THROWS_AS(a + Mod2Chain(T->complex(), 2), DimensionMismatch);
  CHECK(Mod2Chain(T->complex(), 1, {5, 5, 7}).cells() == std::vector<int>{7});
}

TEST_CASE("boundary") {
  auto T = build_torus(1, 4);
  auto K = T->complex();
  CHECK(boundary(Mod2Chain::fundamental(K)).empty());
  auto sq = boundary(Mod2Chain(K, 2, {5}));
  CHECK(sq.size() == 4);
  CHECK(mass(sq) == doctest::Approx(1.0));
  CHECK_THROWS_AS(boundary(Mod2Chain(K, 0, {0})), DimensionMismatch);

  std::mt19937_64 rng(7);
  for (auto M : {build_torus(1, 5), build_torus(2, 3), build_sphere(2, 3), build_sphere(3, 2), build_octahedron()}) {
    const auto& C = M->complex();
    for (int trial = 0; trial < 1000; ++trial) {
      const int k = 2 + trial % (C->dim() - 1);
      CHECK(boundary(boundary(oracle::random_chain(C, k, rng))).empty());
    }
  }
}

TEST_CASE("mass") {
  auto O = build_octahedron();
  CHECK(mass(Mod2Chain(O->complex(), 1)) == 0.0);
  CHECK(mass(octahedron_equator(O->complex())) == doctest::Approx(4 * std::sqrt(2.0)));
  CHECK(boundary(octahedron_equator(O->complex())).empty());
  for (int g : {3, 4, 7}) CHECK(mass(vertical_circle(build_torus(1, g), 1)) == doctest::Approx(1.0));

  std::mt19937_64 rng(3);
  auto K = build_torus(2, 3)->complex();
  for (int i = 0; i < 100; ++i) {
    auto a = oracle::random_chain(K, 2, rng), b = oracle::random_chain(K, 2, rng);
    CHECK(mass(a + b) <= mass(a) + mass(b) + 1e-12);
  }
}

TEST_CASE("flat norm on the octahedron") {
  auto K = build_octahedron()->complex();
  auto eq = octahedron_equator(K);
  auto fill = flat_norm(eq);
  CHECK(fill.cost == doctest::Approx(2 * std::sqrt(3.0)));
  CHECK(fill.chain.size() == 4);
  CHECK(boundary(fill.chain) + fill.defect == eq);
  CHECK(oracle::exhaustive_flat_norm(eq).cost == doctest::Approx(2 * std::sqrt(3.0)));

  auto empty = flat_norm(Mod2Chain(K, 1));
  CHECK(empty.cost == 0.0);
  CHECK(empty.chain.empty());
  CHECK_THROWS_AS(flat_norm(Mod2Chain(K, 1, {0})), NotACycle);
}

TEST_CASE("flat norm matches exhaustive search") {
  std::mt19937_64 rng(11);
  std::vector<ModelPtr> models = {build_octahedron(), build_torus_grid({4, 5}), build_torus_grid({3, 6}),
                                  build_torus_grid({2, 2, 4})};
  for (const auto& M : models) {
    const auto& K = M->complex();
    REQUIRE(K->num_top() <= 20);
    for (int trial = 0; trial < 8; ++trial) {
      auto t = oracle::random_boundary(K, rng, 0.2 + 0.1 * trial);
      auto fill = flat_norm(t);
      auto ex = oracle::exhaustive_flat_norm(t);
      CHECK(fill.cost == doctest::Approx(ex.cost).epsilon(1e-12));
      CHECK(fill.cost <= mass(t) + 1e-12);
      CHECK(boundary(fill.chain) + fill.defect == t);
    }
  }
}

TEST_CASE("flat norm rejects essential cycles and is a metric") {
  auto T = build_torus(1, 4);
  CHECK_THROWS_AS(flat_norm(vertical_circle(T, 1)), EssentialCycle);
  auto K = build_torus(1, 6)->complex();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    auto a = oracle::random_boundary(K, rng), b = oracle::random_boundary(K, rng), c = oracle::random_boundary(K, rng);
    CHECK(flat_distance(a, b) == doctest::Approx(flat_distance(b, a)));
    CHECK(flat_distance(a, c) <= flat_distance(a, b) + flat_distance(b, c) + 1e-12);
  }
}

TEST_CASE("isoperimetric choice") {
  auto T = build_torus(1, 6);
  auto K = T->complex();
  auto s = vertical_circle(T, 2), t = vertical_circle(T, 3);
  CHECK(isoperimetric_choice(s, s).empty());
  auto strip = isoperimetric_choice(s, t);
  CHECK(strip.size() == 6);
  CHECK(boundary(strip) == s + t);
  CHECK(mass(strip) == doctest::Approx(1.0 / 6.0));
  CHECK_THROWS_AS(isoperimetric_choice(s, vertical_circle(T, 5)), FillingTie);
  CHECK_THROWS_AS(isoperimetric_choice(s, Mod2Chain(K, 1)), EssentialCycle);

  auto O = build_octahedron()->complex();
  // the equator cuts the octahedron into two congruent halves
  CHECK_THROWS_AS(isoperimetric_choice(octahedron_equator(O), Mod2Chain(O, 1)), FillingTie);
  Mod2Chain tri = boundary(Mod2Chain(O, 2, {0}));
  CHECK(isoperimetric_choice(tri, Mod2Chain(O, 1)) == Mod2Chain(O, 2, {0}));
}

TEST_CASE("restrict and slice") {
  auto T = build_torus(1, 16);
  auto K = T->complex();
  auto c = vertical_circle(T, 4);
  CHECK(restrict(c, [](const PointRef&) { return true; }) == c);
  CHECK(restrict(c, [](const PointRef&) { return false; }).empty());
  Eigen::Vector2d center(0.25, 0.5);
  auto arc = restrict(c, geodesic_ball(T, center, 0.25));
  CHECK(std::abs(mass(arc) - 0.5) <= 1.0 / 16 + 1e-12);
  CHECK(mass(arc) <= mass(c));

  auto empty = slice_radius(Mod2Chain(K, 2), center, 0.3);
  CHECK(empty.cut_mass == 0.0);

  auto full = Mod2Chain::fundamental(K);
  auto sl = slice_radius(full, center, 0.3);
  CHECK(sl.radius >= 0.15);
  CHECK(sl.radius <= 0.3);
  Region ball = ball_region(T, center, sl.radius);
  CHECK(sl.cut_mass == doctest::Approx(mass(region_boundary(K, ball))));
  CHECK(sl.mean_cut_mass <= 2.0 / 0.3 * mass(full) * 1.05);

  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    Region r(K->num_top());
    std::bernoulli_distribution coin(0.3);
    for (auto& x : r) x = coin(rng);
    auto q = Mod2Chain::from_region(K, r);
    auto s = slice_radius(q, center, 0.3);
    CHECK(s.cut_mass <= s.mean_cut_mass + 1e-12);
    CHECK(s.mean_cut_mass <= 2.0 / 0.3 * mass(q) * 1.1 + 4.0 / 16);
  }
  CHECK_THROWS_AS(slice_radius(full, center, 0.9), OutOfRange);
}
