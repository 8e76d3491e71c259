#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mmw/models.hpp"

using namespace mmw;
using std::numbers::pi;

TEST_CASE("torus counts and volume") {
  auto T = build_torus(1, 4);
  const auto& K = *T->complex();
  CHECK(K.num_cells(2) == 16);
  CHECK(K.num_cells(1) == 32);
  CHECK(K.num_cells(0) == 16);
  CHECK(K.total_volume() == doctest::Approx(1.0));
  auto T3 = build_torus(2, 3);
  CHECK(T3->complex()->num_cells(3) == 27);
  CHECK(T3->complex()->num_cells(2) == 81);
  CHECK(T3->complex()->total_volume() == doctest::Approx(1.0));
  CHECK_THROWS_AS(build_torus(3, 4), OutOfRange);
  CHECK_THROWS_AS(build_torus(1, 1), OutOfRange);
}

TEST_CASE("sphere quadrature converges") {
  double prev_err = 1.0;
  for (int g : {2, 4, 8}) {
    auto S = build_sphere(2, g);
    const double err = std::abs(S->complex()->total_volume() - 4 * pi) / (4 * pi);
    CHECK(err < 1e-3);
    CHECK(err <= prev_err + 1e-15);
    prev_err = err;
  }
  auto S3 = build_sphere(3, 6);
  CHECK(S3->complex()->total_volume() == doctest::Approx(2 * pi * pi).epsilon(0.01));
  auto S2 = build_sphere(2, 6);
  CHECK(S2->complex()->num_cells(2) == 6 * 36);
  // Euler characteristic 2
  const auto& K = *S2->complex();
  CHECK(K.num_cells(0) - K.num_cells(1) + K.num_cells(2) == 2);
  // equator of the unit sphere has length 2 pi
  CHECK(S2->chart_lipschitz() > 1.0);
  CHECK_THROWS_AS(build_sphere(4, 3), OutOfRange);
}

TEST_CASE("morse direction") {
  auto O = build_octahedron();
  CHECK_FALSE(is_morse(linear_field(O, Eigen::Vector3d(0, 0, 1))));
  int first_try = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto f = morse_direction(O, seed);
    CHECK(is_morse(f));
    CHECK(f.direction.norm() == doctest::Approx(1.0));
    if (is_morse(linear_field(O, f.direction))) ++first_try;
  }
  CHECK(first_try == 1000);

  // a linear field changes sign at most twice along any grid line of the cube-sphere
  auto S = build_sphere(2, 8);
  auto f = morse_direction(S, 3);
  const int g = S->resolution();
  int worst = 0;
  for (int fixed = 0; fixed < 3; ++fixed)
    for (int axis = 0; axis < 3; ++axis) {
      if (axis == fixed) continue;
      for (int side : {0, g})
        for (int other = 0; other <= g; ++other) {
          int changes = 0;
          double last = 0.0;
          for (int i = 0; i <= 4 * g; ++i) {
            Eigen::VectorXd lat(3);
            const int third = 3 - fixed - axis;
            lat[fixed] = side;
            lat[third] = other;
            lat[axis] = i / 4.0;
            const double v = f(S->lattice_to_point(lat));
            if (i > 0 && (v < 0) != (last < 0)) ++changes;
            last = v;
          }
          worst = std::max(worst, changes);
        }
    }
  CHECK(worst <= 2);
}

TEST_CASE("sublevel regions and level cycles") {
  auto T = build_torus(1, 10);
  auto f = linear_field(T, Eigen::Vector2d(1, 0));
  CHECK(sublevel_region(f, -1).empty());
  CHECK(level_cycle(f, -1).empty());
  CHECK(sublevel_region(f, 2).size() == 100);
  CHECK(level_cycle(f, 2).empty());
  auto c = level_cycle(f, 0.5);
  CHECK(mass(c) == doctest::Approx(2.0));
  CHECK_THROWS_AS(sublevel_region(f, 0.45), DegenerateLevel);

  auto S = build_sphere(3, 4);
  auto g = morse_direction(S, 1);
  std::size_t last = 0;
  for (double t = -1.05; t < 1.1; t += 0.1) {
    auto r = sublevel_region(g, t);
    CHECK(boundary(boundary(r)).empty());
    CHECK(r.size() >= last);
    last = r.size();
  }
}

TEST_CASE("geodesic balls") {
  auto T = build_torus(1, 64);
  Region ball = ball_region(T, Eigen::Vector2d(0, 0), 0.25);
  CHECK(region_volume(*T->complex(), ball) == doctest::Approx(pi / 16).epsilon(0.03));
  CHECK_THROWS_AS(geodesic_ball(T, Eigen::Vector2d(0, 0), 0.0), OutOfRange);
  CHECK_THROWS_AS(geodesic_ball(T, Eigen::Vector2d(0, 0), 0.8), OutOfRange);
  Region tiny = ball_region(T, Eigen::Vector2d(0.3, 0.3), 1e-6);
  CHECK(region_volume(*T->complex(), tiny) == 0.0);

  auto S = build_sphere(2, 16);
  for (double r : {0.3, 0.7, 1.2}) {
    Region cap = ball_region(S, Eigen::Vector3d(0.36, 0.48, 0.8), r);
    CHECK(region_volume(*S->complex(), cap) == doctest::Approx(2 * pi * (1 - std::cos(r))).epsilon(0.06));
  }
}

TEST_CASE("ball packings") {
  auto T = build_torus(1, 8);
  auto p4 = ball_packing(T, 4);
  CHECK(p4.count() == 4);
  CHECK(p4.radius == doctest::Approx(0.125));
  CHECK(p4.centers[1].sum() == doctest::Approx(0.5));
  CHECK(p4.centers[3].sum() == doctest::Approx(1.0));
  CHECK(ball_packing(T, 9).radius == doctest::Approx(0.25 / 3));
  for (int p = 1; p <= 40; ++p) {
    auto P = ball_packing(T, p);
    CHECK(P.count() == p);
    if (p > 1) CHECK(min_separation(T, P.centers) > 2 * P.radius);
  }
  auto S = build_sphere(3, 4);
  for (int p : {2, 8, 17, 64}) {
    auto P = ball_packing(S, p);
    CHECK(P.count() == p);
    CHECK(min_separation(S, P.centers) > 2 * P.radius);
    for (const auto& c : P.centers) CHECK(c.norm() == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(ball_packing(T, 0), OutOfRange);
}
