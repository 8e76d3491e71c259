#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mmw/sweepouts.hpp"
#include "mmw/widths.hpp"

using namespace mmw;

TEST_CASE("scaling fit") {
  std::vector<int> p{1, 2, 4, 8, 16};
  std::vector<double> v;
  for (int q : p) v.push_back(3.0 * std::sqrt(q));
  auto fit = scaling_fit(p, v, 1);
  CHECK(fit.slope == doctest::Approx(0.5));
  CHECK(std::exp(fit.intercept) == doctest::Approx(3.0));
  CHECK(fit.r2 == doctest::Approx(1.0));
  CHECK(fit.weyl_min == doctest::Approx(3.0));
  CHECK(fit.weyl_max == doctest::Approx(3.0));
  CHECK_THROWS_AS(scaling_fit({1, 2, 4}, {1, 2, 3}, 1), PreconditionFailed);
  CHECK_THROWS_AS(scaling_fit({1, 1, 2, 2, 3}, {1, 1, 2, 2, 3}, 1), PreconditionFailed);
  CHECK_THROWS_AS(scaling_fit({1, 2, 3, 4}, {1, 0, 3, 4}, 1), OutOfRange);
}

TEST_CASE("monotonicity and equality flags") {
  auto up = monotonicity_and_equality({1, 2, 3, 4}, {1.0, 1.5, 2.0, 2.5}, 0.01);
  CHECK(up.monotone);
  CHECK(up.violations.empty());
  CHECK(up.equalities.empty());
  auto down = monotonicity_and_equality({1, 2, 4}, {2.0, 1.0, 3.0}, 0.05);
  CHECK_FALSE(down.monotone);
  REQUIRE(down.violations.size() == 1);
  CHECK(down.violations[0] == std::pair{1, 2});
  const double s = 4 * std::numbers::pi;
  auto flat = monotonicity_and_equality({1, 2, 3, 4}, {s, s * 1.004, s * 0.998, s}, 0.02);
  CHECK(flat.monotone);
  CHECK(flat.equalities.size() == 3);
}

TEST_CASE("ball mass calibration on the torus") {
  auto T = build_torus(1, 81);
  auto lin = linear_sweepout(morse_direction(T, 2));
  std::vector<double> alphas;
  // balls kept off the seam of the fundamental square, where sublevel boundaries also run
  for (auto c : {Eigen::Vector2d(0.37, 0.61), Eigen::Vector2d(0.25, 0.3), Eigen::Vector2d(0.7, 0.45)}) {
    auto fit = ball_mass_bound(lin, c, {0.05, 0.1, 0.15, 0.2});
    // a staircase chord through the centre has length between 2r and 2 sqrt(2) r
    CHECK(fit.alpha >= 1.8);
    CHECK(fit.alpha <= 2.0 * std::sqrt(2.0) * 1.1);
    CHECK(fit.residual < 0.2);
    alphas.push_back(fit.alpha);
  }
  const auto [lo, hi] = std::minmax_element(alphas.begin(), alphas.end());
  CHECK(*hi <= 1.25 * *lo);
  CHECK(ball_mass_bound(lin, Eigen::Vector2d(0.1, 0.8), {0.05, 0.1, 0.15, 0.2}).alpha > *lo);

  const int n = T->complex()->num_top();
  Region block(n, 0);
  block[0] = 1;
  CHECK_THROWS_AS(ball_mass_bound(constant_family(T, block, 1), Eigen::Vector2d(0.5, 0.5), {0.1}), PreconditionFailed);
}

TEST_CASE("packing lower bound") {
  auto T = build_torus(1, 81);
  auto f = morse_direction(T, 2);
  auto fit = ball_mass_bound(linear_sweepout(f), Eigen::Vector2d(0.37, 0.61), {0.05, 0.1, 0.15, 0.2});
  auto psi = guth_family(f, 4);
  auto det = detect_projective(psi, 4);
  REQUIRE(det.detected);
  auto packing = ball_packing(T, 4);
  auto r = packing_lower_bound(psi, det, packing, fit.alpha);
  CHECK(r.found);
  CHECK(r.threshold == doctest::Approx(fit.alpha / 3 * packing.radius));
  CHECK(r.bound == doctest::Approx(4 * fit.alpha / 6 * packing.radius));
  // the recorded masses are those of the witness
  auto again = ball_masses(psi, r.witness, packing);
  REQUIRE(again.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(again[i] == doctest::Approx(r.ball_masses[i]));
    CHECK(again[i] > r.threshold);
  }
  CHECK_THROWS_AS(packing_lower_bound(psi, det, ball_packing(T, 3), fit.alpha), PreconditionFailed);
  Detection none;
  CHECK_THROWS_AS(packing_lower_bound(psi, none, packing, fit.alpha), PreconditionFailed);
}

TEST_CASE("upper estimate") {
  auto T = build_torus(1, 27);
  auto f = morse_direction(T, 4);
  auto psi = guth_family(f, 3);
  auto det = detect_projective(psi, 3);
  SampleOptions opt;
  opt.polish = 0;
  double prev = 0.0;
  for (int s : {50, 100, 200}) {
    opt.samples = s;
    auto u = upper_estimate(psi, det, opt);
    CHECK(u.value >= prev);
    CHECK(u.value >= u.half_value);
    CHECK(member_mass(psi, u.witness, nullptr) == doctest::Approx(u.value));
    prev = u.value;
  }
  opt.polish = 4;
  auto polished = upper_estimate(psi, det, opt);
  CHECK(polished.value >= prev);
  CHECK(member_mass(psi, polished.witness, nullptr) == doctest::Approx(polished.value));

  // sample streams are nested prefixes and independent of the thread count
  CHECK(sphere_sample(4, 9, 17) == sphere_sample(4, 9, 17));
  CHECK(sphere_sample(4, 9, 17).norm() == doctest::Approx(1.0));
  opt.jobs = 3;
  CHECK(upper_estimate(psi, det, opt).value == doctest::Approx(polished.value));

  Detection none;
  CHECK_THROWS_AS(upper_estimate(psi, none, opt), PreconditionFailed);
  auto weak = det;
  weak.p = 2;
  CHECK_THROWS_AS(upper_estimate(psi, weak, opt), PreconditionFailed);
}

TEST_CASE("coordinate family on the three-sphere") {
  auto basis = harmonic_basis();
  std::vector<Quadratic> coords(basis.begin() + 1, basis.begin() + 5);
  auto fam = eigenfunction_family(coords);
  auto det = declared_detection(fam);
  SampleOptions opt;
  opt.samples = 40;
  opt.polish = 0;
  opt.lines = 3000;
  auto u = upper_estimate(fam, det, opt);
  // every member is a great sphere of area 4 pi
  CHECK(u.value == doctest::Approx(4 * std::numbers::pi).epsilon(0.06));
  CHECK(u.per_line_max <= 2);
  CHECK_THROWS_AS(declared_detection(guth_family(morse_direction(build_torus(1, 9), 1), 1)), PreconditionFailed);
}
