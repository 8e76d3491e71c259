#include <doctest.h>

#include <cmath>
#include <random>

#include "mmw/almgren.hpp"
#include "mmw/sweepouts.hpp"

using namespace mmw;

namespace {

std::vector<PathSegment> circle_loop(double start = 0.0) {
  std::vector<PathSegment> loop;
  for (int i = 0; i < 3; ++i)
    loop.push_back([i, start](double s) {
      double th = start + (i + s) / 3.0;
      th -= std::floor(th);
      return Eigen::VectorXd::Constant(1, th);
    });
  return loop;
}

// A loop of regions that wanders around a fixed region by toggling cells of a small block.
ChainFamily confined_family(const ModelPtr& M, const Region& base, const std::vector<int>& block) {
  ChainFamily fam;
  fam.kind = "confined";
  fam.model = M;
  fam.region_fn = [base, block](const Eigen::VectorXd& a) {
    Region r = base;
    const int m = static_cast<int>(block.size());
    const int pos = static_cast<int>(std::floor(a[0] * 2 * m)) % (2 * m);
    // first half adds the block cell by cell, second half removes it again
    for (int i = 0; i < m; ++i) {
      const bool on = pos < m ? i <= pos : i > pos - m;
      if (on) r[block[i]] ^= 1;
    }
    return r;
  };
  return fam;
}

}  // namespace

TEST_CASE("linear sweepouts are sweepouts") {
  auto T = build_torus(1, 12);
  auto f = morse_direction(T, 3);
  auto loop = linear_sweepout(f);
  LoopStats stats;
  CHECK(loop_class(loop, circle_loop(), {}, &stats) == 1);
  CHECK(stats.max_step_mass < 0.25 * T->complex()->total_volume());
  CHECK(is_sweepout(loop));
  CHECK(loop(Eigen::VectorXd::Constant(1, 0.0)).empty());
  CHECK(loop(Eigen::VectorXd::Constant(1, 0.5)) == level_cycle(f, 0.0));

  auto S = build_sphere(2, 6);
  CHECK(is_sweepout(linear_sweepout(morse_direction(S, 5))));
  auto S3 = build_sphere(3, 4);
  CHECK(is_sweepout(linear_sweepout(morse_direction(S3, 5))));
}

TEST_CASE("constant and confined loops are trivial") {
  auto T = build_torus(1, 9);
  const int n = T->complex()->num_top();
  Region half(n, 0);
  for (int c = 0; c < n; ++c) half[c] = T->complex()->barycenter(2, c)[0] < 0.5;
  auto constant = constant_family(T, half, 1);
  CHECK(loop_class(constant, circle_loop()) == 0);
  CHECK_FALSE(is_sweepout(constant));

  auto conf = confined_family(T, half, {40, 41, 49, 50});
  // every value stays flat-close to the fixed cycle
  std::vector<Mod2Chain> trivial{constant(Eigen::VectorXd::Zero(1)), Mod2Chain(T->complex(), 1)};
  const double thr = calibrated_threshold(trivial);
  for (int i = 0; i < 16; ++i) {
    const auto v = conf(Eigen::VectorXd::Constant(1, (i + 0.5) / 16));
    CHECK(flat_distance(v, trivial[0]) < thr);
  }
  CHECK(loop_class(conf, circle_loop()) == 0);
}

TEST_CASE("loop class is invariant under rotation and refinement") {
  auto T = build_torus(1, 12);
  auto loop = linear_sweepout(morse_direction(T, 11));
  for (double start : {0.1, 0.37, 0.8}) CHECK(loop_class(loop, circle_loop(start)) == 1);
  LoopOptions fine;
  fine.step_fraction = 0.05;
  CHECK(loop_class(loop, circle_loop(), fine) == 1);
  // the same sweep on the refined grid
  auto T2 = build_torus(1, 36);
  CHECK(loop_class(linear_sweepout(linear_field(T2, morse_direction(T, 11).direction)), circle_loop()) == 1);
  // concatenating the loop with itself gives zero
  auto twice = circle_loop();
  for (auto& s : circle_loop()) twice.push_back(s);
  CHECK(loop_class(loop, twice) == 0);
}

TEST_CASE("almgren class of discrete maps") {
  auto T = build_torus(1, 8);
  auto loop = linear_sweepout(morse_direction(T, 2));
  auto X = build_circle(6);
  auto phi = evaluate_on_vertices(loop, X);
  CHECK(almgren_class(phi) == 1);
  std::vector<Mod2Chain> constant(10, loop(Eigen::VectorXd::Constant(1, 0.5)));
  CHECK(almgren_class(constant) == 0);
}

TEST_CASE("relative class inside a ball") {
  auto T = build_torus(1, 16);
  const auto& K = T->complex();
  auto f = morse_direction(T, 4);
  auto loop = linear_sweepout(f);
  Eigen::VectorXd c(2);
  c << 0.5, 0.5;
  const Region ball = ball_region(T, c, 0.2);
  auto interior = [&](const Mod2Chain& ch) {
    std::vector<int> keep;
    for (int e : ch.cells()) {
      const auto& cf = K->cofaces(e);
      if (ball[cf[0]] && ball[cf[1]]) keep.push_back(e);
    }
    return Mod2Chain(K, 1, keep);
  };
  std::vector<Mod2Chain> rel;
  for (int i = 0; i < 3000; ++i) rel.push_back(interior(loop(Eigen::VectorXd::Constant(1, (i + 0.5) / 3000))));
  CHECK(relative_almgren_class(rel, ball) == 1);
  std::vector<Mod2Chain> constant(20, rel[1500]);
  CHECK(relative_almgren_class(constant, ball) == 0);
  std::vector<Mod2Chain> empty(20, Mod2Chain(K, 1));
  CHECK(relative_almgren_class(empty, ball) == 0);
}

TEST_CASE("guth family detection") {
  auto T = build_torus(1, 12);
  auto f = morse_direction(T, 7);
  for (int p = 1; p <= 3; ++p) {
    auto psi = guth_family(f, p);
    auto rp = build_rp(p, 1);
    auto det = is_p_sweepout(psi, rp.complex, p);
    CHECK(det.detected);
    CHECK(det.lambda_values.size() == 1);
    for (int q = 1; q < p; ++q) CHECK(is_p_sweepout(psi, rp.complex, q).detected);
    CHECK(detect_projective(psi, p).detected);
    Region empty(T->complex()->num_top(), 0);
    CHECK_FALSE(is_p_sweepout(constant_family(T, empty, p), rp.complex, p).detected);
  }
  CHECK(detect_projective(guth_family(f, 16), 16).detected);
  auto json = detect_projective(guth_family(f, 2), 2).to_json();
  CHECK(json["detected"] == true);
  CHECK(json.contains("threshold_used"));
}

TEST_CASE("restriction keeps detection one level down") {
  auto T = build_torus(1, 12);
  auto f = morse_direction(T, 7);
  const auto& K = T->complex();
  for (int p = 1; p <= 2; ++p) {
    auto psi = guth_family(f, p + 1);
    auto rp = build_rp(p + 1, 1);
    auto full = restrict_and_detect(psi, rp.complex, {Mod2Chain(K, 1)}, 0.0, p + 1, false);
    CHECK(full.Y->num_cells(0) == rp.complex->num_cells(0));
    CHECK(full.detection.detected);

    std::vector<Mod2Chain> excluded{Mod2Chain(K, 1), level_cycle(f, f.min() + 0.1 * (f.max() - f.min())),
                                    level_cycle(f, f.max() - 0.1 * (f.max() - f.min()))};
    const double eps = 0.5 * calibrated_threshold(excluded);
    auto r = restrict_and_detect(psi, rp.complex, excluded, eps, p);
    CHECK(r.Y->num_cells(0) < rp.complex->num_cells(0));
    if (r.hypothesis_holds) CHECK(r.detection.detected);
  }
}

TEST_CASE("mass concentration of the level family") {
  auto T = build_torus(1, 24);
  Eigen::Vector2d v(1.0, 0.0123);
  auto fam = linear_sweepout(linear_field(T, v));
  std::vector<Eigen::VectorXd> params, centers;
  for (int i = 1; i < 40; ++i) params.push_back(Eigen::VectorXd::Constant(1, 0.5 + 0.3 * i / 40));
  centers.push_back(Eigen::Vector2d(0.4, 0.55));
  centers.push_back(Eigen::Vector2d(0.7, 0.2));
  const std::vector<double> radii{0.1, 0.2, 0.3};
  auto prof = mass_concentration(fam, radii, params, centers);
  for (std::size_t i = 0; i < radii.size(); ++i) CHECK(prof[i] <= 2 * radii[i] * 1.05 + 1.0 / 24);
  CHECK(prof[0] < prof[2]);
  Region empty(T->complex()->num_top(), 0);
  for (double m : mass_concentration(constant_family(T, empty, 1), radii, params, centers)) CHECK(m == 0.0);
}
