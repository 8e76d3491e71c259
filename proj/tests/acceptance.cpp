// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "mmw/almgren.hpp"
#include "mmw/crofton.hpp"
#include "mmw/experiment.hpp"
#include "mmw/param_complex.hpp"
#include "mmw/sweepouts.hpp"
#include "mmw/widths.hpp"
#include "oracles.hpp"

using namespace mmw;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  failures += !o.passed;
  std::cout << (o.passed ? "PASS" : "FAIL") << "  " << id << ". " << title << " | " << o.detail << " | " << secs << " s"
            << std::endl;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

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

// Region that toggles a small block on and off around a fixed region.
ChainFamily confined_family(const ModelPtr& M, const Region& base, const std::vector<int>& block) {
  ChainFamily fam;
  fam.kind = "confined";
  fam.model = M;
  fam.region_fn = [base, block](const Eigen::VectorXd& a) {
    Region r = base;
    const int m = static_cast<int>(block.size());
    const int pos = static_cast<int>(std::floor(a[0] * 2 * m)) % (2 * m);
    for (int i = 0; i < m; ++i)
      if (pos < m ? i <= pos : i > pos - m) r[block[i]] ^= 1;
    return r;
  };
  return fam;
}

Eigen::VectorXd unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  Eigen::VectorXd a(n);
  for (int i = 0; i < n; ++i) a[i] = N(rng);
  return a.normalized();
}

// Every region R with boundary(R) == target and volume below half, by Gray-code walk.
std::vector<std::uint64_t> small_fillings(const Mod2Chain& target) {
  const auto& K = *target.complex();
  const int n = K.num_top(), top = K.dim();
  const double half = 0.5 * K.total_volume();
  std::vector<std::uint8_t> want = target.indicator(), have(K.num_cells(top - 1), 0);
  int mismatch = 0;
  for (auto w : want) mismatch += w;
  double vol = 0.0;
  std::uint64_t mask = 0;
  std::vector<std::uint64_t> out;
  if (mismatch == 0) out.push_back(0);
  for (std::uint64_t step = 1; step < (std::uint64_t{1} << n); ++step) {
    const int c = __builtin_ctzll(step);
    mask ^= std::uint64_t{1} << c;
    vol += (mask >> c & 1u) ? K.weight(top, c) : -K.weight(top, c);
    for (int f : K.faces(top, c)) {
      mismatch += have[f] == want[f] ? 1 : -1;
      have[f] ^= 1u;
    }
    if (mismatch == 0 && vol < half - 1e-12) out.push_back(mask);
  }
  return out;
}

const json kWidthScan = {{"name", "acceptance-width-scan"},
                         {"scenario", "width-scan"},
                         {"grid", 81},
                         {"fields", 5},
                         {"field_seed", 1},
                         {"p", {1, 2, 4, 8, 16, 32}},
                         {"samples", 1000},
                         {"polish", 8},
                         {"seed", 1},
                         {"center", {0.37, 0.61}},
                         {"radii", {0.05, 0.1, 0.15, 0.2}},
                         {"assertions", {{"slope_range", {0.4, 0.6}}, {"weyl_spread", 3.0}}}};

}  // namespace

int main() {
  const double four_pi = 4 * std::numbers::pi, eight_pi = 8 * std::numbers::pi;
  const auto basis = harmonic_basis();

  criterion(1, "S^3 great spheres: coordinate family members = 4 pi within 2% (1e5 lines, < 60 s)", [&] {
    const auto t0 = Clock::now();
    const auto lines = make_lines(100000, 7);
    auto fam = eigenfunction_family({basis[1], basis[2], basis[3], basis[4]});
    double worst = 0.0;
    const int members = 24;
    for (int i = 0; i < members; ++i) {
      const double e = crofton_mass(fam.member(sphere_sample(4, 7, i)), lines).estimate;
      worst = std::max(worst, std::abs(e - four_pi) / four_pi);
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    return Outcome{worst <= 0.02 && secs < 60.0,
                   std::to_string(members) + " members, worst relative error " + num(worst) + ", " + num(secs) + " s"};
  });

  criterion(2, "S^3 degree <= 2: 1e4 members, per-line crossings <= 4, mass <= 8 pi (1.02)", [&] {
    auto fam = eigenfunction_family(basis);
    const auto lines = make_lines(400, 8);
    const int params = 10000;
    int violations = 0, maxcross = 0;
    double maxmass = 0.0;
    for (int i = 0; i < params; ++i) {
      const auto r = crofton_mass(fam.member(sphere_sample(14, 8, i)), lines);
      maxcross = std::max(maxcross, r.per_line_max);
      maxmass = std::max(maxmass, r.estimate);
      violations += r.per_line_max > 4 || r.estimate > eight_pi * 1.02;
    }
    return Outcome{violations == 0, std::to_string(params) + " members (p = " + std::to_string(fam.p) +
                                        "), max per-line " + std::to_string(maxcross) + ", max mass " + num(maxmass) +
                                        " (8 pi = " + num(eight_pi) + "), violations " + std::to_string(violations)};
  });

  criterion(3, "Clifford torus: phi_5 member = 2 pi^2 within 2%", [&] {
    const double target = 2 * std::numbers::pi * std::numbers::pi;
    const auto r = crofton_mass(basis[5], make_lines(100000, 7));
    const double err = std::abs(r.estimate - target) / target;
    return Outcome{err <= 0.02, "estimate " + num(r.estimate) + " vs " + num(target) + ", relative error " + num(err)};
  });

  RunResult scan;
  bool scan_ok = false;
  criterion(4, "Scaling on T^2: upper and packing slopes in [0.4, 0.6], Weyl ratios in a compact interval", [&] {
    scan = run_experiment(ExperimentConfig::parse(kWidthScan));
    scan_ok = true;
    const auto& res = scan.report["results"];
    const double up = res["upper_fit"]["slope"].get<double>();
    const bool lower_fit = res.contains("lower_fit");
    const double lo = lower_fit ? res["lower_fit"]["slope"].get<double>() : NAN;
    const double wmin = res["upper_fit"]["weyl_min"].get<double>(), wmax = res["upper_fit"]["weyl_max"].get<double>();
    const bool ok = up >= 0.4 && up <= 0.6 && lower_fit && lo >= 0.4 && lo <= 0.6 && wmin > 0 && wmax <= 3.0 * wmin;
    std::string values;
    for (const auto& row : res["rows"]) values += " " + num(row["upper"].get<double>());
    return Outcome{ok, "upper slope " + num(up) + ", lower slope " + num(lo) + ", Weyl ratios in [" + num(wmin) + ", " +
                           num(wmax) + "], upper values" + values};
  });

  criterion(5, "Flat norm: min-cut = exhaustive on 200 random cycles, octahedron equator 2 sqrt 3", [&] {
    auto r = run_experiment(ExperimentConfig::parse({{"scenario", "flatnorm-oracle"}, {"cycles", 200}, {"seed", 11}}));
    int mismatches = 0, count = 0;
    for (const auto& row : r.report["results"]["rows"]) {
      ++count;
      mismatches += !row["equal"].get<bool>();
    }
    // re-check a slice against the test-side oracle
    std::mt19937_64 rng(17);
    int oracle_mismatch = 0;
    for (const auto& M : {build_octahedron(), build_torus_grid({4, 5}), build_torus_grid({2, 2, 4})}) {
      for (int i = 0; i < 10; ++i) {
        const auto t = oracle::random_boundary(M->complex(), rng, 0.1 + 0.08 * i);
        const double a = flat_norm(t).cost, b = oracle::exhaustive_flat_norm(t).cost;
        oracle_mismatch += std::abs(a - b) > 1e-12 * std::max(1.0, b);
      }
    }
    const double eq = r.report["results"]["rows"][0]["min_cut"].get<double>();
    const bool ok = mismatches == 0 && oracle_mismatch == 0 && std::abs(eq - 2 * std::sqrt(3.0)) < 1e-12 && count == 201;
    return Outcome{ok, std::to_string(count - 1) + " random cycles + equator (" + num(eq) + "), mismatches " +
                           std::to_string(mismatches) + ", oracle cross-check mismatches " + std::to_string(oracle_mismatch)};
  });

  criterion(6, "Almgren class: sweeps give 1, constant and confined loops 0, rotation and refinement invariant", [&] {
    std::vector<std::string> bad;
    auto T = build_torus(1, 12);
    auto sweep = linear_sweepout(morse_direction(T, 3));
    if (loop_class(sweep, circle_loop()) != 1) bad.push_back("torus sweep");
    auto S = build_sphere(2, 6);
    if (loop_class(linear_sweepout(morse_direction(S, 5)), circle_loop()) != 1) bad.push_back("sphere sweep");
    auto S3 = build_sphere(3, 4);
    if (loop_class(linear_sweepout(morse_direction(S3, 5)), circle_loop()) != 1) bad.push_back("S^3 sweep");

    auto T9 = build_torus(1, 9);
    const int n = T9->complex()->num_top();
    Region half(n, 0);
    for (int c = 0; c < n; ++c) half[c] = T9->complex()->barycenter(2, c)[0] < 0.5;
    auto constant = constant_family(T9, half, 1);
    if (loop_class(constant, circle_loop()) != 0) bad.push_back("constant loop");
    auto conf = confined_family(T9, half, {40, 41, 49, 50});
    std::vector<Mod2Chain> trivial{constant(Eigen::VectorXd::Zero(1)), Mod2Chain(T9->complex(), 1)};
    const double thr = calibrated_threshold(trivial);
    for (int i = 0; i < 16; ++i)
      if (flat_distance(conf(Eigen::VectorXd::Constant(1, (i + 0.5) / 16)), trivial[0]) >= thr) bad.push_back("confinement");
    if (loop_class(conf, circle_loop()) != 0) bad.push_back("confined loop");

    for (double start : {0.1, 0.37, 0.8})
      if (loop_class(sweep, circle_loop(start)) != 1) bad.push_back("rotation " + num(start));
    LoopOptions fine;
    fine.step_fraction = 0.05;
    if (loop_class(sweep, circle_loop(), fine) != 1) bad.push_back("finer parameter steps");
    auto T36 = build_torus(1, 36);
    if (loop_class(linear_sweepout(linear_field(T36, morse_direction(T, 3).direction)), circle_loop()) != 1)
      bad.push_back("refined grid");
    auto X = build_circle(6), Xf = subdivide(*X, 2);
    if (almgren_class(evaluate_on_vertices(sweep, X)) != 1 || almgren_class(evaluate_on_vertices(sweep, Xf)) != 1)
      bad.push_back("discrete map refinement");
    std::string detail = "torus, sphere and S^3 sweeps, constant and confined loops, 3 rotations, 2 refinements";
    for (const auto& b : bad) detail += "; failed: " + b;
    return Outcome{bad.empty(), detail};
  });

  criterion(7, "Cup ring: lambda^p != 0 and lambda^(p+1) = 0 on RP^p (p = 1..4); T^2 product is the top class", [&] {
    std::string detail;
    bool ok = true;
    for (int p = 1; p <= 4; ++p) {
      auto rp = build_rp(p, 1);
      Triangulation tri(rp.complex);
      auto H1 = cohomology(rp.complex->chain_complex(), 1);
      if (H1.classes.size() != 1) return Outcome{false, "H^1(RP^" + std::to_string(p) + ") is not Z2"};
      auto lambda = tri.from_cubical(H1.classes[0]);
      const bool top = !is_zero(tri.cup_power(lambda, p)), beyond = is_zero(tri.cup_power(lambda, p + 1));
      ok = ok && top && beyond;
      detail += "RP^" + std::to_string(p) + (top && beyond ? " ok; " : " wrong; ");
    }
    auto T = build_param_torus(2, 1);
    Triangulation tri(T);
    auto H1 = cohomology(T->chain_complex(), 1);
    auto a = tri.from_cubical(H1.classes.at(0)), b = tri.from_cubical(H1.classes.at(1));
    auto H2 = homology(*tri.chain_complex(), 2);
    const bool torus = H2.cycles.size() == 1 && evaluate(tri.cup(a, b), H2.cycles[0]) == 1 && is_zero(tri.cup(a, a));
    ok = ok && torus;
    detail += std::string("T^2 a.b on [T^2] = ") + (torus ? "1" : "wrong");
    return Outcome{ok, detail};
  });

  criterion(8, "Constancy: 1e3 small-mass filling pairs of the same boundary coincide", [&] {
    std::mt19937_64 rng(21);
    std::vector<ModelPtr> models{build_octahedron(), build_torus_grid({4, 4}), build_torus_grid({2, 2, 4})};
    int pairs = 0, bad = 0;
    for (int trial = 0; pairs < 1000; ++trial) {
      const auto& M = models[trial % models.size()];
      const auto& K = M->complex();
      std::bernoulli_distribution coin(0.1 + 0.3 * (trial % 7) / 6.0);
      Region a(K->num_top());
      for (auto& x : a) x = coin(rng);
      if (region_volume(*K, a) >= 0.5 * K->total_volume()) {
        for (auto& x : a) x ^= 1;
        if (region_volume(*K, a) >= 0.5 * K->total_volume()) continue;
      }
      const auto fills = small_fillings(region_boundary(K, a));
      std::uint64_t mask = 0;
      for (int c = 0; c < K->num_top(); ++c) mask |= std::uint64_t{a[c] != 0} << c;
      ++pairs;
      // every small filling must be the one we started from
      bad += fills.size() != 1 || fills[0] != mask;
      // and the library's isoperimetric choice agrees
      if (isoperimetric_choice(region_boundary(K, a), Mod2Chain(K, K->dim() - 1)) != Mod2Chain::from_region(K, a)) ++bad;
    }
    return Outcome{bad == 0 && pairs == 1000,
                   std::to_string(pairs) + " pairs checked by exhaustive enumeration, " + std::to_string(bad) + " conflicts"};
  });

  criterion(9, "Restriction: (p+1)-detecting Guth family minus an exclusion neighbourhood detects p (p = 1, 2, 3)", [&] {
    auto r = run_experiment(ExperimentConfig::parse(
        {{"scenario", "detection-suite"}, {"grid", 12}, {"field_seed", 7}, {"p", {1, 2, 3}}}));
    bool ok = true;
    std::string detail;
    for (const auto& row : r.report["results"]["rows"]) {
      const auto& rest = row["restricted"];
      const bool d = rest["detection"]["detected"].get<bool>();
      ok = ok && d;
      detail += "p=" + std::to_string(row["p"].get<int>()) + ": " + (d ? "detected" : "NOT detected") + " (Y " +
                std::to_string(rest["kept_vertices"].get<int>()) + "/" + std::to_string(rest["vertices"].get<int>()) +
                ", j=" + std::to_string(rest["subdivision"].get<int>()) +
                ", Z-loop hypothesis " + (rest["hypothesis_holds"].get<bool>() ? "holds" : "fails") + "); ";
    }
    return Outcome{ok, detail};
  });

  criterion(10, "Packing witness found for every detected family of the scaling run", [&] {
    if (!scan_ok) return Outcome{false, "scaling run did not complete"};
    int families = 0, found = 0;
    for (const auto& row : scan.report["results"]["rows"])
      for (const auto& f : row["fields"]) {
        if (!f["detection"]["detected"].get<bool>()) continue;
        ++families;
        found += f["lower"]["found"].get<bool>();
      }
    const auto v = verify_report(scan.report);
    return Outcome{families > 0 && found == families && v.ok,
                   std::to_string(found) + "/" + std::to_string(families) + " families, witnesses re-verified: " +
                       (v.ok ? "yes" : "no")};
  });

  criterion(11, "Bend and cancel: skeleton membership, expansion constant stable over k = 0..2, loop classes kept", [&] {
    std::string detail;
    bool ok = true;
    auto T = build_torus(1, 81);
    std::vector<Expansion> ex;
    for (int k = 0; k <= 2; ++k) ex.push_back(measure_expansion(bend_and_cancel(T, k)));
    double lo = INFINITY, hi = 0.0;
    for (const auto& e : ex) {
      lo = std::min(lo, e.c1);
      hi = std::max(hi, e.c1);
    }
    const double eps = bend_eps_max(T);
    for (const auto& e : ex) ok = ok && e.max_derivative <= hi / eps * (1 + 1e-12);
    ok = ok && hi < 2.0 * lo;
    detail += "C1 over k=0..2 in [" + num(lo) + ", " + num(hi) + "]; ";

    auto T27 = build_torus(1, 27);
    auto f = morse_direction(T27, 8);
    std::mt19937_64 rng(5);
    int violations = 0, facets = 0;
    for (int p : {2, 3, 5}) {
      auto F = bend_and_cancel(T27, 1);
      auto psi = guth_family(f, p);
      auto phi = pushforward(F, psi);
      std::vector<Eigen::VectorXd> params;
      for (int i = 0; i < 20; ++i) params.push_back(unit(p + 1, rng));
      const auto chk = skeleton_check(F, psi, phi, params);
      violations += chk.violations + chk.outer_violations;
      facets += chk.facets;
    }
    ok = ok && violations == 0 && facets > 0;
    detail += std::to_string(facets) + " pushed facets, " + std::to_string(violations) + " skeleton violations; ";

    int kept = 0;
    const int loops = 20;
    auto psi = guth_family(f, 3);
    auto phi = pushforward(bend_and_cancel(T27, 1), psi);
    for (int i = 0; i < loops; ++i) {
      const auto u = unit(4, rng), w = unit(4, rng);
      const auto path = projective_loop(u, w, i % 2 == 1);
      kept += loop_class(psi, path) == loop_class(phi, path);
    }
    ok = ok && kept == loops;
    detail += std::to_string(kept) + "/" + std::to_string(loops) + " loop classes preserved";
    return Outcome{ok, detail};
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
