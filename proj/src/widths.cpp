#include "mmw/widths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

namespace mmw {

namespace {

nlohmann::json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Pattern search on the sphere: coordinate steps of size sigma, halved when no step improves.
Eigen::VectorXd pattern_ascent(const Eigen::VectorXd& start, double& value, int rounds,
                               const std::function<double(const Eigen::VectorXd&)>& score) {
  Eigen::VectorXd a = start;
  double sigma = 0.1;
  for (int r = 0; r < rounds && sigma > 1e-3; ++r) {
    bool improved = false;
    for (Eigen::Index i = 0; i < a.size() && !improved; ++i)
      for (double sign : {1.0, -1.0}) {
        Eigen::VectorXd b = a;
        b[i] += sign * sigma;
        b.normalize();
        const double v = score(b);
        if (v > value) {
          value = v;
          a = b;
          improved = true;
          break;
        }
      }
    if (!improved) sigma *= 0.5;
  }
  return a;
}

}  // namespace

Eigen::VectorXd sphere_sample(int dim, std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> N;
  Eigen::VectorXd a(dim);
  do {
    for (int i = 0; i < dim; ++i) a[i] = N(rng);
  } while (a.norm() < 1e-12);
  return a.normalized();
}

void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(jobs);
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int i = t; i < n; i += jobs) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Detection declared_detection(const ChainFamily& family) {
  if (family.backend != Backend::crofton) throw PreconditionFailed("declared detection is for crofton families");
  Detection d;
  d.p = family.p;
  d.detected = true;
  d.structural = true;
  d.lambda_values = {1};
  return d;
}

double member_mass(const ChainFamily& family, const Eigen::VectorXd& a, const LineSet* lines, int* per_line) {
  if (family.backend == Backend::crofton) {
    if (!lines) throw PreconditionFailed("crofton mass needs a line set");
    auto r = crofton_mass(family.member(a), *lines);
    if (per_line) *per_line = r.per_line_max;
    return r.estimate;
  }
  Eigen::VectorXd b = a;
  for (int attempt = 0;; ++attempt) {
    try {
      return family.mass(b);
    } catch (const DegenerateLevel&) {
      if (attempt == 4) throw;
      for (Eigen::Index i = 0; i < b.size(); ++i) b[i] += 1e-9 * std::cos(1.0 + i + attempt);
      b.normalize();
    }
  }
}

nlohmann::json UpperEstimate::to_json() const {
  return {{"value", value},         {"half_value", half_value}, {"diagnostic", diagnostic},
          {"witness", vec_json(witness)}, {"samples", samples}, {"per_line_max", per_line_max},
          {"provenance", provenance}};
}

UpperEstimate upper_estimate(const ChainFamily& family, const Detection& detection, const SampleOptions& opt) {
  if (!detection.detected || detection.p < family.p)
    throw PreconditionFailed("family is not detected at its level; no width bound can be attached");
  if (opt.samples < 2) throw OutOfRange("need at least two samples");
  const int dim = family.p + 1;
  std::optional<LineSet> lines;
  if (family.backend == Backend::crofton) lines = make_lines(opt.lines, opt.line_seed);
  const LineSet* L = lines ? &*lines : nullptr;

  std::vector<double> mass(opt.samples);
  std::vector<int> crossings(opt.samples, 0);
  parallel_for(opt.samples, opt.jobs, [&](int i) {
    mass[i] = member_mass(family, sphere_sample(dim, opt.seed, i), L, &crossings[i]);
  });
  UpperEstimate out;
  out.samples = opt.samples;
  const auto half_end = mass.begin() + opt.samples / 2;
  out.half_value = *std::max_element(mass.begin(), half_end);
  const auto best = std::max_element(mass.begin(), mass.end());
  out.value = *best;
  out.witness = sphere_sample(dim, opt.seed, best - mass.begin());
  out.diagnostic = out.value > 0 ? (out.value - out.half_value) / out.value : 0.0;
  out.per_line_max = *std::max_element(crossings.begin(), crossings.end());

  // candidate pool: samples, caller starts, structured level placements
  std::vector<Eigen::VectorXd> pool;
  std::vector<double> pool_mass;
  for (int i = 0; i < opt.samples; ++i) pool_mass.push_back(mass[i]);
  pool.resize(opt.samples);
  auto add = [&](Eigen::VectorXd a) {
    if (a.norm() == 0.0) return;
    a.normalize();
    pool_mass.push_back(member_mass(family, a, L));
    pool.push_back(std::move(a));
  };
  for (const auto& s : opt.starts) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
    const Eigen::Index m = std::min<Eigen::Index>(dim, s.size());
    a.head(m) = s.head(m);
    add(a);
  }
  if (family.from_roots && family.field_based() && family.sample_values.size() > 0) {
    std::vector<double> t(family.sample_values.data(), family.sample_values.data() + family.sample_values.size());
    std::sort(t.begin(), t.end());
    for (double w : {1.0, 0.5, 0.25, 0.125}) {
      const double lo = 0.5 - 0.5 * w;
      std::vector<double> roots;
      for (int j = 0; j < family.p; ++j) {
        const double q = lo + w * (j + 0.5) / family.p;
        roots.push_back(t[std::min<std::size_t>(t.size() - 1, static_cast<std::size_t>(q * t.size()))] + 1e-9);
      }
      add(family.from_roots(roots));
    }
  }
  for (std::size_t i = opt.samples; i < pool.size(); ++i)
    if (pool_mass[i] > out.value) {
      out.value = pool_mass[i];
      out.witness = pool[i];
    }

  std::vector<int> order(pool_mass.size());
  std::iota(order.begin(), order.end(), 0);
  const int top = std::min<int>(opt.polish, static_cast<int>(order.size()));
  std::partial_sort(order.begin(), order.begin() + top, order.end(),
                    [&](int a, int b) { return pool_mass[a] > pool_mass[b]; });
  auto start_of = [&](int i) { return i < opt.samples ? sphere_sample(dim, opt.seed, i) : pool[i]; };
  std::vector<double> polished(top);
  std::vector<Eigen::VectorXd> where(top);
  std::vector<int> polished_cross(top, 0);
  parallel_for(top, opt.jobs, [&](int t) {
    double v = pool_mass[order[t]];
    int& pc = polished_cross[t];
    where[t] = pattern_ascent(start_of(order[t]), v, opt.polish_rounds, [&](const Eigen::VectorXd& b) {
      int c = 0;
      const double m = member_mass(family, b, L, &c);
      pc = std::max(pc, c);
      return m;
    });
    polished[t] = v;
  });
  for (int t = 0; t < top; ++t) {
    out.per_line_max = std::max(out.per_line_max, polished_cross[t]);
    if (polished[t] > out.value) {
      out.value = polished[t];
      out.witness = where[t];
    }
  }
  return out;
}

nlohmann::json BallMassFit::to_json() const {
  return {{"center", vec_json(center)}, {"radii", radii}, {"sup_mass", sup_mass}, {"alpha", alpha},
          {"residual", residual}, {"provenance", "calibrated"}};
}

BallMassFit ball_mass_bound(const ChainFamily& loop, const Eigen::VectorXd& center, const std::vector<double>& radii,
                            int params) {
  if (radii.empty()) throw PreconditionFailed("no radii");
  if (!is_sweepout(loop)) throw PreconditionFailed("ball mass bounds need a sweepout");
  const int n = loop.model->dim() - 1;
  std::vector<Mod2Chain> members;
  for (int i = 0; i < params; ++i) members.push_back(loop(Eigen::VectorXd::Constant(1, (i + 0.5) / params)));
  BallMassFit fit;
  fit.center = center;
  fit.radii = radii;
  double num = 0.0, den = 0.0;
  for (double r : radii) {
    const auto ball = geodesic_ball(loop.model, center, r);
    double sup = 0.0;
    for (const auto& m : members) sup = std::max(sup, mass(restrict(m, ball)));
    fit.sup_mass.push_back(sup);
    num += sup * std::pow(r, n);
    den += std::pow(r, 2 * n);
  }
  fit.alpha = num / den;
  if (!(fit.alpha > 0.0)) throw Error("ball mass fit is not positive");
  double ss = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double model = fit.alpha * std::pow(radii[i], n);
    ss += std::pow((fit.sup_mass[i] - model) / model, 2);
  }
  fit.residual = std::sqrt(ss / radii.size());
  return fit;
}

std::vector<double> ball_masses(const ChainFamily& family, const Eigen::VectorXd& a, const BallPacking& packing) {
  const auto value = family(a);
  std::vector<double> out;
  for (const auto& c : packing.centers) out.push_back(mass(restrict(value, geodesic_ball(family.model, c, packing.radius))));
  return out;
}

nlohmann::json PackingResult::to_json() const {
  return {{"found", found},         {"witness", vec_json(witness)}, {"ball_masses", ball_masses},
          {"threshold", threshold}, {"bound", bound},               {"radius", radius},
          {"alpha", alpha},         {"rounds", rounds},             {"candidates", candidates},
          {"provenance", "calibrated"}};
}

PackingResult packing_lower_bound(const ChainFamily& family, const Detection& detection, const BallPacking& packing,
                                  double alpha, const PackingOptions& opt) {
  if (family.backend != Backend::mesh) throw PreconditionFailed("packing bounds need a mesh family");
  if (!detection.detected || detection.p < family.p) throw PreconditionFailed("family is not detected at its level");
  if (packing.count() != family.p) throw PreconditionFailed("packing must have p balls");
  if (!(alpha > 0.0)) throw OutOfRange("alpha must be positive");
  const auto& K = *family.model->complex();
  const int n = K.dim() - 1;
  PackingResult out;
  out.radius = packing.radius;
  out.alpha = alpha;
  out.threshold = alpha / 3.0 * std::pow(packing.radius, n);
  out.bound = family.p * alpha / 6.0 * std::pow(packing.radius, n);

  // facet weights inside each ball
  std::vector<std::vector<double>> inside(packing.count(), std::vector<double>(K.num_facets(), 0.0));
  for (int j = 0; j < packing.count(); ++j) {
    const auto ball = geodesic_ball(family.model, packing.centers[j], packing.radius);
    for (int f = 0; f < K.num_facets(); ++f)
      if (ball(K.barycenter(n, f))) inside[j][f] = K.weight(n, f);
  }
  auto masses = [&](const Eigen::VectorXd& a) {
    std::vector<double> m(packing.count(), 0.0);
    const auto value = family(a);
    for (int f : value.cells())
      for (int j = 0; j < packing.count(); ++j) m[j] += inside[j][f];
    return m;
  };
  auto score = [&](const Eigen::VectorXd& a) {
    try {
      const auto m = masses(a);
      return *std::min_element(m.begin(), m.end());
    } catch (const DegenerateLevel&) {
      return -1.0;
    }
  };

  std::vector<Eigen::VectorXd> targeted;
  if (family.from_roots && family.field_based()) {
    // level cycles through the cells holding the ball centres
    std::vector<double> roots;
    for (const auto& c : packing.centers) {
      int best = 0;
      double dist = std::numeric_limits<double>::infinity();
      for (int t = 0; t < K.num_top(); ++t) {
        const double d = K.distance(K.barycenter(K.dim(), t), c);
        if (d < dist) {
          dist = d;
          best = t;
        }
      }
      roots.push_back(family.sample_values[best]);
    }
    std::vector<double> sorted = family.sample_values.size() ? std::vector<double>(family.sample_values.data(),
                                                                                   family.sample_values.data() +
                                                                                       family.sample_values.size())
                                                             : std::vector<double>{};
    std::sort(sorted.begin(), sorted.end());
    const double gap = sorted.size() > 1 ? (sorted.back() - sorted.front()) / sorted.size() : 0.0;
    for (double shift : {0.5, -0.5, 1.5, -1.5}) {
      std::vector<double> r = roots;
      for (double& x : r) x += shift * gap;
      targeted.push_back(family.from_roots(r));
    }
  }

  double best_score = -1.0;
  Eigen::VectorXd best_a;
  auto consider = [&](const Eigen::VectorXd& a, double s) {
    if (s > best_score) {
      best_score = s;
      best_a = a;
    }
  };
  for (const auto& a : targeted) {
    ++out.candidates;
    consider(a, score(a));
  }
  int pool = opt.samples;
  int done = 0;
  for (out.rounds = 0; out.rounds <= opt.budget && !(best_score > out.threshold); ++out.rounds) {
    std::vector<double> s(pool - done);
    parallel_for(pool - done, opt.jobs, [&](int i) { s[i] = score(sphere_sample(family.p + 1, opt.seed, done + i)); });
    for (int i = 0; i < pool - done; ++i) consider(sphere_sample(family.p + 1, opt.seed, done + i), s[i]);
    out.candidates += pool - done;
    if (!(best_score > out.threshold) && best_a.size()) {
      double v = best_score;
      best_a = pattern_ascent(best_a, v, 30, score);
      best_score = v;
    }
    done = pool;
    pool *= 2;
  }
  out.found = best_score > out.threshold;
  if (best_a.size()) {
    out.witness = best_a;
    out.ball_masses = masses(best_a);
  }
  return out;
}

nlohmann::json ScalingFit::to_json() const {
  return {{"slope", slope}, {"intercept", intercept}, {"slope_stderr", slope_stderr}, {"r2", r2},
          {"weyl_ratios", weyl}, {"weyl_min", weyl_min}, {"weyl_max", weyl_max}};
}

ScalingFit scaling_fit(const std::vector<int>& p, const std::vector<double>& value, int n) {
  if (p.size() != value.size()) throw DimensionMismatch("p and value lengths differ");
  std::vector<int> distinct = p;
  std::sort(distinct.begin(), distinct.end());
  if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 4) throw PreconditionFailed("need at least 4 distinct p");
  const Eigen::Index m = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (p[i] < 1 || !(value[i] > 0.0)) throw OutOfRange("scaling fit needs p >= 1 and positive values");
    A(i, 0) = 1.0;
    A(i, 1) = std::log(static_cast<double>(p[i]));
    y[i] = std::log(value[i]);
  }
  const Eigen::Vector2d beta = A.colPivHouseholderQr().solve(y);
  ScalingFit fit;
  fit.intercept = beta[0];
  fit.slope = beta[1];
  const Eigen::VectorXd res = y - A * beta;
  const double ssr = res.squaredNorm();
  const double sst = (y.array() - y.mean()).square().sum();
  fit.r2 = sst > 0 ? 1.0 - ssr / sst : 1.0;
  const double sxx = (A.col(1).array() - A.col(1).mean()).square().sum();
  fit.slope_stderr = m > 2 ? std::sqrt(ssr / (m - 2) / sxx) : 0.0;
  for (Eigen::Index i = 0; i < m; ++i) fit.weyl.push_back(value[i] * std::pow(p[i], -1.0 / (n + 1)));
  fit.weyl_min = *std::min_element(fit.weyl.begin(), fit.weyl.end());
  fit.weyl_max = *std::max_element(fit.weyl.begin(), fit.weyl.end());
  return fit;
}

nlohmann::json MonotoneFlags::to_json() const {
  return {{"monotone", monotone}, {"violations", violations}, {"equalities", equalities}};
}

MonotoneFlags monotonicity_and_equality(const std::vector<int>& p, const std::vector<double>& value, double tol) {
  if (p.size() != value.size()) throw DimensionMismatch("p and value lengths differ");
  std::vector<int> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return p[a] < p[b]; });
  MonotoneFlags out;
  for (std::size_t k = 1; k < order.size(); ++k) {
    const int i = order[k - 1], j = order[k];
    if (value[j] < value[i] * (1.0 - tol)) {
      out.monotone = false;
      out.violations.push_back({p[i], p[j]});
    }
    const double scale = std::max(std::abs(value[i]), std::abs(value[j]));
    if (p[j] == p[i] + 1 && std::abs(value[j] - value[i]) <= tol * scale) out.equalities.push_back({p[i], p[j]});
  }
  return out;
}

nlohmann::json WidthReport::to_json() const {
  nlohmann::json j = {{"p", p},
                      {"model", model},
                      {"family", family},
                      {"detection", detection.to_json()},
                      {"upper", upper.to_json()},
                      {"tolerance", tolerance}};
  if (lower) j["lower"] = lower->to_json();
  if (calibration) j["calibration"] = calibration->to_json();
  return j;
}

}  // namespace mmw
