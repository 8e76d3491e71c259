#include "mmw/almgren.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace mmw {

int almgren_class(const std::vector<Mod2Chain>& loop) {
  if (loop.empty()) throw PreconditionFailed("empty loop");
  const auto& K = loop.front().complex();
  Mod2Chain sum(K, K->dim());
  for (std::size_t j = 0; j < loop.size(); ++j) sum = sum + isoperimetric_choice(loop[j], loop[(j + 1) % loop.size()]);
  if (sum.empty()) return 0;
  if (sum.size() == static_cast<std::size_t>(K->num_top())) return 1;
  throw Error("isoperimetric choices do not sum to a cycle");
}

int almgren_class(const DiscreteMap& phi) {
  const auto& X = *phi.domain;
  if (X.ambient_dim() != 1 || X.identification() != Identification::periodic)
    throw PreconditionFailed("almgren_class needs a subdivided circle");
  std::vector<int> order(X.num_vertices());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return X.cell(0, a).base[0] < X.cell(0, b).base[0]; });
  std::vector<Mod2Chain> loop;
  for (int v : order) loop.push_back(phi.values[v]);
  return almgren_class(loop);
}

namespace {

// The filling of `c` inside D: two-colour the cells of D across interior
// facets, switching colour on facets of c. Facets on the frontier of D are free.
Region relative_filling(const Mod2Chain& c, const Region& D) {
  const auto& K = *c.complex();
  const int n = K.num_top();
  auto in_c = c.indicator();
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (int f = 0; f < K.num_facets(); ++f) {
    const auto& cf = K.cofaces(f);
    if (D[cf[0]] && D[cf[1]]) {
      adj[cf[0]].push_back({cf[1], in_c[f]});
      adj[cf[1]].push_back({cf[0], in_c[f]});
    }
  }
  std::vector<int> color(n, -1);
  int start = -1;
  for (int i = 0; i < n; ++i)
    if (D[i]) {
      start = i;
      break;
    }
  if (start < 0) throw PreconditionFailed("empty ball");
  std::deque<int> queue{start};
  color[start] = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (auto [v, flip] : adj[u]) {
      const int want = color[u] ^ flip;
      if (color[v] < 0) {
        color[v] = want;
        queue.push_back(v);
      } else if (color[v] != want) {
        throw EssentialCycle("relative chain does not bound inside the ball");
      }
    }
  }
  Region out(n, 0);
  for (int i = 0; i < n; ++i) {
    if (!D[i]) continue;
    if (color[i] < 0) throw PreconditionFailed("discrete ball is not connected");
    out[i] = static_cast<std::uint8_t>(color[i]);
  }
  return out;
}

}  // namespace

int relative_almgren_class(const std::vector<Mod2Chain>& loop, const Region& ball) {
  if (loop.empty()) throw PreconditionFailed("empty loop");
  const auto& K = *loop.front().complex();
  const double vol = region_volume(K, ball);
  Region sum(K.num_top(), 0);
  for (std::size_t j = 0; j < loop.size(); ++j) {
    Region A = relative_filling(loop[j] + loop[(j + 1) % loop.size()], ball);
    const double m = region_volume(K, A);
    if (std::abs(m - 0.5 * vol) <= 1e-12 * vol) throw FillingTie("relative fillings of equal mass");
    if (m > 0.5 * vol)
      for (int i = 0; i < K.num_top(); ++i) A[i] = ball[i] && !A[i];
    for (int i = 0; i < K.num_top(); ++i) sum[i] ^= A[i];
  }
  if (std::none_of(sum.begin(), sum.end(), [](auto x) { return x != 0; })) return 0;
  if (sum == ball) return 1;
  throw Error("relative choices do not sum to a relative cycle");
}

namespace {

class LoopWalker {
 public:
  LoopWalker(const ChainFamily& fam, double bound, int max_depth, LoopStats* stats)
      : fam_(fam), K_(*fam.model->complex()), bound_(bound), max_depth_(max_depth), stats_(stats) {
    total_ = K_.total_volume();
  }

  int run(const std::vector<PathSegment>& loop) {
    Region first, prev;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      Region r0 = eval(loop[i], 0.0), r1 = eval(loop[i], 1.0);
      if (i == 0)
        first = r0;
      else
        step(prev, r0);
      refine(loop[i], 0.0, 1.0, r0, r1, 0);
      prev = std::move(r1);
    }
    step(prev, first);
    return complements_ & 1;
  }

 private:
  Region eval(const PathSegment& seg, double s) const {
    for (double nudge : {0.0, 1e-9, -1e-9, 3e-9}) {
      try {
        return fam_.region(seg(std::clamp(s + nudge, 0.0, 1.0)));
      } catch (const DegenerateLevel&) {
      }
    }
    throw DegenerateLevel("family degenerate along the loop");
  }

  double diff_volume(const Region& a, const Region& b) const {
    double m = 0.0;
    const auto w = K_.weights(K_.dim());
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) m += w[i];
    return m;
  }

  double lighter(const Region& a, const Region& b) const {
    const double m = diff_volume(a, b);
    return std::min(m, total_ - m);
  }

  void step(const Region& a, const Region& b) {
    const double m = diff_volume(a, b);
    if (std::abs(m - 0.5 * total_) <= 1e-12 * total_) throw FillingTie("loop step has two fillings of equal mass");
    if (m > 0.5 * total_) ++complements_;
    if (stats_) {
      ++stats_->steps;
      stats_->max_step_mass = std::max(stats_->max_step_mass, std::min(m, total_ - m));
    }
  }

  bool parity(const Region& a, const Region& b) const { return diff_volume(a, b) > 0.5 * total_; }

  // A step is accepted once its two ternary points confirm it: every third is
  // close and the three choices compose to the choice of the whole step.
  void refine(const PathSegment& seg, double s0, double s1, const Region& r0, const Region& r1, int depth) {
    if (stats_) stats_->depth = std::max(stats_->depth, depth);
    const double h = (s1 - s0) / 3.0;
    Region a = eval(seg, s0 + h), b = eval(seg, s0 + 2 * h);
    const double lim = bound_ * total_;
    const bool close = lighter(r0, r1) < lim && lighter(r0, a) < lim && lighter(a, b) < lim && lighter(b, r1) < lim;
    if (close && (parity(r0, a) ^ parity(a, b) ^ parity(b, r1)) == parity(r0, r1)) {
      step(r0, a);
      step(a, b);
      step(b, r1);
      return;
    }
    if (depth >= max_depth_) throw RefinementBudget("loop step still too coarse at the refinement budget");
    refine(seg, s0, s0 + h, r0, a, depth + 1);
    refine(seg, s0 + h, s0 + 2 * h, a, b, depth + 1);
    refine(seg, s0 + 2 * h, s1, b, r1, depth + 1);
  }

  const ChainFamily& fam_;
  const AmbientComplex& K_;
  double bound_, total_;
  int max_depth_;
  LoopStats* stats_;
  int complements_ = 0;
};

}  // namespace

int loop_class(const ChainFamily& family, const std::vector<PathSegment>& loop, const LoopOptions& opt,
               LoopStats* stats) {
  if (family.backend != Backend::mesh) throw PreconditionFailed("loop_class needs a mesh family");
  if (loop.empty()) throw PreconditionFailed("empty loop");
  if (!(opt.step_fraction > 0.0 && opt.step_fraction < 0.5)) throw OutOfRange("step fraction must be in (0, 1/2)");
  const int value = LoopWalker(family, opt.step_fraction, opt.max_depth, stats).run(loop);
  if (opt.check_refinement) {
    const int finer = LoopWalker(family, 0.5 * opt.step_fraction, opt.max_depth + 1, nullptr).run(loop);
    if (finer != value) throw RefinementBudget("almgren class changed under refinement");
  }
  return value;
}

bool is_sweepout(const ChainFamily& loop_family, const LoopOptions& opt) {
  std::vector<PathSegment> loop;
  for (int i = 0; i < 3; ++i)
    loop.push_back([i](double s) { return Eigen::VectorXd::Constant(1, (i + s) / 3.0); });
  return loop_class(loop_family, loop, opt) == 1;
}

nlohmann::json Detection::to_json() const {
  return {{"p", p},
          {"detected", detected},
          {"structural", structural},
          {"lambda_evaluations", lambda_values},
          {"lambda_cocycle", lambda},
          {"fineness_used", fineness_used},
          {"threshold_used", threshold_used}};
}

Detection is_p_sweepout(const ChainFamily& family, const ParamPtr& X, int p, const LoopOptions& opt) {
  if (p < 1) throw OutOfRange("p must be >= 1");
  Detection d;
  d.p = p;
  d.threshold_used = opt.step_fraction * family.model->complex()->total_volume();
  const auto H1 = homology(*X->chain_complex(), 1);
  const auto C1 = cohomology(X->chain_complex(), 1);
  if (H1.cycles.size() != C1.classes.size()) throw Error("H1 and H^1 ranks differ");
  for (const auto& z : H1.cycles) {
    int v = 0;
    for (const auto& loop : cycle_to_loops(*X, z)) {
      LoopStats stats;
      v ^= loop_class(family, loop_segments(*X, loop), opt, &stats);
      d.fineness_used = std::max(d.fineness_used, stats.max_step_mass);
    }
    d.lambda_values.push_back(v);
  }
  const std::size_t r = H1.cycles.size();
  if (r == 0 || std::none_of(d.lambda_values.begin(), d.lambda_values.end(), [](int v) { return v != 0; })) return d;
  std::vector<std::vector<std::uint8_t>> pairing(r, std::vector<std::uint8_t>(r));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) pairing[i][j] = static_cast<std::uint8_t>(evaluate(C1.classes[i], H1.cycles[j]));
  std::vector<std::uint8_t> rhs(d.lambda_values.begin(), d.lambda_values.end());
  const auto coeff = gf2::solve_left(pairing, rhs);
  for (std::size_t i = 0; i < r; ++i)
    if (coeff[i]) gf2::add_into(d.lambda, C1.classes[i].cochain);
  Triangulation T(X);
  CohomologyClass lambda{X->chain_complex(), nullptr, 1, d.lambda};
  d.detected = !is_zero(T.cup_power(T.from_cubical(lambda), p));
  return d;
}

Detection detect_projective(const ChainFamily& family, int p, const LoopOptions& opt) {
  if (p < 1) throw OutOfRange("p must be >= 1");
  Detection d;
  d.p = p;
  d.structural = true;
  d.threshold_used = opt.step_fraction * family.model->complex()->total_volume();
  // generator loop of the level-1 cube model: walk from the corner 0 to its antipode 1
  std::vector<PathSegment> gamma;
  const int m = p + 1;
  for (int axis = 0; axis < m; ++axis)
    for (int t = 0; t < 3; ++t)
      gamma.push_back([axis, t, m](double s) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
        x.head(axis).setOnes();
        x[axis] = (t + s) / 3.0;
        return Eigen::VectorXd((2.0 * x.array() - 1.0).matrix().normalized());
      });
  LoopStats stats;
  const int v = loop_class(family, gamma, opt, &stats);
  d.fineness_used = stats.max_step_mass;
  d.lambda_values = {v};
  d.detected = v == 1;
  return d;
}

std::vector<double> mass_concentration(const ChainFamily& family, const std::vector<double>& radii,
                                       const std::vector<Eigen::VectorXd>& params,
                                       const std::vector<Eigen::VectorXd>& centers) {
  std::vector<Mod2Chain> members;
  for (const auto& a : params) members.push_back(family(a));
  std::vector<double> out;
  for (double r : radii) {
    double sup = 0.0;
    for (const auto& c : centers) {
      auto ball = geodesic_ball(family.model, c, r);
      for (const auto& mbr : members) sup = std::max(sup, mass(restrict(mbr, ball)));
    }
    out.push_back(sup);
  }
  return out;
}

double calibrated_threshold(const std::vector<Mod2Chain>& cycles) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cycles.size(); ++i)
    for (std::size_t j = i + 1; j < cycles.size(); ++j) {
      const double d = flat_distance(cycles[i], cycles[j]);
      if (d > 1e-12) gap = std::min(gap, d);
    }
  if (!std::isfinite(gap)) throw PreconditionFailed("need two distinct cycles to calibrate");
  return 0.5 * gap;
}

RestrictDetect restrict_and_detect(const ChainFamily& family, const ParamPtr& X, const std::vector<Mod2Chain>& excluded,
                                   double eps, int p, bool check_hypothesis, const LoopOptions& opt) {
  if (excluded.empty()) throw PreconditionFailed("exclusion set is empty");
  RestrictDetect out;
  for (int v = 0; v < X->num_vertices(); ++v) {
    const auto val = family(param_point(*X, X->vertex_coords(v)));
    double d = std::numeric_limits<double>::infinity();
    for (const auto& T : excluded) d = std::min(d, flat_distance(val, T));
    out.distances.push_back(d);
  }
  out.Y = subcomplex_where(*X, [&](int v) { return out.distances[v] >= eps; });
  if (out.Y->empty()) throw PreconditionFailed("restricted parameter complex is empty");
  out.Z = closure_complement(*X, *out.Y);
  out.detection = is_p_sweepout(family, out.Y, p, opt);
  if (check_hypothesis) {
    out.hypothesis_checked = true;
    out.hypothesis_holds = true;
    if (!out.Z->empty())
      for (const auto& z : homology(*out.Z->chain_complex(), 1).cycles)
        for (const auto& loop : cycle_to_loops(*out.Z, z))
          if (loop_class(family, loop_segments(*out.Z, loop), opt) != 0) out.hypothesis_holds = false;
  }
  return out;
}

}  // namespace mmw
