#include "mmw/sweepouts.hpp"

#include <unsupported/Eigen/Polynomials>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace mmw {

namespace {

double chebyshev_sum(const Eigen::VectorXd& a, double x) {
  // Clenshaw recurrence
  double b1 = 0.0, b2 = 0.0;
  for (Eigen::Index i = a.size() - 1; i >= 1; --i) {
    const double b0 = a[i] + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return a[0] + x * b1 - b2;
}

double monomial_sum(const Eigen::VectorXd& a, double x) {
  double s = 0.0;
  for (Eigen::Index i = a.size() - 1; i >= 0; --i) s = s * x + a[i];
  return s;
}

nlohmann::json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Range mapped onto [-1,1]. The margins are unequal so that lattice-symmetric
// cells do not land on 0, where parameters with zero entries vanish.
std::pair<double, double> rescale_range(const ScalarField& f) {
  const double lo = std::min(f.vertex_values.minCoeff(), f.min());
  const double hi = std::max(f.vertex_values.maxCoeff(), f.max());
  const double w = hi - lo;
  return {lo - 0.0137 * w, hi + 0.0291 * w};
}

}  // namespace

double rescale(const ScalarField& f, double t) {
  const auto [lo, hi] = rescale_range(f);
  return (2.0 * t - (hi + lo)) / (hi - lo);
}

ChainFamily linear_sweepout(const ScalarField& f) {
  ChainFamily fam;
  fam.kind = "linear-sweepout";
  fam.p = 1;
  fam.model = f.model;
  fam.field = [f](const PointRef& x) { return f(x); };
  fam.sample_values = f.cell_values;
  fam.rule = [](const Eigen::VectorXd& a, double t) {
    const double th = std::numbers::pi * a[0];
    return std::sin(th) * t + std::cos(th);
  };
  fam.descriptor = {{"kind", fam.kind}, {"model", f.model->id()}, {"direction", vec_json(f.direction)},
                    {"p", 1}, {"backend", "mesh"}};
  return fam;
}

ChainFamily guth_family(const ScalarField& f, int p, PolyBasis basis) {
  if (p < 1) throw OutOfRange("guth_family needs p >= 1");
  if (!is_morse(f)) throw PreconditionFailed("field is not Morse");
  ChainFamily fam;
  fam.kind = "guth";
  fam.p = p;
  fam.model = f.model;
  fam.field = [f](const PointRef& x) { return f(x); };
  fam.sample_values = f.cell_values;
  const auto [lo, hi] = rescale_range(f);
  fam.rule = [p, basis, lo, hi](const Eigen::VectorXd& a, double t) {
    if (a.size() != p + 1) throw DimensionMismatch("parameter length must be p + 1");
    const double x = (2.0 * t - (hi + lo)) / (hi - lo);
    return basis == PolyBasis::chebyshev ? chebyshev_sum(a, x) : monomial_sum(a, x);
  };
  fam.from_roots = [p, basis, lo, hi](const std::vector<double>& roots) {
    if (static_cast<int>(roots.size()) > p) throw OutOfRange("more roots than the degree");
    // product of (x - x_j), built in the chosen basis; x T_i = (T_(i+1) + T_|i-1|) / 2
    Eigen::VectorXd c = Eigen::VectorXd::Zero(p + 1);
    c[0] = 1.0;
    for (std::size_t j = 0; j < roots.size(); ++j) {
      const double x = (2.0 * roots[j] - (hi + lo)) / (hi - lo);
      Eigen::VectorXd next = -x * c;
      for (int i = 0; i < p; ++i) {
        if (c[i] == 0.0) continue;
        if (basis == PolyBasis::monomial) {
          next[i + 1] += c[i];
        } else if (i == 0) {
          next[1] += c[0];
        } else {
          next[i + 1] += 0.5 * c[i];
          next[i - 1] += 0.5 * c[i];
        }
      }
      c = next;
    }
    return Eigen::VectorXd(c.normalized());
  };
  fam.descriptor = {{"kind", fam.kind},
                    {"model", f.model->id()},
                    {"direction", vec_json(f.direction)},
                    {"p", p},
                    {"basis", basis == PolyBasis::chebyshev ? "chebyshev" : "monomial"},
                    {"backend", "mesh"}};
  return fam;
}

ChainFamily constant_family(const ModelPtr& model, const Region& region, int p) {
  if (static_cast<int>(region.size()) != model->complex()->num_top()) throw DimensionMismatch("region size");
  ChainFamily fam;
  fam.kind = "constant";
  fam.p = p;
  fam.model = model;
  fam.region_fn = [region](const Eigen::VectorXd&) { return region; };
  fam.descriptor = {{"kind", fam.kind}, {"model", model->id()}, {"p", p}, {"backend", "mesh"},
                    {"cells", std::count(region.begin(), region.end(), 1)}};
  return fam;
}

ChainFamily eigenfunction_family(const std::vector<Quadratic>& harmonics) {
  if (harmonics.size() < 2) throw PreconditionFailed("need at least two functions");
  Eigen::MatrixXd coeff(15, harmonics.size());
  for (std::size_t i = 0; i < harmonics.size(); ++i) {
    const auto& h = harmonics[i];
    Eigen::VectorXd col(15);
    col[0] = h.c;
    col.segment(1, 4) = h.b;
    int r = 5;
    for (int a = 0; a < 4; ++a)
      for (int b = a; b < 4; ++b) col[r++] = a == b ? h.Q(a, a) : h.Q(a, b) + h.Q(b, a);
    coeff.col(i) = col;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(coeff);
  lu.setThreshold(1e-10);
  if (lu.rank() != static_cast<int>(harmonics.size())) throw PreconditionFailed("functions are linearly dependent");
  ChainFamily fam;
  fam.kind = "eigenfunction";
  fam.backend = Backend::crofton;
  fam.p = static_cast<int>(harmonics.size()) - 1;
  fam.member = [harmonics](const Eigen::VectorXd& a) { return combine(harmonics, a); };
  nlohmann::json desc = nlohmann::json::array();
  for (Eigen::Index i = 0; i < coeff.cols(); ++i) desc.push_back(vec_json(coeff.col(i)));
  fam.descriptor = {{"kind", fam.kind}, {"model", "S3"}, {"harmonics", desc}, {"p", fam.p}, {"backend", "crofton"}};
  return fam;
}

Eigen::VectorXd monomial_coefficients(const Eigen::VectorXd& a, PolyBasis basis) {
  if (basis == PolyBasis::monomial) return a;
  const Eigen::Index n = a.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(n), cur = Eigen::VectorXd::Zero(n);
  prev[0] = 1.0;
  out += a[0] * prev;
  if (n > 1) {
    cur[1] = 1.0;
    out += a[1] * cur;
  }
  for (Eigen::Index i = 2; i < n; ++i) {
    Eigen::VectorXd next = -prev;
    for (Eigen::Index j = 0; j + 1 < n; ++j) next[j + 1] += 2.0 * cur[j];
    out += a[i] * next;
    prev = cur;
    cur = next;
  }
  return out;
}

std::vector<double> real_roots(const Eigen::VectorXd& a, PolyBasis basis) {
  Eigen::VectorXd c = monomial_coefficients(a, basis);
  const double scale = c.cwiseAbs().maxCoeff();
  if (scale == 0.0) throw PreconditionFailed("zero polynomial");
  Eigen::Index deg = c.size() - 1;
  while (deg > 0 && std::abs(c[deg]) <= 1e-13 * scale) --deg;
  std::vector<double> out;
  if (deg == 0) return out;
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(c.head(deg + 1));
  for (const auto& z : solver.roots())
    if (std::abs(z.imag()) <= 1e-5 * std::max(1.0, std::abs(z.real())) && std::abs(z.real()) <= 1.0)
      out.push_back(z.real());
  std::sort(out.begin(), out.end());
  return out;
}

// BendMap

double BendMap::cutoff(double t) {
  if (t <= 0.5) return 1.0;
  if (t >= 1.0) return 0.0;
  const double u = 2.0 * t - 1.0;
  return 1.0 - u * u * (3.0 - 2.0 * u);
}

double BendMap::profile(double r) const { return 1.0 - cutoff(r / delta) * (1.0 - r); }

double BendMap::profile_inverse(double s) const {
  if (s < 0.0 || s >= 1.0) throw OutOfRange("profile_inverse needs s in [0,1)");
  if (s <= 0.5 * delta) return s;
  double lo = 0.5 * delta, hi = delta;
  for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (profile(mid) < s ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd BendMap::apply(const Eigen::VectorXd& y) const {
  const double r = y.cwiseAbs().maxCoeff();
  if (r == 0.0) return y;
  return y * (profile(r) / r);
}

Eigen::VectorXd BendMap::inverse(const Eigen::VectorXd& y) const {
  const double s = y.cwiseAbs().maxCoeff();
  if (s == 0.0) return y;
  return y * (profile_inverse(s) / s);
}

Eigen::VectorXd BendMap::normalized(const Eigen::VectorXd& z, unsigned mask, const Eigen::VectorXd& hint) const {
  Eigen::VectorXd y(std::popcount(mask));
  int j = 0;
  for (Eigen::Index a = 0; a < z.size(); ++a)
    if (mask >> a & 1u) {
      const double lo = std::floor(hint[a] / cell) * cell;
      y[j++] = 2.0 * (z[a] - lo) / cell - 1.0;
    }
  return y;
}

namespace {

Eigen::VectorXd denormalize(const BendMap& F, const Eigen::VectorXd& y, const Eigen::VectorXd& z, unsigned mask,
                            const Eigen::VectorXd& hint) {
  Eigen::VectorXd out = z;
  int j = 0;
  for (Eigen::Index a = 0; a < z.size(); ++a)
    if (mask >> a & 1u) {
      const double lo = std::floor(hint[a] / F.cell) * F.cell;
      out[a] = lo + 0.5 * (y[j++] + 1.0) * F.cell;
    }
  return out;
}

}  // namespace

Eigen::VectorXd BendMap::apply_lattice(const Eigen::VectorXd& z, unsigned mask, const Eigen::VectorXd& hint) const {
  return denormalize(*this, apply(normalized(z, mask, hint)), z, mask, hint);
}

Eigen::VectorXd BendMap::preimage_lattice(const Eigen::VectorXd& z, unsigned mask) const {
  return denormalize(*this, inverse(normalized(z, mask, z)), z, mask, z);
}

double bend_eps_max(const ModelPtr& model) { return 0.25 / model->chart_lipschitz(); }

BendMap bend_and_cancel(const ModelPtr& model, int k, std::optional<double> eps_opt) {
  if (!model->has_chart()) throw PreconditionFailed("model has no cube chart");
  const double eps = eps_opt.value_or(bend_eps_max(model));
  if (!(eps > 0.0 && eps <= bend_eps_max(model) * (1 + 1e-12))) throw OutOfRange("bend parameter out of range");
  if (k < 0) throw OutOfRange("k must be >= 0");
  const int g = model->resolution();
  const int cells = static_cast<int>(std::lround(std::pow(3.0, k)));
  if (g % cells != 0) throw PreconditionFailed("grid resolution is not divisible by 3^k");
  if (model->kind() == ModelKind::torus &&
      model->complex()->num_top() != static_cast<int>(std::lround(std::pow(g, model->dim()))))
    throw PreconditionFailed("bend needs a cubical torus grid");
  BendMap F;
  F.model = model;
  F.k = k;
  F.eps = eps;
  F.delta = 2.0 * eps * model->chart_lipschitz();
  F.cell = g / cells;
  F.cell_chart = F.cell * (model->kind() == ModelKind::sphere ? 2.0 : 1.0) / g;
  return F;
}

int bend_level(int p, int n) {
  if (p < 1) throw OutOfRange("p must be >= 1");
  const double root = std::pow(static_cast<double>(p), 1.0 / (n + 1));
  int k = 0;
  while (std::pow(3.0, k + 1) <= root + 1e-12) ++k;
  return k;
}

namespace {

Eigen::VectorXd top_centre(const AmbientModel& M, int c) {
  const int D = M.dim();
  Eigen::VectorXd z = M.lattice_base(D, c).cast<double>();
  const unsigned mask = M.lattice_axes(D, c);
  for (Eigen::Index a = 0; a < z.size(); ++a)
    if (mask >> a & 1u) z[a] += 0.5;
  return z;
}

Eigen::VectorXd facet_centre(const AmbientModel& M, int f) {
  const int D = M.dim() - 1;
  Eigen::VectorXd z = M.lattice_base(D, f).cast<double>();
  const unsigned mask = M.lattice_axes(D, f);
  for (Eigen::Index a = 0; a < z.size(); ++a)
    if (mask >> a & 1u) z[a] += 0.5;
  return z;
}

bool on_skeleton(const BendMap& F, int facet) {
  const auto& M = *F.model;
  const auto base = M.lattice_base(M.dim() - 1, facet);
  const unsigned mask = M.lattice_axes(M.dim() - 1, facet);
  for (int a = 0; a < M.lattice_dim(); ++a)
    if (!(mask >> a & 1u) && base[a] % F.cell != 0) return false;
  return true;
}

}  // namespace

ChainFamily pushforward(const BendMap& F, const ChainFamily& psi) {
  if (psi.backend != Backend::mesh) throw PreconditionFailed("pushforward needs a mesh family");
  if (psi.model != F.model) throw PreconditionFailed("family and bend map live on different models");
  if (F.cell % 3 != 0) throw PreconditionFailed("grid must be refined at least one level below k");
  const auto& M = *F.model;
  const int D = M.dim();
  const int n = M.complex()->num_top();
  ChainFamily phi = psi;
  phi.kind = "pushforward(" + psi.kind + ")";
  phi.descriptor = {{"kind", "pushforward"}, {"source", psi.descriptor}, {"k", F.k}, {"eps", F.eps},
                    {"delta", F.delta}, {"model", M.id()}, {"p", psi.p}, {"backend", "mesh"}};
  std::vector<Eigen::VectorXd> pre(n);
  for (int c = 0; c < n; ++c) pre[c] = F.preimage_lattice(top_centre(M, c), M.lattice_axes(D, c));
  if (psi.field_based()) {
    if (!psi.field) throw PreconditionFailed("field-based family without its field");
    phi.sample_values.resize(n);
    for (int c = 0; c < n; ++c) phi.sample_values[c] = psi.field(M.lattice_to_point(pre[c]));
    return phi;
  }
  // transport by cell lookup: the source cell containing the preimage centre
  std::map<std::pair<std::vector<int>, unsigned>, int> index;
  for (int c = 0; c < n; ++c) {
    const auto b = M.lattice_base(D, c);
    index[{std::vector<int>(b.data(), b.data() + b.size()), M.lattice_axes(D, c)}] = c;
  }
  std::vector<int> source(n);
  for (int c = 0; c < n; ++c) {
    const unsigned mask = M.lattice_axes(D, c);
    std::vector<int> b(M.lattice_dim());
    for (int a = 0; a < M.lattice_dim(); ++a)
      b[a] = (mask >> a & 1u) ? static_cast<int>(std::floor(pre[c][a])) : M.lattice_base(D, c)[a];
    source[c] = index.at({b, mask});
  }
  auto inner = psi.region_fn;
  phi.region_fn = [inner, source](const Eigen::VectorXd& a) {
    const Region r = inner(a);
    Region out(source.size());
    for (std::size_t c = 0; c < source.size(); ++c) out[c] = r[source[c]];
    return out;
  };
  return phi;
}

SkeletonCheck skeleton_check(const BendMap& F, const ChainFamily& psi, const ChainFamily& phi,
                             const std::vector<Eigen::VectorXd>& params) {
  const auto& M = *F.model;
  const auto& K = *M.complex();
  const int D = M.dim();
  SkeletonCheck out;
  for (const auto& a : params) {
    const auto pushed = phi(a);
    for (int f : pushed.cells()) {
      ++out.facets;
      if (on_skeleton(F, f)) continue;
      const int top = K.cofaces(f)[0];
      const Eigen::VectorXd z = facet_centre(M, f);
      const auto y = F.normalized(z, M.lattice_axes(D, top), top_centre(M, top));
      if (y.cwiseAbs().maxCoeff() >= 1.0 || F.inverse(y).cwiseAbs().maxCoeff() > F.delta + 1e-12) ++out.violations;
    }
    const auto source = psi(a);
    for (int f : source.cells()) {
      const int top = K.cofaces(f)[0];
      const auto y = F.normalized(facet_centre(M, f), M.lattice_axes(D, top), top_centre(M, top));
      if (y.cwiseAbs().maxCoeff() < F.delta) continue;
      ++out.outer_facets;
      if (std::abs(F.apply(y).cwiseAbs().maxCoeff() - 1.0) > 1e-12) ++out.outer_violations;
    }
  }
  return out;
}

Expansion measure_expansion(const BendMap& F, int grid) {
  const auto& M = *F.model;
  const auto& K = *M.complex();
  const int D = M.dim();
  const double h = 1e-5;
  // one coarse cell per patch suffices on the torus; the sphere charts vary, so visit all coarse cells
  std::map<std::pair<std::vector<int>, unsigned>, int> coarse;
  for (int c = 0; c < M.complex()->num_top(); ++c) {
    const auto b = M.lattice_base(D, c);
    std::vector<int> key(b.size());
    for (Eigen::Index a = 0; a < b.size(); ++a) key[a] = b[a] / F.cell;
    coarse.emplace(std::make_pair(key, M.lattice_axes(D, c)), c);
    if (M.kind() == ModelKind::torus) break;
  }
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < D; ++i) dirs.push_back(Eigen::VectorXd::Unit(D, i));
  for (int i = 0; i < D; ++i)
    for (int j = i + 1; j < D; ++j) {
      dirs.push_back((Eigen::VectorXd::Unit(D, i) + Eigen::VectorXd::Unit(D, j)).normalized());
      dirs.push_back((Eigen::VectorXd::Unit(D, i) - Eigen::VectorXd::Unit(D, j)).normalized());
    }
  Expansion out;
  for (const auto& [key, c] : coarse) {
    const unsigned mask = M.lattice_axes(D, c);
    const Eigen::VectorXd hint = top_centre(M, c);
    auto embed = [&](const Eigen::VectorXd& y) {
      Eigen::VectorXd z = hint;
      int j = 0;
      for (Eigen::Index a = 0; a < z.size(); ++a)
        if (mask >> a & 1u) z[a] = std::floor(hint[a] / F.cell) * F.cell + 0.5 * (y[j++] + 1.0) * F.cell;
      return M.lattice_to_point(z);
    };
    std::vector<int> idx(D, 0);
    while (true) {
      Eigen::VectorXd y(D);
      for (int i = 0; i < D; ++i) y[i] = -1.0 + (2.0 * idx[i] + 1.0) / grid;
      for (const auto& d : dirs) {
        const Eigen::VectorXd y0 = y - h * d, y1 = y + h * d;
        const double num = K.distance(embed(F.apply(y1)), embed(F.apply(y0)));
        const double den = K.distance(embed(y1), embed(y0));
        out.max_derivative = std::max(out.max_derivative, num / den);
      }
      int i = 0;
      while (i < D && ++idx[i] == grid) idx[i++] = 0;
      if (i == D) break;
    }
  }
  out.c1 = F.eps * out.max_derivative;
  return out;
}

double skeleton_mass(const BendMap& F) {
  const auto& K = *F.model->complex();
  double m = 0.0;
  for (int f = 0; f < K.num_facets(); ++f)
    if (on_skeleton(F, f)) m += K.weight(K.dim() - 1, f);
  return m;
}

std::vector<std::pair<double, double>> central_ranges(const BendMap& F, const ScalarField& f) {
  const auto& M = *F.model;
  const int D = M.dim();
  std::map<std::pair<std::vector<int>, unsigned>, std::pair<double, double>> ranges;
  for (int c = 0; c < M.complex()->num_top(); ++c) {
    const auto b = M.lattice_base(D, c);
    std::vector<int> key(b.size());
    for (Eigen::Index a = 0; a < b.size(); ++a) key[a] = b[a] / F.cell;
    const unsigned mask = M.lattice_axes(D, c);
    if (ranges.count({key, mask})) continue;
    const Eigen::VectorXd hint = top_centre(M, c);
    double lo = INFINITY, hi = -INFINITY;
    const int steps = 4;
    std::vector<int> idx(D, 0);
    while (true) {
      Eigen::VectorXd z = hint;
      int j = 0;
      for (Eigen::Index a = 0; a < z.size(); ++a)
        if (mask >> a & 1u) {
          const double y = F.delta * (-1.0 + 2.0 * idx[j++] / steps);
          z[a] = std::floor(hint[a] / F.cell) * F.cell + 0.5 * (y + 1.0) * F.cell;
        }
      const double v = f(M.lattice_to_point(z));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      int i = 0;
      while (i < D && ++idx[i] == steps + 1) idx[i++] = 0;
      if (i == D) break;
    }
    ranges[{key, mask}] = {lo, hi};
  }
  std::vector<std::pair<double, double>> out;
  for (const auto& [key, r] : ranges) out.push_back(r);
  return out;
}

namespace {

int max_overlap(const std::vector<std::pair<double, double>>& ranges) {
  std::vector<std::pair<double, int>> events;
  for (const auto& r : ranges) {
    events.push_back({r.first, 1});
    events.push_back({r.second, -1});
  }
  std::sort(events.begin(), events.end(), [](auto& a, auto& b) { return a.first < b.first || (a.first == b.first && a.second > b.second); });
  int depth = 0, best = 0;
  for (const auto& e : events) best = std::max(best, depth += e.second);
  return best;
}

}  // namespace

int level_overlap(const BendMap& F, const ScalarField& f) { return max_overlap(central_ranges(F, f)); }

double separating_eps(const ModelPtr& model, const ScalarField& f, int k, double floor) {
  double hi = bend_eps_max(model);
  if (level_overlap(bend_and_cancel(model, k, hi), f) <= 1) return hi;
  double lo = hi * floor;
  if (level_overlap(bend_and_cancel(model, k, lo), f) > 1) return lo;
  for (int it = 0; it < 30; ++it) {
    const double mid = std::sqrt(lo * hi);
    (level_overlap(bend_and_cancel(model, k, mid), f) <= 1 ? lo : hi) = mid;
  }
  return lo;
}

MassBudget mass_budget(const BendMap& F, const ScalarField& f, int p) {
  const auto& M = *F.model;
  const int n = M.dim() - 1;
  MassBudget out;
  out.c1 = measure_expansion(F).c1;
  out.skeleton_mass = skeleton_mass(F);
  out.c3 = out.skeleton_mass / std::pow(3.0, F.k);
  out.balls_per_level = level_overlap(F, f);
  const double omega = n == 1 ? 2.0 : n == 2 ? std::numbers::pi : 4.0 * std::numbers::pi / 3.0;
  out.bent_term = 2.0 * p * out.balls_per_level * omega * std::pow(out.c1 * M.chart_lipschitz() * F.cell_chart, n);
  out.skeleton_term = out.c3 * std::pow(3.0, F.k);
  return out;
}

std::vector<PathSegment> projective_loop(const Eigen::VectorXd& u, const Eigen::VectorXd& w, bool full_turn) {
  const Eigen::VectorXd e1 = u.normalized();
  Eigen::VectorXd e2 = w - w.dot(e1) * e1;
  if (e2.norm() < 1e-12) throw PreconditionFailed("loop directions are parallel");
  e2.normalize();
  const int pieces = full_turn ? 6 : 3;
  const double span = full_turn ? 2.0 : 1.0;
  std::vector<PathSegment> out;
  for (int i = 0; i < pieces; ++i)
    out.push_back([=](double s) {
      const double th = std::numbers::pi * span * (i + s) / pieces;
      return Eigen::VectorXd(std::cos(th) * e1 + std::sin(th) * e2);
    });
  return out;
}

}  // namespace mmw
