#include "mmw/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace mmw {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::torus:
      return "torus";
    case ModelKind::sphere:
      return "sphere";
    case ModelKind::octahedron:
      return "octahedron";
  }
  return "?";
}

namespace {

// Gauss-Legendre nodes and weights on [0, 1].
constexpr int kQuad = 6;
constexpr std::array<double, kQuad> kNodes = {0.033765242898423975, 0.16939530676686776, 0.38069040695840156,
                                              0.6193095930415985,   0.8306046932331322,  0.966234757101576};
constexpr std::array<double, kQuad> kWeights = {0.08566224618958517, 0.18038078652406936, 0.2339569672863455,
                                                0.2339569672863455,  0.18038078652406936, 0.08566224618958517};

// Cells of an axis-aligned integer lattice, keyed by (base, axis mask).
class LatticeCells {
 public:
  LatticeCells(std::vector<int> extents, bool periodic)
      : L_(static_cast<int>(extents.size())),
        extents_(std::move(extents)),
        periodic_(periodic),
        stride_(*std::max_element(extents_.begin(), extents_.end()) + 1) {
    std::size_t n = 1;
    for (int i = 0; i < L_; ++i) n *= static_cast<std::size_t>(stride_);
    index_.assign(n << L_, -1);
  }

  std::size_t key(const std::vector<int>& base, unsigned mask) const {
    std::size_t lin = 0;
    for (int i = L_ - 1; i >= 0; --i) lin = lin * stride_ + static_cast<std::size_t>(base[i]);
    return (lin << L_) | mask;
  }
  int find(const std::vector<int>& base, unsigned mask) const { return index_[key(base, mask)]; }
  int insert(const std::vector<int>& base, unsigned mask, int dim) {
    auto& slot = index_[key(base, mask)];
    if (slot < 0) {
      slot = static_cast<int>(bases_[dim].size());
      bases_[dim].push_back(base);
      masks_[dim].push_back(mask);
    }
    return slot;
  }
  std::vector<int> shifted(std::vector<int> base, int axis) const {
    base[axis] += 1;
    if (periodic_) base[axis] %= extents_[axis];
    return base;
  }

  int L_;
  std::vector<int> extents_;
  bool periodic_;
  int stride_;
  std::vector<int> index_;
  std::vector<std::vector<std::vector<int>>> bases_;
  std::vector<std::vector<unsigned>> masks_;
};

// Enumerate lattice cells of every dimension 0..top satisfying `keep`, build faces.
template <class Keep>
void enumerate_cells(LatticeCells& lat, int top, Keep keep, ComplexData& data, AmbientModel::Data& md) {
  const int L = lat.L_;
  lat.bases_.assign(top + 1, {});
  lat.masks_.assign(top + 1, {});
  std::vector<int> base(L);
  for (int k = 0; k <= top; ++k) {
    for (unsigned mask = 0; mask < (1u << L); ++mask) {
      if (std::popcount(mask) != k) continue;
      // iterate over all bases
      std::vector<int> hi(L);
      for (int a = 0; a < L; ++a) hi[a] = lat.periodic_ || (mask >> a & 1u) ? lat.extents_[a] - 1 : lat.extents_[a];
      std::fill(base.begin(), base.end(), 0);
      while (true) {
        if (keep(base, mask)) lat.insert(base, mask, k);
        int a = 0;
        for (; a < L; ++a) {
          if (base[a] < hi[a]) {
            ++base[a];
            break;
          }
          base[a] = 0;
        }
        if (a == L) break;
      }
    }
  }
  data.counts.assign(top + 1, 0);
  data.faces.assign(top + 1, {});
  md.lattice_base.assign(top + 1, {});
  md.lattice_axes.assign(top + 1, {});
  for (int k = 0; k <= top; ++k) {
    const int n = static_cast<int>(lat.bases_[k].size());
    data.counts[k] = n;
    md.lattice_base[k].resize(L, n);
    md.lattice_axes[k] = lat.masks_[k];
    for (int c = 0; c < n; ++c) {
      const auto& b = lat.bases_[k][c];
      for (int a = 0; a < L; ++a) md.lattice_base[k](a, c) = b[a];
      if (k == 0) continue;
      const unsigned mask = lat.masks_[k][c];
      std::vector<int> row;
      for (int a = 0; a < L; ++a) {
        if (!(mask >> a & 1u)) continue;
        const unsigned sub = mask & ~(1u << a);
        int f0 = lat.find(b, sub), f1 = lat.find(lat.shifted(b, a), sub);
        if (f0 < 0 || f1 < 0) throw Error("lattice face missing");
        row.push_back(f0);
        row.push_back(f1);
      }
      data.faces[k].push(row);
    }
  }
}

}  // namespace

Eigen::VectorXd AmbientModel::lattice_to_point(const Eigen::VectorXd& lattice) const {
  const double g = data_.resolution;
  if (data_.kind == ModelKind::torus) {
    Eigen::VectorXd x = lattice / g;
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] -= std::floor(x[i]);
    return x;
  }
  if (data_.kind == ModelKind::sphere) {
    Eigen::VectorXd x = (-1.0 + 2.0 * lattice.array() / g).matrix();
    return x.normalized();
  }
  throw PreconditionFailed("model has no lattice chart");
}

ModelPtr build_torus_grid(const std::vector<int>& sizes) {
  const int D = static_cast<int>(sizes.size());
  if (D < 1 || D > 3) throw OutOfRange("torus grid dimension must be 1..3");
  const int g = *std::max_element(sizes.begin(), sizes.end());
  for (int s : sizes)
    if (s < 2) throw OutOfRange("torus grid needs at least 2 cells per axis");
  if (std::pow(static_cast<double>(g + 1), D) * (1 << D) > 5e7) throw OutOfRange("torus resolution too large");

  LatticeCells lat(sizes, true);
  ComplexData data;
  AmbientModel::Data md;
  data.dim = D;
  data.geometry = Geometry::flat_torus;
  enumerate_cells(
      lat, D,
      [](const std::vector<int>&, unsigned) { return true; },
      data, md);
  data.weights.resize(D + 1);
  data.barycenters.resize(D + 1);
  for (int k = 0; k <= D; ++k) {
    const int n = data.counts[k];
    data.weights[k].resize(n);
    data.barycenters[k].resize(D, n);
    for (int c = 0; c < n; ++c) {
      const unsigned mask = md.lattice_axes[k][c];
      double w = 1.0;
      for (int a = 0; a < D; ++a) {
        const bool along = mask >> a & 1u;
        if (along) w /= sizes[a];
        data.barycenters[k](a, c) = (md.lattice_base[k](a, c) + (along ? 0.5 : 0.0)) / sizes[a];
      }
      data.weights[k][c] = w;
    }
  }
  std::string id = "torus";
  for (int s : sizes) id += "-" + std::to_string(s);
  data.id = id;

  md.kind = ModelKind::torus;
  md.dim = D;
  md.resolution = g;
  md.lattice_dim = D;
  md.complex = std::make_shared<AmbientComplex>(std::move(data));
  Patch patch;
  for (int a = 0; a < D; ++a) patch.free_axes.push_back(a);
  md.patches = {patch};
  md.top_patch.assign(md.complex->num_top(), 0);
  md.packing_constant = 0.25;
  md.chart_lipschitz = 1.0;
  return std::make_shared<AmbientModel>(std::move(md));
}

ModelPtr build_torus(int n, int g) {
  if (n < 1 || n > 2) throw OutOfRange("torus: n must be 1 or 2");
  if (g < 2) throw OutOfRange("torus: resolution must be >= 2");
  return build_torus_grid(std::vector<int>(n + 1, g));
}

namespace {

double spiral_nn_constant(int d) {
  static std::map<int, double> cache;
  if (auto it = cache.find(d); it != cache.end()) return it->second;
  double c = std::numeric_limits<double>::infinity();
  for (int p = 2; p <= 128; ++p) {
    auto pts = sphere_spiral(d, p);
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j) m = std::min(m, std::acos(std::clamp(pts[i].dot(pts[j]), -1.0, 1.0)));
    c = std::min(c, m * std::pow(p, 1.0 / d));
  }
  cache[d] = c;
  return c;
}

// Max/min singular value ratio of the gnomonic face chart, sampled on one face.
double gnomonic_lipschitz(int d) {
  double smax = 0.0, smin = std::numeric_limits<double>::infinity();
  const int m = 9;
  std::vector<int> idx(d, 0);
  while (true) {
    Eigen::VectorXd y(d);
    for (int i = 0; i < d; ++i) y[i] = -1.0 + 2.0 * idx[i] / (m - 1);
    Eigen::VectorXd x(d + 1);
    x << 1.0, y;
    const double r = x.norm();
    // Jacobian of x/|x| restricted to the face directions
    Eigen::MatrixXd J(d + 1, d);
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(d + 1);
      e[j + 1] = 1.0;
      J.col(j) = e / r - x * (x[j + 1] / (r * r * r));
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    smax = std::max(smax, svd.singularValues().maxCoeff());
    smin = std::min(smin, svd.singularValues().minCoeff());
    int i = 0;
    for (; i < d; ++i) {
      if (++idx[i] < m) break;
      idx[i] = 0;
    }
    if (i == d) break;
  }
  return smax / smin;
}

}  // namespace

ModelPtr build_sphere(int d, int g) {
  if (d < 2 || d > 3) throw OutOfRange("sphere: d must be 2 or 3");
  if (g < 2) throw OutOfRange("sphere: resolution must be >= 2");
  if (g > 60) throw OutOfRange("sphere: resolution too large");
  const int L = d + 1;
  LatticeCells lat(std::vector<int>(L, g), false);
  ComplexData data;
  AmbientModel::Data md;
  data.dim = d;
  data.geometry = Geometry::round_sphere;
  enumerate_cells(
      lat, d,
      [&](const std::vector<int>& b, unsigned mask) {
        for (int a = 0; a < L; ++a)
          if (!(mask >> a & 1u) && (b[a] == 0 || b[a] == g)) return true;
        return false;
      },
      data, md);

  data.weights.resize(d + 1);
  data.barycenters.resize(d + 1);
  const double h = 2.0 / g;
  for (int k = 0; k <= d; ++k) {
    const int n = data.counts[k];
    data.weights[k].resize(n);
    data.barycenters[k].resize(L, n);
    for (int c = 0; c < n; ++c) {
      const unsigned mask = md.lattice_axes[k][c];
      Eigen::VectorXd lo(L), center(L);
      std::vector<int> along;
      for (int a = 0; a < L; ++a) {
        lo[a] = -1.0 + h * md.lattice_base[k](a, c);
        const bool on = mask >> a & 1u;
        center[a] = lo[a] + (on ? 0.5 * h : 0.0);
        if (on) along.push_back(a);
      }
      data.barycenters[k].col(c) = center.normalized();
      if (k == 0) {
        data.weights[k][c] = 1.0;
        continue;
      }
      double foot2 = 0.0;
      for (int a = 0; a < L; ++a)
        if (!(mask >> a & 1u)) foot2 += lo[a] * lo[a];
      const double foot = std::sqrt(foot2);
      // tensor Gauss-Legendre over the k varying axes
      double sum = 0.0;
      std::vector<int> q(k, 0);
      while (true) {
        double y2 = 0.0, w = 1.0;
        for (int i = 0; i < k; ++i) {
          const double y = lo[along[i]] + h * kNodes[q[i]];
          y2 += y * y;
          w *= kWeights[q[i]] * h;
        }
        sum += w * foot / std::pow(foot2 + y2, 0.5 * (k + 1));
        int i = 0;
        for (; i < k; ++i) {
          if (++q[i] < kQuad) break;
          q[i] = 0;
        }
        if (i == k) break;
      }
      data.weights[k][c] = sum;
    }
  }
  data.id = "sphere" + std::to_string(d) + "-" + std::to_string(g);

  md.kind = ModelKind::sphere;
  md.dim = d;
  md.resolution = g;
  md.lattice_dim = L;
  md.complex = std::make_shared<AmbientComplex>(std::move(data));
  for (int a = 0; a < L; ++a)
    for (int side : {0, g}) {
      Patch p;
      p.fixed_axis = a;
      p.fixed_value = side;
      for (int b = 0; b < L; ++b)
        if (b != a) p.free_axes.push_back(b);
      md.patches.push_back(p);
    }
  md.top_patch.resize(md.complex->num_top());
  for (int c = 0; c < md.complex->num_top(); ++c) {
    const unsigned mask = md.lattice_axes[d][c];
    for (int a = 0; a < L; ++a)
      if (!(mask >> a & 1u)) md.top_patch[c] = 2 * a + (md.lattice_base[d](a, c) == g ? 1 : 0);
  }
  md.packing_constant = 0.25 * spiral_nn_constant(d);
  md.chart_lipschitz = gnomonic_lipschitz(d);
  return std::make_shared<AmbientModel>(std::move(md));
}

ModelPtr build_octahedron() {
  ComplexData data;
  data.id = "octahedron";
  data.dim = 2;
  data.geometry = Geometry::euclidean;
  // vertices: 0:+x 1:-x 2:+y 3:-y 4:+z 5:-z
  Eigen::MatrixXd V(3, 6);
  V << 1, -1, 0, 0, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0, 0, 0, 1, -1;
  std::vector<std::array<int, 2>> edges;
  std::map<std::pair<int, int>, int> edge_index;
  auto edge = [&](int a, int b) {
    auto key = std::minmax(a, b);
    auto it = edge_index.find(key);
    if (it != edge_index.end()) return it->second;
    edges.push_back({key.first, key.second});
    return edge_index[key] = static_cast<int>(edges.size()) - 1;
  };
  // equator edges first so the equator cycle is {0,1,2,3}
  edge(0, 2);
  edge(2, 1);
  edge(1, 3);
  edge(3, 0);
  std::vector<std::array<int, 3>> tris;
  for (int pole : {4, 5})
    for (auto [a, b] : {std::pair{0, 2}, std::pair{2, 1}, std::pair{1, 3}, std::pair{3, 0}}) tris.push_back({a, b, pole});
  Incidence tri_faces;
  for (const auto& t : tris) {
    std::array<int, 3> row{edge(t[0], t[1]), edge(t[1], t[2]), edge(t[2], t[0])};
    tri_faces.push(row);
  }
  Incidence edge_faces;
  for (const auto& e : edges) edge_faces.push(e);

  data.counts = {6, static_cast<int>(edges.size()), static_cast<int>(tris.size())};
  data.faces = {Incidence{}, edge_faces, tri_faces};
  data.weights = {std::vector<double>(6, 1.0), std::vector<double>(edges.size(), std::sqrt(2.0)),
                  std::vector<double>(tris.size(), std::sqrt(3.0) / 2.0)};
  data.barycenters = {V, Eigen::MatrixXd(3, edges.size()), Eigen::MatrixXd(3, tris.size())};
  for (std::size_t e = 0; e < edges.size(); ++e)
    data.barycenters[1].col(e) = 0.5 * (V.col(edges[e][0]) + V.col(edges[e][1]));
  for (std::size_t t = 0; t < tris.size(); ++t)
    data.barycenters[2].col(t) = (V.col(tris[t][0]) + V.col(tris[t][1]) + V.col(tris[t][2])) / 3.0;

  AmbientModel::Data md;
  md.kind = ModelKind::octahedron;
  md.dim = 2;
  md.resolution = 1;
  md.lattice_dim = 0;
  md.complex = std::make_shared<AmbientComplex>(std::move(data));
  md.packing_constant = 0.25 * spiral_nn_constant(2);
  return std::make_shared<AmbientModel>(std::move(md));
}

ScalarField linear_field(const ModelPtr& model, const Eigen::VectorXd& v) {
  const auto& K = *model->complex();
  if (v.size() != model->embedding_dim()) throw DimensionMismatch("direction has the wrong dimension");
  ScalarField f{model, v, K.barycenters(0).transpose() * v, K.barycenters(K.dim()).transpose() * v};
  return f;
}

namespace {
bool all_distinct(Eigen::VectorXd values) {
  std::sort(values.data(), values.data() + values.size());
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 1; i < values.size(); ++i)
    if (values[i] - values[i - 1] <= 1e-10 * scale) return false;
  return true;
}
}  // namespace

bool is_morse(const ScalarField& f) { return all_distinct(f.vertex_values) && all_distinct(f.cell_values); }

ScalarField morse_direction(const ModelPtr& model, std::uint64_t seed, int retries) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int attempt = 0; attempt < retries; ++attempt) {
    Eigen::VectorXd v(model->embedding_dim());
    for (auto& x : v) x = normal(rng);
    v.normalize();
    auto f = linear_field(model, v);
    if (is_morse(f)) return f;
  }
  throw RefinementBudget("morse_direction: no tie-free direction within the retry budget");
}

Mod2Chain sublevel_region(const ScalarField& f, double t) {
  const auto& c = f.cell_values;
  const double tol = 1e-12 * std::max(1.0, std::abs(t));
  Region r(c.size(), 0);
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (std::abs(c[i] - t) <= tol) throw DegenerateLevel("level passes through a cell center");
    r[i] = c[i] < t;
  }
  return Mod2Chain::from_region(f.model->complex(), r);
}

Mod2Chain level_cycle(const ScalarField& f, double t) { return boundary(sublevel_region(f, t)); }

PointPredicate geodesic_ball(const ModelPtr& model, const Eigen::VectorXd& center, double r) {
  const auto& K = *model->complex();
  if (!(r > 0.0) || r >= 0.5 * K.diameter()) throw OutOfRange("ball radius outside (0, diameter/2)");
  ComplexPtr complex = model->complex();
  return [complex, center, r](const PointRef& x) { return complex->distance(x, center) <= r; };
}

Region ball_region(const ModelPtr& model, const Eigen::VectorXd& center, double r) {
  auto in = geodesic_ball(model, center, r);
  const auto& B = model->complex()->barycenters(model->dim());
  Region out(B.cols(), 0);
  for (Eigen::Index c = 0; c < B.cols(); ++c) out[c] = in(B.col(c));
  return out;
}

std::vector<Eigen::VectorXd> sphere_spiral(int d, int p) {
  std::vector<Eigen::VectorXd> pts;
  if (d == 2) {
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    for (int i = 0; i < p; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / p;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = 2.0 * std::numbers::pi * i / golden;
      Eigen::VectorXd x(3);
      x << rho * std::cos(phi), rho * std::sin(phi), z;
      pts.push_back(x);
    }
  } else if (d == 3) {
    // area-uniform Hopf-type coordinates with a two-dimensional golden sequence
    const double plastic = 1.324717957244746;
    const double a1 = 1.0 / plastic, a2 = 1.0 / (plastic * plastic);
    for (int i = 0; i < p; ++i) {
      const double s = (i + 0.5) / p;
      const double t1 = 2.0 * std::numbers::pi * std::fmod(0.5 + i * a1, 1.0);
      const double t2 = 2.0 * std::numbers::pi * std::fmod(0.5 + i * a2, 1.0);
      Eigen::VectorXd x(4);
      x << std::sqrt(s) * std::cos(t1), std::sqrt(s) * std::sin(t1), std::sqrt(1 - s) * std::cos(t2),
          std::sqrt(1 - s) * std::sin(t2);
      pts.push_back(x);
    }
  } else {
    throw OutOfRange("spiral points only for S^2 and S^3");
  }
  return pts;
}

double min_separation(const ModelPtr& model, const std::vector<Eigen::VectorXd>& centers) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j)
      m = std::min(m, model->complex()->distance(centers[i], centers[j]));
  return m;
}

BallPacking ball_packing(const ModelPtr& model, int p) {
  if (p < 1) throw OutOfRange("packing needs p >= 1");
  const int D = model->dim();
  BallPacking out;
  out.nu = model->packing_constant();
  if (model->kind() == ModelKind::torus) {
    int q = static_cast<int>(std::ceil(std::pow(static_cast<double>(p), 1.0 / D) - 1e-9));
    std::vector<int> idx(D, 0);
    while (static_cast<int>(out.centers.size()) < p) {
      Eigen::VectorXd c(D);
      for (int a = 0; a < D; ++a) c[a] = static_cast<double>(idx[D - 1 - a]) / q;
      out.centers.push_back(c);
      for (int a = 0; a < D; ++a) {
        if (++idx[a] < q) break;
        idx[a] = 0;
      }
    }
  } else if (model->kind() == ModelKind::sphere) {
    out.centers = sphere_spiral(D, p);
  } else {
    throw PreconditionFailed("ball_packing: unsupported model");
  }
  out.radius = out.nu * std::pow(static_cast<double>(p), -1.0 / D);
  const double sep = min_separation(model, out.centers);
  for (int retry = 0; retry < 20; ++retry) {
    if (p == 1 || sep > 2.0 * out.radius) return out;
    out.radius *= 0.9;
  }
  throw RefinementBudget("ball_packing: could not make the balls disjoint");
}

}  // namespace mmw
