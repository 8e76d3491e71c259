#include "mmw/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

namespace mmw {

void Incidence::push(std::span<const int> row) {
  index_.insert(index_.end(), row.begin(), row.end());
  offsets_.push_back(static_cast<int>(index_.size()));
}

AmbientComplex::AmbientComplex(ComplexData data) : data_(std::move(data)) {
  const int top = data_.dim;
  if (top < 1) throw DimensionMismatch("ambient complex must have dimension >= 1");
  if (static_cast<int>(data_.counts.size()) != top + 1 ||
      static_cast<int>(data_.faces.size()) != top + 1 ||
      static_cast<int>(data_.weights.size()) != top + 1 ||
      static_cast<int>(data_.barycenters.size()) != top + 1)
    throw Error("ambient complex: per-dimension tables have the wrong length");

  for (int k = 0; k <= top; ++k) {
    if (static_cast<int>(data_.weights[k].size()) != data_.counts[k] ||
        data_.barycenters[k].cols() != data_.counts[k])
      throw Error("ambient complex: table size mismatch in dimension " + std::to_string(k));
    for (double w : data_.weights[k])
      if (!(w > 0.0) || !std::isfinite(w)) throw Error("ambient complex: non-positive weight");
    if (k >= 1) {
      if (data_.faces[k].size() != data_.counts[k]) throw Error("ambient complex: face table size");
      for (int c = 0; c < data_.counts[k]; ++c)
        for (int f : data_.faces[k][c])
          if (f < 0 || f >= data_.counts[k - 1]) throw Error("ambient complex: face index out of range");
    }
  }

  // boundary of boundary
  for (int k = 2; k <= top; ++k) {
    std::vector<std::uint8_t> parity(data_.counts[k - 2], 0);
    for (int c = 0; c < data_.counts[k]; ++c) {
      for (int f : data_.faces[k][c])
        for (int g : data_.faces[k - 1][f]) parity[g] ^= 1;
      for (int f : data_.faces[k][c])
        for (int g : data_.faces[k - 1][f])
          if (parity[g]) throw Error("ambient complex: boundary of boundary is nonzero");
    }
  }

  // closed-manifold condition
  std::vector<std::vector<int>> co(data_.counts[top - 1]);
  for (int c = 0; c < data_.counts[top]; ++c)
    for (int f : data_.faces[top][c]) co[f].push_back(c);
  cofaces_.resize(co.size());
  for (std::size_t f = 0; f < co.size(); ++f) {
    if (co[f].size() != 2 || co[f][0] == co[f][1])
      throw Error("ambient complex: facet " + std::to_string(f) + " does not have exactly two cofaces");
    cofaces_[f] = {co[f][0], co[f][1]};
  }

  for (double v : data_.weights[top]) total_volume_ += v;

  // dual graph connectivity
  std::vector<std::uint8_t> seen(num_top(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int c = stack.back();
    stack.pop_back();
    for (int f : faces(top, c)) {
      const auto& cf = cofaces_[f];
      int other = cf[0] == c ? cf[1] : cf[0];
      if (!seen[other]) {
        seen[other] = 1;
        ++reached;
        stack.push_back(other);
      }
    }
  }
  dual_connected_ = reached == num_top();

  switch (data_.geometry) {
    case Geometry::flat_torus:
      diameter_ = std::sqrt(static_cast<double>(top)) / 2.0;
      break;
    case Geometry::round_sphere:
      diameter_ = std::numbers::pi;
      break;
    case Geometry::euclidean: {
      const auto& v = data_.barycenters[0];
      for (int i = 0; i < v.cols(); ++i)
        for (int j = i + 1; j < v.cols(); ++j) diameter_ = std::max(diameter_, (v.col(i) - v.col(j)).norm());
      break;
    }
  }
}

double AmbientComplex::distance(const PointRef& a, const PointRef& b) const {
  switch (data_.geometry) {
    case Geometry::flat_torus: {
      double s = 0.0;
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        double d = std::fmod(std::abs(a[i] - b[i]), 1.0);
        d = std::min(d, 1.0 - d);
        s += d * d;
      }
      return std::sqrt(s);
    }
    case Geometry::round_sphere: {
      double c = a.dot(b) / (a.norm() * b.norm());
      return std::acos(std::clamp(c, -1.0, 1.0));
    }
    case Geometry::euclidean:
      return (a - b).norm();
  }
  return 0.0;
}

Mod2Chain::Mod2Chain(ComplexPtr complex, int dim, std::vector<int> cells)
    : complex_(std::move(complex)), dim_(dim), cells_(std::move(cells)) {
  if (!complex_) throw Error("chain without complex");
  if (dim_ < 0 || dim_ > complex_->dim()) throw DimensionMismatch("chain dimension out of range");
  const int n = complex_->num_cells(dim_);
  std::sort(cells_.begin(), cells_.end());
  std::vector<int> out;
  out.reserve(cells_.size());
  for (std::size_t i = 0; i < cells_.size();) {
    std::size_t j = i;
    while (j < cells_.size() && cells_[j] == cells_[i]) ++j;
    if (cells_[i] < 0 || cells_[i] >= n) throw OutOfRange("chain cell index out of range");
    if ((j - i) % 2 == 1) out.push_back(cells_[i]);
    i = j;
  }
  cells_ = std::move(out);
}

Mod2Chain Mod2Chain::from_indicator(ComplexPtr complex, int dim, std::span<const std::uint8_t> ind) {
  std::vector<int> cells;
  for (std::size_t i = 0; i < ind.size(); ++i)
    if (ind[i]) cells.push_back(static_cast<int>(i));
  return Mod2Chain(std::move(complex), dim, std::move(cells));
}

Mod2Chain Mod2Chain::from_region(ComplexPtr complex, const Region& region) {
  int top = complex->dim();
  return from_indicator(std::move(complex), top, region);
}

Mod2Chain Mod2Chain::fundamental(ComplexPtr complex) {
  std::vector<int> all(complex->num_top());
  for (int i = 0; i < static_cast<int>(all.size()); ++i) all[i] = i;
  int top = complex->dim();
  return Mod2Chain(std::move(complex), top, std::move(all));
}

bool Mod2Chain::contains(int cell) const {
  return std::binary_search(cells_.begin(), cells_.end(), cell);
}

std::vector<std::uint8_t> Mod2Chain::indicator() const {
  std::vector<std::uint8_t> ind(complex_->num_cells(dim_), 0);
  for (int c : cells_) ind[c] = 1;
  return ind;
}

Mod2Chain operator+(const Mod2Chain& a, const Mod2Chain& b) {
  if (a.complex() != b.complex()) throw DimensionMismatch("chains live on different complexes");
  if (a.dim() != b.dim()) throw DimensionMismatch("chains have different dimensions");
  std::vector<int> out;
  out.reserve(a.size() + b.size());
  std::set_symmetric_difference(a.cells().begin(), a.cells().end(), b.cells().begin(), b.cells().end(),
                                std::back_inserter(out));
  return Mod2Chain(a.complex(), a.dim(), std::move(out));
}

Mod2Chain boundary(const Mod2Chain& c) {
  if (c.dim() == 0) throw DimensionMismatch("boundary of a 0-chain");
  const auto& K = *c.complex();
  std::vector<std::uint8_t> ind(K.num_cells(c.dim() - 1), 0);
  for (int cell : c.cells())
    for (int f : K.faces(c.dim(), cell)) ind[f] ^= 1;
  return Mod2Chain::from_indicator(c.complex(), c.dim() - 1, ind);
}

double mass(const Mod2Chain& c) {
  double m = 0.0;
  const auto w = c.complex()->weights(c.dim());
  for (int cell : c.cells()) m += w[cell];
  return m;
}

Mod2Chain region_boundary(const ComplexPtr& complex, const Region& region) {
  std::vector<int> cells;
  for (int f = 0; f < complex->num_facets(); ++f) {
    const auto& cf = complex->cofaces(f);
    if (region[cf[0]] != region[cf[1]]) cells.push_back(f);
  }
  return Mod2Chain(complex, complex->dim() - 1, std::move(cells));
}

double region_volume(const AmbientComplex& complex, const Region& region) {
  double v = 0.0;
  const auto w = complex.weights(complex.dim());
  for (std::size_t i = 0; i < region.size(); ++i)
    if (region[i]) v += w[i];
  return v;
}

Region solve_filling(const Mod2Chain& cycle) {
  const auto& K = *cycle.complex();
  if (cycle.dim() != K.dim() - 1) throw DimensionMismatch("filling target must be an n-chain");
  const auto target = cycle.indicator();
  Region color(K.num_top(), 0);
  std::vector<std::uint8_t> seen(K.num_top(), 0);
  std::vector<int> stack;
  for (int root = 0; root < K.num_top(); ++root) {
    if (seen[root]) continue;
    seen[root] = 1;
    stack.push_back(root);
    while (!stack.empty()) {
      int c = stack.back();
      stack.pop_back();
      for (int f : K.faces(K.dim(), c)) {
        const auto& cf = K.cofaces(f);
        int other = cf[0] == c ? cf[1] : cf[0];
        if (!seen[other]) {
          seen[other] = 1;
          color[other] = color[c] ^ target[f];
          stack.push_back(other);
        }
      }
    }
  }
  for (int f = 0; f < K.num_facets(); ++f) {
    const auto& cf = K.cofaces(f);
    if ((color[cf[0]] ^ color[cf[1]]) != target[f])
      throw EssentialCycle("cycle is not null-homologous");
  }
  return color;
}

double flat_distance(const Mod2Chain& a, const Mod2Chain& b) { return flat_norm(a + b).cost; }

Mod2Chain isoperimetric_choice(const Mod2Chain& s, const Mod2Chain& t) {
  const auto& K = *s.complex();
  if (!K.dual_connected()) throw PreconditionFailed("isoperimetric choice needs a connected complex");
  Mod2Chain diff = s + t;
  Region r;
  try {
    r = solve_filling(diff);
  } catch (const EssentialCycle&) {
    throw EssentialCycle("cycles lie in different homology classes");
  }
  const double m = region_volume(K, r);
  const double half = 0.5 * K.total_volume();
  if (std::abs(m - half) <= 1e-12 * K.total_volume()) throw FillingTie("both fillings have half the total volume");
  if (m > half)
    for (auto& x : r) x ^= 1;
  return Mod2Chain::from_region(s.complex(), r);
}

Mod2Chain restrict(const Mod2Chain& c, const PointPredicate& region) {
  const auto& B = c.complex()->barycenters(c.dim());
  std::vector<int> out;
  for (int cell : c.cells())
    if (region(B.col(cell))) out.push_back(cell);
  return Mod2Chain(c.complex(), c.dim(), std::move(out));
}

SliceResult slice_radius(const Mod2Chain& q, const Eigen::VectorXd& center, double r) {
  const auto& K = *q.complex();
  const int top = K.dim();
  if (q.dim() != top) throw DimensionMismatch("slice_radius expects an (n+1)-chain");
  if (!(r > 0.0) || r > 0.5 * K.diameter()) throw OutOfRange("slice radius outside the admissible range");

  const auto in_q = q.indicator();
  const auto dq = boundary(q).indicator();

  struct Event {
    double d;
    int dim;
    int cell;
  };
  std::vector<Event> events;
  std::vector<std::uint8_t> q_in_ball(K.num_top(), 0), cut(K.num_facets(), 0);
  double cut_mass = 0.0;
  auto toggle = [&](int f) {
    cut[f] ^= 1;
    cut_mass += cut[f] ? K.weight(top - 1, f) : -K.weight(top - 1, f);
  };
  auto add_cell = [&](int c) {
    if (!in_q[c]) return;
    q_in_ball[c] = 1;
    for (int f : K.faces(top, c)) toggle(f);
  };
  auto add_facet = [&](int f) {
    if (dq[f]) toggle(f);
  };

  for (int c = 0; c < K.num_top(); ++c) {
    double d = K.distance(K.barycenter(top, c), center);
    if (d <= 0.5 * r)
      add_cell(c);
    else if (d <= r)
      events.push_back({d, top, c});
  }
  for (int f = 0; f < K.num_facets(); ++f) {
    double d = K.distance(K.barycenter(top - 1, f), center);
    if (d <= 0.5 * r)
      add_facet(f);
    else if (d <= r)
      events.push_back({d, top - 1, f});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.d < b.d; });

  double best_s = 0.5 * r, best = cut_mass, prev_s = 0.5 * r, prev_mass = cut_mass, integral = 0.0;
  for (std::size_t i = 0; i < events.size();) {
    const double d = events[i].d;
    integral += prev_mass * (d - prev_s);
    for (; i < events.size() && events[i].d == d; ++i) {
      if (events[i].dim == top)
        add_cell(events[i].cell);
      else
        add_facet(events[i].cell);
    }
    if (cut_mass < best - 1e-12) {
      best = cut_mass;
      best_s = d;
    }
    prev_s = d;
    prev_mass = cut_mass;
  }
  integral += prev_mass * (r - prev_s);

  // exact recomputation at the chosen radius
  double exact = 0.0;
  {
    Region ball(K.num_top(), 0);
    for (int c = 0; c < K.num_top(); ++c)
      ball[c] = in_q[c] && K.distance(K.barycenter(top, c), center) <= best_s;
    for (int f = 0; f < K.num_facets(); ++f) {
      const auto& cf = K.cofaces(f);
      bool in = (ball[cf[0]] != ball[cf[1]]) != (dq[f] && K.distance(K.barycenter(top - 1, f), center) <= best_s);
      if (in) exact += K.weight(top - 1, f);
    }
  }
  return {best_s, exact, integral / (0.5 * r)};
}

}  // namespace mmw
