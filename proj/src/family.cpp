#include "mmw/family.hpp"

#include <algorithm>
#include <cmath>

namespace mmw {

std::string to_string(Backend b) { return b == Backend::mesh ? "mesh" : "crofton"; }

Region ChainFamily::region(const Eigen::VectorXd& a) const {
  if (backend != Backend::mesh) throw PreconditionFailed("crofton families have no chain values");
  if (region_fn) return region_fn(a);
  if (!rule) throw PreconditionFailed("family has no region rule");
  Region r(sample_values.size());
  for (Eigen::Index c = 0; c < sample_values.size(); ++c) {
    const double v = rule(a, sample_values[c]);
    if (v == 0.0) throw DegenerateLevel("family member vanishes at a sample point");
    r[c] = v < 0.0;
  }
  return r;
}

Mod2Chain ChainFamily::operator()(const Eigen::VectorXd& a) const {
  return region_boundary(model->complex(), region(a));
}

double ChainFamily::mass(const Eigen::VectorXd& a) const { return mmw::mass((*this)(a)); }

Eigen::VectorXd param_point(const ParamComplex& X, const Eigen::VectorXd& x) {
  if (X.identification() == Identification::antipodal) return (2.0 * x.array() - 1.0).matrix().normalized();
  return x;
}

PathSegment edge_segment(const ParamComplex& X, int from, int to) {
  const int e = X.edge_between(from, to);
  if (e < 0) throw PreconditionFailed("vertices are not adjacent");
  const auto& cell = X.cell(1, e);
  int axis = 0;
  while (!((cell.axes >> axis) & 1u)) ++axis;
  const double N = X.resolution();
  Eigen::VectorXd lo(X.ambient_dim()), hi;
  for (int i = 0; i < X.ambient_dim(); ++i) lo[i] = cell.base[i] / N;
  hi = lo;
  hi[axis] += 1.0 / N;
  // orientation: does the lower end represent `from`?
  CubeCell low_vertex{cell.base, 0};
  const bool forward = X.find(low_vertex) == from;
  const ParamComplex* Xp = &X;
  return [Xp, lo, hi, forward](double s) {
    const double t = forward ? s : 1.0 - s;
    return param_point(*Xp, lo + t * (hi - lo));
  };
}

std::vector<PathSegment> loop_segments(const ParamComplex& X, const std::vector<int>& loop) {
  std::vector<PathSegment> out;
  for (std::size_t i = 0; i < loop.size(); ++i) out.push_back(edge_segment(X, loop[i], loop[(i + 1) % loop.size()]));
  return out;
}

DiscreteMap evaluate_on_vertices(const ChainFamily& family, const ParamPtr& X) {
  DiscreteMap phi;
  phi.domain = X;
  for (int v = 0; v < X->num_vertices(); ++v) {
    auto r = family.region(param_point(*X, X->vertex_coords(v)));
    phi.values.push_back(region_boundary(family.model->complex(), r));
    phi.regions.push_back(std::move(r));
  }
  return phi;
}

double fineness(const DiscreteMap& phi) {
  double f = 0.0;
  for (const auto& [a, b] : phi.domain->edges()) f = std::max(f, mass(phi.values[a] + phi.values[b]));
  return f;
}

DiscretizeReport discretize(const ChainFamily& family, const ParamComplex& X, int k) {
  if (family.backend != Backend::mesh) throw PreconditionFailed("discretize needs a mesh family");
  DiscretizeReport rep;
  auto Xk = subdivide(X, k);
  rep.map = evaluate_on_vertices(family, Xk);
  rep.fineness = fineness(rep.map);
  for (const auto& v : rep.map.values) rep.max_mass = std::max(rep.max_mass, mass(v));
  auto fine = subdivide(*Xk, 1);
  auto near = nearest_vertex_map(*fine, *Xk);
  for (int y = 0; y < fine->num_vertices(); ++y) {
    auto val = family(param_point(*fine, fine->vertex_coords(y)));
    rep.max_flat_distance = std::max(rep.max_flat_distance, flat_distance(rep.map.values[near[y]], val));
  }
  return rep;
}

}  // namespace mmw
