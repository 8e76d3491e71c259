#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <functional>
#include <string>
#include <vector>

#include "mmw/chain.hpp"
#include "mmw/crofton.hpp"
#include "mmw/models.hpp"
#include "mmw/param_complex.hpp"

namespace mmw {

enum class Backend { mesh, crofton };
std::string to_string(Backend b);

/// A family of n-cycles indexed by parameter points.
///
/// Parameter points are vectors a: for projective families a is a nonzero
/// vector of R^(p+1) read up to sign, for loop families a = (theta) with theta
/// in [0,1]. Mesh families are sublevel boundaries: the member at a is the
/// boundary of {cells c : rule(a, sample_values[c]) < 0}, where sample_values
/// holds a scalar field at one sample point per top cell (the cell centre,
/// unless the family was transported by a bend map). Families that are not of
/// this form supply region_fn instead.
struct ChainFamily {
  std::string kind;
  Backend backend = Backend::mesh;
  int p = 0;
  ModelPtr model;

  std::function<double(const PointRef&)> field;
  std::function<double(const Eigen::VectorXd&, double)> rule;
  Eigen::VectorXd sample_values;
  std::function<Region(const Eigen::VectorXd&)> region_fn;

  std::function<Quadratic(const Eigen::VectorXd&)> member;  // crofton backend
  /// Parameter whose member is the union of the level cycles at the given sample values.
  std::function<Eigen::VectorXd(const std::vector<double>&)> from_roots;

  nlohmann::json descriptor;

  bool field_based() const { return static_cast<bool>(rule); }
  Region region(const Eigen::VectorXd& a) const;
  Mod2Chain operator()(const Eigen::VectorXd& a) const;
  double mass(const Eigen::VectorXd& a) const;
};

/// Parameter point of a lattice position x in I^m for the complex's identification:
/// antipodal -> normalize(2x - 1), otherwise x itself.
Eigen::VectorXd param_point(const ParamComplex& X, const Eigen::VectorXd& cube_coords);

/// A straight piece of parameter path, s in [0,1].
using PathSegment = std::function<Eigen::VectorXd(double)>;

/// The parameter path along one lattice edge of X, oriented from vertex `from`.
PathSegment edge_segment(const ParamComplex& X, int from, int to);
/// Closed vertex loop of X as a chain of edge segments.
std::vector<PathSegment> loop_segments(const ParamComplex& X, const std::vector<int>& loop);

/// phi: X_0 -> cycles. Regions are kept alongside when the values came from a family.
struct DiscreteMap {
  ParamPtr domain;
  std::vector<Mod2Chain> values;
  std::vector<Region> regions;
};

DiscreteMap evaluate_on_vertices(const ChainFamily& family, const ParamPtr& X);
double fineness(const DiscreteMap& phi);

struct DiscretizeReport {
  DiscreteMap map;
  double fineness = 0.0;
  double max_flat_distance = 0.0;  // between phi(n(y)) and Phi(y) over the next finer vertices y
  double max_mass = 0.0;
};

DiscretizeReport discretize(const ChainFamily& family, const ParamComplex& X, int k);

}  // namespace mmw
