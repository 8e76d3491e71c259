#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mmw/chain.hpp"

namespace mmw {

enum class ModelKind { torus, sphere, octahedron };

std::string to_string(ModelKind kind);

/// A cube face of the lattice chart. The torus has a single patch covering
/// every axis; the cube-sphere has one patch per face of [-1,1]^(d+1).
struct Patch {
  std::vector<int> free_axes;
  int fixed_axis = -1;
  int fixed_value = 0;
};

/// Concrete closed manifold: its cell complex plus the integer lattice chart
/// the cells were cut from. Torus lattices live in Z^(n+1) mod g, sphere
/// lattices on the boundary of the box [0,g]^(d+1).
class AmbientModel {
 public:
  struct Data {
    ModelKind kind = ModelKind::torus;
    int dim = 0;
    int resolution = 0;
    int lattice_dim = 0;
    ComplexPtr complex;
    std::vector<Eigen::MatrixXi> lattice_base;         // per dimension, one column per cell
    std::vector<std::vector<unsigned>> lattice_axes;   // per dimension
    std::vector<Patch> patches;
    std::vector<int> top_patch;
    double packing_constant = 0.25;
    double chart_lipschitz = 1.0;
  };

  explicit AmbientModel(Data data) : data_(std::move(data)) {}

  ModelKind kind() const { return data_.kind; }
  int dim() const { return data_.dim; }
  int resolution() const { return data_.resolution; }
  int lattice_dim() const { return data_.lattice_dim; }
  const ComplexPtr& complex() const { return data_.complex; }
  const std::string& id() const { return data_.complex->id(); }

  bool has_chart() const { return !data_.patches.empty(); }
  const std::vector<Patch>& patches() const { return data_.patches; }
  int top_patch(int cell) const { return data_.top_patch[cell]; }
  auto lattice_base(int k, int cell) const { return data_.lattice_base[k].col(cell); }
  unsigned lattice_axes(int k, int cell) const { return data_.lattice_axes[k][cell]; }

  /// Embedding-space point for a position given in lattice units.
  Eigen::VectorXd lattice_to_point(const Eigen::VectorXd& lattice) const;

  double packing_constant() const { return data_.packing_constant; }
  double chart_lipschitz() const { return data_.chart_lipschitz; }
  Eigen::Index embedding_dim() const { return data_.complex->barycenters(0).rows(); }

 private:
  Data data_;
};

using ModelPtr = std::shared_ptr<const AmbientModel>;

/// Flat unit torus T^(n+1) cut into g^(n+1) cubes.
ModelPtr build_torus(int n, int g);
/// Periodic grid with a separate number of cells per axis (unit side per axis).
ModelPtr build_torus_grid(const std::vector<int>& sizes);
/// Unit sphere S^d from the radially projected, g-subdivided boundary of [-1,1]^(d+1).
ModelPtr build_sphere(int d, int g);
/// Flat-faced octahedron with vertices at +-e_i.
ModelPtr build_octahedron();

/// f(x) = <x, v> on the model's embedding coordinates.
struct ScalarField {
  ModelPtr model;
  Eigen::VectorXd direction;
  Eigen::VectorXd vertex_values;
  Eigen::VectorXd cell_values;  // at top-cell barycenters

  double operator()(const PointRef& x) const { return x.dot(direction); }
  double min() const { return cell_values.minCoeff(); }
  double max() const { return cell_values.maxCoeff(); }
};

ScalarField linear_field(const ModelPtr& model, const Eigen::VectorXd& v);
/// Distinct values on all vertices and on all top-cell centers.
bool is_morse(const ScalarField& f);
/// Pseudo-random direction retried until the field is Morse in the discrete sense.
ScalarField morse_direction(const ModelPtr& model, std::uint64_t seed, int retries = 64);

Mod2Chain sublevel_region(const ScalarField& f, double t);
Mod2Chain level_cycle(const ScalarField& f, double t);

PointPredicate geodesic_ball(const ModelPtr& model, const Eigen::VectorXd& center, double r);
/// Top-cell indicator of a geodesic ball (barycenter membership).
Region ball_region(const ModelPtr& model, const Eigen::VectorXd& center, double r);

struct BallPacking {
  std::vector<Eigen::VectorXd> centers;
  double radius = 0.0;
  double nu = 0.0;
  int count() const { return static_cast<int>(centers.size()); }
};

BallPacking ball_packing(const ModelPtr& model, int p);
/// Smallest pairwise model distance between packing centers.
double min_separation(const ModelPtr& model, const std::vector<Eigen::VectorXd>& centers);

/// Spiral point sets used for sphere packings.
std::vector<Eigen::VectorXd> sphere_spiral(int d, int p);

}  // namespace mmw
