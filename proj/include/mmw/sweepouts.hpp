#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "mmw/almgren.hpp"
#include "mmw/family.hpp"

namespace mmw {

enum class PolyBasis { monomial, chebyshev };

/// theta in [0,1] -> boundary of {f < -cot(pi theta)}; empty at both ends.
ChainFamily linear_sweepout(const ScalarField& f);

/// a in R^(p+1) -> boundary of {P_a(f) < 0}. With the Chebyshev basis P_a is
/// written in T_i of f rescaled to [-1,1] over the model; the monomial basis
/// uses t^i of the same rescaled value.
ChainFamily guth_family(const ScalarField& f, int p, PolyBasis basis = PolyBasis::chebyshev);

/// Every parameter gives the same region.
ChainFamily constant_family(const ModelPtr& model, const Region& region, int p);

/// a -> zero set of sum a_i phi_i on S^3, masses by Crofton.
ChainFamily eigenfunction_family(const std::vector<Quadratic>& harmonics);

/// Coefficients of P_a in the monomial basis of the rescaled variable.
Eigen::VectorXd monomial_coefficients(const Eigen::VectorXd& a, PolyBasis basis);
/// Real roots of P_a inside [-1,1] (rescaled variable), sorted.
std::vector<double> real_roots(const Eigen::VectorXd& a, PolyBasis basis);
/// Map of a model value of f to the rescaled variable used by guth_family.
double rescale(const ScalarField& f, double t);

/// Radial retraction of every coarse cell of level k onto its boundary away
/// from a central cube of half-width delta (normalized cell coordinates in
/// [-1,1]), with the cubic smoothstep cutoff in between.
struct BendMap {
  ModelPtr model;
  int k = 0;
  double eps = 0.0;
  double delta = 0.0;
  int cell = 0;            // coarse cell side in lattice units
  double cell_chart = 0.0; // coarse cell side in chart units

  static double cutoff(double t);
  double profile(double r) const;          // rho(r)
  double profile_inverse(double s) const;  // s in [0,1)
  Eigen::VectorXd apply(const Eigen::VectorXd& y) const;
  Eigen::VectorXd inverse(const Eigen::VectorXd& y) const;

  /// Lattice position z (in a top cell with free axes `mask`) -> image / preimage.
  Eigen::VectorXd apply_lattice(const Eigen::VectorXd& z, unsigned mask, const Eigen::VectorXd& hint) const;
  Eigen::VectorXd preimage_lattice(const Eigen::VectorXd& z, unsigned mask) const;
  /// Normalized coordinates of z inside the coarse cell containing `hint`.
  Eigen::VectorXd normalized(const Eigen::VectorXd& z, unsigned mask, const Eigen::VectorXd& hint) const;
};

/// Largest admissible bend parameter: 1/(4L) for chart distortion L (1/4 on the torus).
double bend_eps_max(const ModelPtr& model);

BendMap bend_and_cancel(const ModelPtr& model, int k, std::optional<double> eps = std::nullopt);
/// k with 3^k <= p^(1/(n+1)) <= 3^(k+1).
int bend_level(int p, int n);

/// Region transport: sample values move to the fine cells whose preimage
/// centre they describe. Needs the grid refined at least one level below k.
ChainFamily pushforward(const BendMap& F, const ChainFamily& psi);

struct SkeletonCheck {
  int facets = 0;             // facets of the pushed chains examined
  int violations = 0;         // off-skeleton facets whose preimage leaves the central cube
  int outer_facets = 0;       // facets of the source chains outside the central cube
  int outer_violations = 0;   // ... whose image is not on the coarse skeleton
};
SkeletonCheck skeleton_check(const BendMap& F, const ChainFamily& psi, const ChainFamily& phi,
                             const std::vector<Eigen::VectorXd>& params);

struct Expansion {
  double max_derivative = 0.0;  // sup |DF| over the sample grid, embedding metric
  double c1 = 0.0;              // eps * sup |DF|
};
Expansion measure_expansion(const BendMap& F, int grid = 24);

struct MassBudget {
  double c1 = 0.0, c3 = 0.0;
  int balls_per_level = 1;  // most central cubes a single level set of f meets
  double skeleton_mass = 0.0;
  double bent_term = 0.0, skeleton_term = 0.0;
  double total() const { return bent_term + skeleton_term; }
};
/// f-range of every central cube, sampled on a small grid.
std::vector<std::pair<double, double>> central_ranges(const BendMap& F, const ScalarField& f);
/// Most central cubes whose f-ranges share a common value.
int level_overlap(const BendMap& F, const ScalarField& f);
/// Largest eps <= bend_eps_max whose central cubes have pairwise disjoint
/// f-ranges; searched down to floor * bend_eps_max, returned clamped there.
double separating_eps(const ModelPtr& model, const ScalarField& f, int k, double floor = 1.0 / 64);

/// 2 p m C1^n w_n (L s)^n + C3 3^k with measured constants.
MassBudget mass_budget(const BendMap& F, const ScalarField& f, int p);

/// Total mass of the coarse n-skeleton.
double skeleton_mass(const BendMap& F);

/// A closed path through the parameter space of a projective family:
/// a(s) = cos(pi s) u + sin(pi s) w, which is noncontractible (it joins u to -u).
std::vector<PathSegment> projective_loop(const Eigen::VectorXd& u, const Eigen::VectorXd& w, bool full_turn = false);

}  // namespace mmw
