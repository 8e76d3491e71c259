#pragma once

#include <json.hpp>

#include <vector>

#include "mmw/family.hpp"

namespace mmw {

/// F#: sum of isoperimetric choices around a closed sequence of cycles.
/// Returns 1 iff the sum is the fundamental chain.
int almgren_class(const std::vector<Mod2Chain>& loop);
/// Same for a DiscreteMap on a subdivided circle, walked in coordinate order.
int almgren_class(const DiscreteMap& phi);

/// Relative version inside a discrete ball D (a connected set of top cells):
/// values are n-chains whose boundaries lie on the frontier of D, fillings are
/// chains in D, and the class is 1 iff the choices sum to D.
int relative_almgren_class(const std::vector<Mod2Chain>& loop, const Region& ball);

struct LoopOptions {
  double step_fraction = 0.25;  // a step is accepted when its lighter filling is below this share of the volume
  int max_depth = 10;           // ternary splits allowed per segment
  bool check_refinement = true; // recompute with half the step bound and require the same class
};

struct LoopStats {
  int steps = 0;
  int depth = 0;
  double max_step_mass = 0.0;  // largest isoperimetric choice used
};

/// Almgren class of a family along a closed parameter path, each segment
/// refined by ternary splitting until consecutive members are close.
int loop_class(const ChainFamily& family, const std::vector<PathSegment>& loop, const LoopOptions& opt = {},
               LoopStats* stats = nullptr);

bool is_sweepout(const ChainFamily& loop_family, const LoopOptions& opt = {});

struct Detection {
  int p = 0;
  bool detected = false;
  bool structural = false;            // decided from lambda(gamma) and the known ring of RP^p
  std::vector<int> lambda_values;     // almgren class on each H1 generator
  gf2::Vec lambda;                    // cubical cocycle representing Phi*(lambda-bar)
  double fineness_used = 0.0;
  double threshold_used = 0.0;
  nlohmann::json to_json() const;
};

/// Phi*(lambda-bar) from loop evaluations on an H1 basis of X, then the p-th cup power.
Detection is_p_sweepout(const ChainFamily& family, const ParamPtr& X, int p, const LoopOptions& opt = {});
/// RP^p detection through the generator loop alone: lambda(gamma) = 1 forces
/// lambda to be the generator, whose p-th power is nonzero in H*(RP^p).
Detection detect_projective(const ChainFamily& family, int p, const LoopOptions& opt = {});

/// sup over sampled parameters and centres of the restricted mass, per radius.
std::vector<double> mass_concentration(const ChainFamily& family, const std::vector<double>& radii,
                                       const std::vector<Eigen::VectorXd>& params,
                                       const std::vector<Eigen::VectorXd>& centers);

/// Half the smallest positive pairwise flat distance within a set of cycles.
double calibrated_threshold(const std::vector<Mod2Chain>& cycles);

struct RestrictDetect {
  ParamPtr Y, Z;
  Detection detection;
  bool hypothesis_checked = false;
  bool hypothesis_holds = false;  // every H1 generator loop of Z has class 0
  std::vector<double> distances;  // flat distance to the exclusion set, per vertex of X
};

RestrictDetect restrict_and_detect(const ChainFamily& family, const ParamPtr& X, const std::vector<Mod2Chain>& excluded,
                                   double eps, int p, bool check_hypothesis = true, const LoopOptions& opt = {});

}  // namespace mmw
