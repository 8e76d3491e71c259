#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmw/almgren.hpp"
#include "mmw/family.hpp"

namespace mmw {

/// Uniform point of S^(dim-1); the stream is keyed by (seed, index) so sample
/// sets of different sizes are prefixes of each other.
Eigen::VectorXd sphere_sample(int dim, std::uint64_t seed, std::uint64_t index);

/// Runs body(i) for i in [0, n) on `jobs` threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& body);

struct SampleOptions {
  int samples = 1000;
  int polish = 4;           // candidates refined by local ascent
  int polish_rounds = 40;
  std::uint64_t seed = 1;
  int jobs = 1;
  long lines = 4000;        // crofton backend
  std::uint64_t line_seed = 7;
  std::vector<Eigen::VectorXd> starts;  // extra candidates, zero-padded or truncated to p + 1
};

/// Detection certificate for a crofton family of declared form (zero sets of a
/// linear span containing the constants or the coordinate functions).
Detection declared_detection(const ChainFamily& family);

struct UpperEstimate {
  double value = 0.0;
  double half_value = 0.0;   // same seed, first half of the samples
  double diagnostic = 0.0;   // relative change from half to full sample count
  Eigen::VectorXd witness;
  int samples = 0;
  int per_line_max = 0;      // crofton: largest crossing count seen
  std::string provenance = "measured";
  nlohmann::json to_json() const;
};

/// Mass of one member, by the mesh or by Crofton.
double member_mass(const ChainFamily& family, const Eigen::VectorXd& a, const LineSet* lines, int* per_line = nullptr);

/// Sampled sup of mass over the family, polished by a pattern search from the
/// best candidates. Families that can place level cycles (from_roots) also
/// start from p evenly spaced levels inside nested windows of the field range.
/// An estimate for this family, never a certificate.
UpperEstimate upper_estimate(const ChainFamily& family, const Detection& detection, const SampleOptions& opt);

struct BallMassFit {
  Eigen::VectorXd center;
  std::vector<double> radii, sup_mass;
  double alpha = 0.0;
  double residual = 0.0;  // rms relative misfit of alpha r^n
  nlohmann::json to_json() const;
};

/// sup over the loop of the mass inside B_r(center), and the fit alpha r^n.
BallMassFit ball_mass_bound(const ChainFamily& loop, const Eigen::VectorXd& center, const std::vector<double>& radii,
                            int params = 360);

struct PackingResult {
  bool found = false;
  Eigen::VectorXd witness;
  std::vector<double> ball_masses;
  double threshold = 0.0;  // (alpha/3) r^n
  double bound = 0.0;      // p (alpha/6) r^n
  double radius = 0.0;
  double alpha = 0.0;
  int rounds = 0;
  int candidates = 0;
  nlohmann::json to_json() const;
};

struct PackingOptions {
  int samples = 400;
  int budget = 3;  // doublings of the candidate pool
  std::uint64_t seed = 3;
  int jobs = 1;
};

/// Search for a parameter outside every S_j = {x : mass(Phi(x) in B_j) <= (alpha/3) r^n}.
PackingResult packing_lower_bound(const ChainFamily& family, const Detection& detection, const BallPacking& packing,
                                  double alpha, const PackingOptions& opt = {});

/// Masses of a member inside each ball of a packing.
std::vector<double> ball_masses(const ChainFamily& family, const Eigen::VectorXd& a, const BallPacking& packing);

struct ScalingFit {
  double slope = 0.0, intercept = 0.0, slope_stderr = 0.0, r2 = 0.0;
  std::vector<double> weyl;  // value * p^(-1/(n+1))
  double weyl_min = 0.0, weyl_max = 0.0;
  nlohmann::json to_json() const;
};

/// Least squares of log(value) against log(p).
ScalingFit scaling_fit(const std::vector<int>& p, const std::vector<double>& value, int n);

struct MonotoneFlags {
  bool monotone = true;
  std::vector<std::pair<int, int>> violations;  // (p, q) with value_q < value_p (1 - tol), p < q
  std::vector<std::pair<int, int>> equalities;  // consecutive p with relative gap < tol
  nlohmann::json to_json() const;
};

MonotoneFlags monotonicity_and_equality(const std::vector<int>& p, const std::vector<double>& value, double tol);

struct WidthReport {
  int p = 0;
  std::string model;
  nlohmann::json family;
  Detection detection;
  UpperEstimate upper;
  std::optional<PackingResult> lower;
  std::optional<BallMassFit> calibration;
  double tolerance = 0.0;
  nlohmann::json to_json() const;
};

}  // namespace mmw
