#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mmw/errors.hpp"

namespace mmw {

/// h(x) = c + <b, x> + x^T Q x on R^4 (Q symmetric).
struct Quadratic {
  double c = 0.0;
  Eigen::Vector4d b = Eigen::Vector4d::Zero();
  Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();

  double operator()(const Eigen::Vector4d& x) const { return c + b.dot(x) + x.dot(Q * x); }
  Quadratic& operator+=(const Quadratic& o);
  Quadratic operator*(double s) const;
  bool is_zero() const;
};

/// The degree <= 2 harmonic polynomials on S^3: 1, x1..x4, then the nine
/// traceless quadratics. Entry 5 is x1^2 + x2^2 - x3^2 - x4^2.
std::vector<Quadratic> harmonic_basis();
std::vector<std::string> harmonic_names();
Quadratic combine(const std::vector<Quadratic>& basis, const Eigen::VectorXd& a);

/// Great circles t -> u cos t + w sin t, u and w orthonormal, uniformly distributed.
struct LineSet {
  std::uint64_t seed = 0;
  Eigen::Matrix<double, 4, Eigen::Dynamic> u, w;
  long size() const { return static_cast<long>(u.cols()); }
};

LineSet make_lines(long count, std::uint64_t seed);

struct CroftonResult {
  double estimate = 0.0;
  int per_line_max = 0;
  double std_error = 0.0;
  long lines = 0;
  int samples = 0;
};

using ClosedForm = std::function<double(const Eigen::Vector4d&)>;

/// 2 pi times the mean number of sign changes of h along the great circles.
/// Sign changes are located on `samples` equally spaced angles and each
/// crossing is refined by bisection to 1e-6 radians.
CroftonResult crofton_mass(const ClosedForm& h, const LineSet& lines, int samples = 512, int jobs = 1);
CroftonResult crofton_mass(const Quadratic& h, const LineSet& lines, int samples = 512, int jobs = 1);
CroftonResult crofton_mass(const ClosedForm& h, long lines, std::uint64_t seed);

/// Relative change of the estimate when the angular samples are doubled.
double crofton_sampling_drift(const Quadratic& h, const LineSet& lines, int samples = 512);

}  // namespace mmw
