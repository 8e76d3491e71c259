#include "mmw/crofton.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <thread>

#include "mmw/errors.hpp"

namespace mmw {

using std::numbers::pi;

Quadratic& Quadratic::operator+=(const Quadratic& o) {
  c += o.c;
  b += o.b;
  Q += o.Q;
  return *this;
}

Quadratic Quadratic::operator*(double s) const { return {c * s, b * s, Q * s}; }

bool Quadratic::is_zero() const { return c == 0.0 && b.isZero(0.0) && Q.isZero(0.0); }

std::vector<Quadratic> harmonic_basis() {
  std::vector<Quadratic> out;
  Quadratic one;
  one.c = 1.0;
  out.push_back(one);
  for (int i = 0; i < 4; ++i) {
    Quadratic q;
    q.b[i] = 1.0;
    out.push_back(q);
  }
  auto diag = [](double a, double b, double c, double d) {
    Quadratic q;
    q.Q.diagonal() << a, b, c, d;
    return q;
  };
  out.push_back(diag(1, 1, -1, -1));
  out.push_back(diag(1, -1, 0, 0));
  out.push_back(diag(0, 0, 1, -1));
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      Quadratic q;
      q.Q(i, j) = q.Q(j, i) = 0.5;
      out.push_back(q);
    }
  return out;
}

std::vector<std::string> harmonic_names() {
  std::vector<std::string> names = {"1", "x1", "x2", "x3", "x4", "x1^2+x2^2-x3^2-x4^2", "x1^2-x2^2", "x3^2-x4^2"};
  for (int i = 1; i <= 4; ++i)
    for (int j = i + 1; j <= 4; ++j) names.push_back("x" + std::to_string(i) + "x" + std::to_string(j));
  return names;
}

Quadratic combine(const std::vector<Quadratic>& basis, const Eigen::VectorXd& a) {
  if (static_cast<std::size_t>(a.size()) > basis.size()) throw DimensionMismatch("too many coefficients");
  Quadratic out;
  for (Eigen::Index i = 0; i < a.size(); ++i) out += basis[i] * a[i];
  if (out.is_zero()) throw PreconditionFailed("all-zero coefficient vector");
  return out;
}

LineSet make_lines(long count, std::uint64_t seed) {
  if (count < 1) throw OutOfRange("need at least one line");
  LineSet L;
  L.seed = seed;
  L.u.resize(4, count);
  L.w.resize(4, count);
  std::normal_distribution<double> normal;
  for (long i = 0; i < count; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
    std::mt19937_64 rng(seq);
    Eigen::Vector4d u, w;
    for (int k = 0; k < 4; ++k) u[k] = normal(rng);
    for (int k = 0; k < 4; ++k) w[k] = normal(rng);
    u.normalize();
    w -= w.dot(u) * u;
    w.normalize();
    L.u.col(i) = u;
    L.w.col(i) = w;
  }
  return L;
}

namespace {

struct AngleTable {
  std::vector<double> c, s;
};

const AngleTable& angle_table(int samples) {
  thread_local std::map<int, AngleTable> cache;
  if (auto it = cache.find(samples); it != cache.end()) return it->second;
  AngleTable t;
  for (int i = 0; i <= samples; ++i) {
    t.c.push_back(std::cos(2.0 * pi * i / samples));
    t.s.push_back(std::sin(2.0 * pi * i / samples));
  }
  return cache.emplace(samples, std::move(t)).first->second;
}

// Sign changes of a periodic function sampled on `samples` angles, each
// bracket bisected down to 1e-6 radians. h takes (t, cos t, sin t).
template <class Eval>
int count_crossings(const Eval& h, int samples) {
  const auto& table = angle_table(samples);
  const double step = 2.0 * pi / samples;
  auto at = [&](double t) { return h(std::cos(t), std::sin(t)); };
  double first = h(1.0, 0.0);
  if (!std::isfinite(first)) throw PreconditionFailed("non-finite value in Crofton sampler");
  double prev = first;
  int count = 0;
  for (int s = 1; s <= samples; ++s) {
    const double t = s * step;
    const double v = s == samples ? first : h(table.c[s], table.s[s]);
    if (!std::isfinite(v)) throw PreconditionFailed("non-finite value in Crofton sampler");
    if ((v < 0.0) != (prev < 0.0)) {
      double lo = t - step, hi = t, vlo = prev;
      while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        const double vm = at(mid);
        if ((vm < 0.0) == (vlo < 0.0))
          lo = mid, vlo = vm;
        else
          hi = mid;
      }
      ++count;
    }
    prev = v;
  }
  return count;
}

template <class PerLine>
CroftonResult run_lines(const LineSet& lines, int samples, int jobs, PerLine per_line) {
  const long n = lines.size();
  std::vector<int> counts(n);
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  auto work = [&](long begin, long end) {
    for (long i = begin; i < end; ++i) counts[i] = per_line(i);
  };
  if (jobs == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(work, n * j / jobs, n * (j + 1) / jobs);
    for (auto& t : pool) t.join();
  }
  CroftonResult r;
  r.lines = n;
  r.samples = samples;
  double sum = 0.0, sum2 = 0.0;
  for (int c : counts) {
    sum += c;
    sum2 += static_cast<double>(c) * c;
    r.per_line_max = std::max(r.per_line_max, c);
  }
  const double mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum2 - n * mean * mean) / (n - 1)) : 0.0;
  r.estimate = 2.0 * pi * mean;
  r.std_error = 2.0 * pi * std::sqrt(var / n);
  return r;
}

}  // namespace

CroftonResult crofton_mass(const ClosedForm& h, const LineSet& lines, int samples, int jobs) {
  if (samples < 8) throw OutOfRange("too few angular samples");
  return run_lines(lines, samples, jobs, [&](long i) {
    const Eigen::Vector4d u = lines.u.col(i), w = lines.w.col(i);
    return count_crossings([&](double c, double s) { return h(u * c + w * s); }, samples);
  });
}

CroftonResult crofton_mass(const ClosedForm& h, long lines, std::uint64_t seed) {
  return crofton_mass(h, make_lines(lines, seed), 512, 1);
}

// Along a great circle a quadratic is a trigonometric polynomial of degree two:
// h(t) = a0 + a1 cos t + b1 sin t + a2 cos 2t + b2 sin 2t.
CroftonResult crofton_mass(const Quadratic& h, const LineSet& lines, int samples, int jobs) {
  if (samples < 8) throw OutOfRange("too few angular samples");
  if (!std::isfinite(h.c) || !h.b.allFinite() || !h.Q.allFinite())
    throw PreconditionFailed("non-finite coefficients");
  const Eigen::Matrix4d Q = 0.5 * (h.Q + h.Q.transpose());
  return run_lines(lines, samples, jobs, [&](long i) {
    const Eigen::Vector4d u = lines.u.col(i), w = lines.w.col(i);
    const double uu = u.dot(Q * u), ww = w.dot(Q * w), uw = u.dot(Q * w);
    const double a0 = h.c + 0.5 * (uu + ww), a1 = h.b.dot(u), b1 = h.b.dot(w), a2 = 0.5 * (uu - ww), b2 = uw;
    return count_crossings(
        [&](double c1, double s1) {
          return a0 + a1 * c1 + b1 * s1 + a2 * (c1 * c1 - s1 * s1) + b2 * 2.0 * s1 * c1;
        },
        samples);
  });
}

double crofton_sampling_drift(const Quadratic& h, const LineSet& lines, int samples) {
  const double a = crofton_mass(h, lines, samples).estimate;
  const double b = crofton_mass(h, lines, 2 * samples).estimate;
  return a == 0.0 ? std::abs(b) : std::abs(b - a) / a;
}

}  // namespace mmw
