#include "kbz/geometry.hpp"

#include <atomic>
#include <cmath>

#include "kbz/error.hpp"

namespace kbz {

namespace {

std::atomic<std::uint64_t> g_distance_evals{0};

void require_finite(std::span<const double> v, const char* what) {
  if (v.empty()) throw invalid_input(std::string(what) + ": empty vector");
  for (double x : v) {
    if (!std::isfinite(x))
      throw invalid_input(std::string(what) + ": non-finite coordinate");
  }
}

}  // namespace

double squared_norm(std::span<const double> v) noexcept {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

std::vector<double> exp_map(std::span<const double> v) {
  require_finite(v, "exp_map");
  const double norm = std::sqrt(squared_norm(v));
  std::vector<double> out(v.size(), 0.0);
  if (norm == 0.0) return out;

  const double scale = std::tanh(norm) / norm;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * scale;

  // tanh saturates to 1 in double precision for norms above ~19; keep the
  // image strictly inside the ball so Eq-style distances stay finite.
  const double rnorm = std::sqrt(squared_norm(out));
  if (rnorm >= kBallBoundary) {
    const double fix = kBallBoundary / rnorm;
    for (double& x : out) x *= fix;
  }
  return out;
}

std::vector<double> log_map(std::span<const double> p) {
  require_finite(p, "log_map");
  const double norm = std::sqrt(squared_norm(p));
  std::vector<double> out(p.size(), 0.0);
  if (norm == 0.0) return out;
  if (norm >= 1.0)
    throw domain_error("log_map: point norm must be < 1, got " +
                       std::to_string(norm));

  const double scale = std::atanh(norm) / norm;
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] * scale;
  return out;
}

double hyperbolic_distance(std::span<const double> p,
                           std::span<const double> q) {
  if (p.size() != q.size())
    throw invalid_input("hyperbolic_distance: dimension mismatch");
  require_finite(p, "hyperbolic_distance");
  require_finite(q, "hyperbolic_distance");

  const double np2 = squared_norm(p);
  const double nq2 = squared_norm(q);
  if (np2 >= 1.0 || nq2 >= 1.0)
    throw domain_error("hyperbolic_distance: point norm must be < 1");

  double diff2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    diff2 += d * d;
  }
  g_distance_evals.fetch_add(1, std::memory_order_relaxed);

  const double arg = 1.0 + 2.0 * diff2 / ((1.0 - np2) * (1.0 - nq2));
  return std::acosh(arg < 1.0 ? 1.0 : arg);
}

std::uint64_t distance_eval_count() noexcept {
  return g_distance_evals.load(std::memory_order_relaxed);
}

void reset_distance_eval_count() noexcept {
  g_distance_evals.store(0, std::memory_order_relaxed);
}

}  // namespace kbz
