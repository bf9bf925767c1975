#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace kbz {

/// Points are clamped to this norm after the exponential map so that
/// distances near the ball boundary stay finite.
inline constexpr double kBallBoundary = 1.0 - 1e-12;

/// Exponential map at the origin of the Poincare ball (curvature 1):
/// v -> tanh(|v|) * v / |v|. The zero vector maps to itself. The result
/// norm is clamped to kBallBoundary.
std::vector<double> exp_map(std::span<const double> v);

/// Logarithmic map at the origin, inverse of exp_map:
/// p -> arctanh(|p|) * p / |p|. Requires |p| < 1.
std::vector<double> log_map(std::span<const double> p);

/// Geodesic distance between two points of the Poincare ball:
/// arccosh(1 + 2 |p-q|^2 / ((1-|p|^2)(1-|q|^2))).
double hyperbolic_distance(std::span<const double> p, std::span<const double> q);

/// Number of hyperbolic_distance evaluations since the last reset.
/// Used to verify that resizing never re-enters tree construction.
std::uint64_t distance_eval_count() noexcept;
void reset_distance_eval_count() noexcept;

double squared_norm(std::span<const double> v) noexcept;

}  // namespace kbz
