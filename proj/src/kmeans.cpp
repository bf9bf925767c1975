#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kbz/error.hpp"
#include "kbz/eval.hpp"
#include "kbz/rng.hpp"

namespace kbz {

namespace {

using MatrixRM =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr int kMaxIterations = 100;
constexpr double kShiftTolerance = 1e-6;
constexpr std::size_t kRowChunk = 8192;

/// k-means++ seeding: first center uniform, then squared-distance sampling.
/// When every remaining point already coincides with a center, fall back to
/// the smallest unused sample index.
std::vector<std::size_t> seed_centers(const Eigen::Map<const MatrixRM>& x,
                                      std::size_t k, Rng& rng) {
  const std::size_t n = static_cast<std::size_t>(x.rows());
  std::vector<std::size_t> centers;
  centers.reserve(k);
  std::vector<char> used(n, 0);

  const std::size_t first = rng.uniform_index(n);
  centers.push_back(first);
  used[first] = 1;

  Eigen::VectorXd min_d2 =
      (x.rowwise() - x.row(first)).rowwise().squaredNorm().cast<double>();

  std::vector<double> cum(n);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += std::max(min_d2[static_cast<Eigen::Index>(i)], 0.0);
      cum[i] = total;
    }
    std::size_t pick;
    if (total <= 0.0) {
      pick = 0;
      while (used[pick]) ++pick;
    } else {
      const double u = rng.uniform() * total;
      pick = static_cast<std::size_t>(
          std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
      if (pick >= n) pick = n - 1;
    }
    centers.push_back(pick);
    used[pick] = 1;
    min_d2 = min_d2.cwiseMin(
        (x.rowwise() - x.row(pick)).rowwise().squaredNorm().cast<double>());
  }
  return centers;
}

}  // namespace

Codebook train_dedicated_kb(const VectorSet& samples, std::size_t k,
                            std::uint64_t seed) {
  if (k < 1) throw invalid_input("train_dedicated_kb: k must be >= 1");
  if (samples.dim == 0 || samples.size() == 0)
    throw invalid_input("train_dedicated_kb: empty sample set");
  if (samples.size() < k)
    throw invalid_input("train_dedicated_kb: need at least " +
                        std::to_string(k) + " samples, got " +
                        std::to_string(samples.size()));

  const std::size_t n = samples.size();
  const std::size_t dim = samples.dim;
  Eigen::Map<const MatrixRM> x(samples.data.data(),
                               static_cast<Eigen::Index>(n),
                               static_cast<Eigen::Index>(dim));

  Rng rng(seed);
  MatrixRM centers(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(dim));
  {
    const auto seeds = seed_centers(x, k, rng);
    for (std::size_t c = 0; c < k; ++c)
      centers.row(static_cast<Eigen::Index>(c)) =
          x.row(static_cast<Eigen::Index>(seeds[c]));
  }

  Eigen::VectorXf xnorm2 = x.rowwise().squaredNorm();
  std::vector<std::uint32_t> assign(n, 0);
  std::vector<float> assign_d2(n, 0.0f);
  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    // Assignment via |x - c|^2 = |x|^2 - 2 x.c + |c|^2 with a chunked GEMM;
    // the |x|^2 term is constant per row and dropped from the argmin.
    Eigen::VectorXf cnorm2 = centers.rowwise().squaredNorm();
    for (std::size_t r0 = 0; r0 < n; r0 += kRowChunk) {
      const std::size_t rows = std::min(kRowChunk, n - r0);
      MatrixRM gram = x.middleRows(static_cast<Eigen::Index>(r0),
                                   static_cast<Eigen::Index>(rows)) *
                      centers.transpose();
      for (std::size_t i = 0; i < rows; ++i) {
        const float* g = gram.data() + i * k;
        std::uint32_t best = 0;
        float best_v = cnorm2[0] - 2.0f * g[0];
        for (std::size_t c = 1; c < k; ++c) {
          const float v = cnorm2[static_cast<Eigen::Index>(c)] - 2.0f * g[c];
          if (v < best_v) {
            best_v = v;
            best = static_cast<std::uint32_t>(c);
          }
        }
        assign[r0 + i] = best;
        assign_d2[r0 + i] = xnorm2[static_cast<Eigen::Index>(r0 + i)] + best_v;
      }
    }

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t c = assign[i];
      const float* xi = samples.row(i);
      double* s = sums.data() + std::size_t(c) * dim;
      for (std::size_t j = 0; j < dim; ++j) s[j] += xi[j];
      ++counts[c];
    }

    // Empty clusters grab the worst-fit point, in cluster index order.
    std::vector<char> stolen(n, 0);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t worst = 0;
      float worst_d2 = -std::numeric_limits<float>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        if (stolen[i]) continue;
        if (assign_d2[i] > worst_d2) {
          worst_d2 = assign_d2[i];
          worst = i;
        }
      }
      stolen[worst] = 1;
      const float* xi = samples.row(worst);
      double* s = sums.data() + c * dim;
      for (std::size_t j = 0; j < dim; ++j) s[j] = xi[j];
      counts[c] = 1;
    }

    double max_shift2 = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double* s = sums.data() + c * dim;
      double shift2 = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        const float updated = static_cast<float>(s[j] / double(counts[c]));
        const double d = double(updated) -
                         double(centers(static_cast<Eigen::Index>(c),
                                        static_cast<Eigen::Index>(j)));
        shift2 += d * d;
        centers(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) =
            updated;
      }
      max_shift2 = std::max(max_shift2, shift2);
    }
    if (max_shift2 <= kShiftTolerance * kShiftTolerance) break;
  }

  Codebook kb;
  kb.dim = dim;
  kb.data.assign(centers.data(), centers.data() + k * dim);
  return kb;
}

}  // namespace kbz
