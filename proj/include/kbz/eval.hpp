#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kbz/codebook.hpp"
#include "kbz/rng.hpp"

namespace kbz {

/// Flat list of sample vectors (layout identical to a codebook, but samples
/// carry no index semantics).
struct VectorSet {
  std::size_t dim = 0;
  std::vector<float> data;

  std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
  const float* row(std::size_t i) const { return data.data() + i * dim; }
};

enum class SourceKind { GaussianMixture, HierarchicalGaussian };

struct GaussianMixtureParams {
  std::size_t components = 64;
  double center_scale = 1.0;
  double sigma = 0.05;
};

/// Two-level mixture: a few broad parents near the origin and many narrow
/// children offset outward from each parent. The broad central mass needs
/// many codewords while each child cluster is tight and individually light,
/// which gives the data a genuine coarse-to-fine hierarchy.
struct HierarchicalGaussianParams {
  std::size_t parents = 8;
  std::size_t children_per_parent = 384;
  double parent_center_scale = 0.08;
  double parent_sigma = 0.2;
  double child_offset_scale = 0.26;
  double child_sigma = 0.02;
  double parent_mass = 0.35;  // total mixture weight carried by the parents
};

struct SyntheticSource {
  SourceKind kind = SourceKind::HierarchicalGaussian;
  std::size_t dim = 16;
  std::uint64_t seed = 42;
  GaussianMixtureParams gaussian;
  HierarchicalGaussianParams hierarchical;
};

/// A realized mixture: concrete component means, per-component sigma and
/// cumulative weights, ready for sampling.
struct Mixture {
  std::size_t dim = 0;
  std::vector<double> means;       // components * dim
  std::vector<double> sigmas;      // per component
  std::vector<double> cum_weight;  // strictly increasing, back() == total
};

Mixture realize_mixture(const SyntheticSource& source, std::uint64_t seed);
VectorSet draw_samples(const Mixture& mixture, std::size_t n, Rng& rng);

/// K-means with k-means++ seeding; Lloyd iterations stop when the largest
/// centroid shift drops to 1e-6 or after 100 iterations. Deterministic for
/// a given (samples, k, seed).
Codebook train_dedicated_kb(const VectorSet& samples, std::size_t k,
                            std::uint64_t seed);

/// Uniform k-subset of the parent without replacement, kept in parent index
/// order. Deterministic for a given seed.
Codebook random_subset_kb(const Codebook& parent, std::size_t k,
                          std::uint64_t seed);

/// Mean over the test set of the squared l2 distance to the nearest
/// codebook vector. Distances are exact per-pair double sums, so nested
/// codebooks yield exactly monotone results.
double evaluate_mse(const Codebook& kb, const VectorSet& test);

struct EvalRecord {
  std::uint64_t seed = 0;
  std::string method;  // "zero-shot" | "dedicated" | "random-subset"
  std::size_t kb_size = 0;
  unsigned bits_per_index = 0;
  double mse = 0.0;
};

struct SweepConfig {
  SyntheticSource source;
  std::size_t parent_size = 4096;
  std::vector<std::size_t> child_sizes{16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  std::size_t n_train = 100000;
  std::size_t n_test = 10000;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::string records_csv = "records.csv";
  std::string summary_csv = "summary.csv";

  void validate() const;
};

/// Key-value config file, one "key = value" per line, '#' comments.
/// Unknown keys are an error that names the key.
SweepConfig parse_sweep_config(const std::string& text);

/// Runs the full sweep: per seed, realize the source, train the parent,
/// rank it once, then emit one record per (method, child size). Seeds are
/// independent jobs and may run on a thread pool. Records come back sorted
/// by (seed, kb_size, method).
std::vector<EvalRecord> run_sweep(const SweepConfig& config,
                                  unsigned threads = 1,
                                  std::ostream* progress = nullptr);

std::string records_to_csv(const std::vector<EvalRecord>& records);

/// Per-(method, K) mean and sample standard deviation, plus each method's
/// mean-MSE ratio against the dedicated baseline at the same K.
std::string summary_to_csv(const std::vector<EvalRecord>& records);

}  // namespace kbz
