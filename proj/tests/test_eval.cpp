#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "kbz/codec.hpp"
#include "kbz/error.hpp"
#include "kbz/eval.hpp"
#include "kbz/rng.hpp"

using namespace kbz;

namespace {

VectorSet make_set(std::size_t dim, std::vector<float> data) {
  VectorSet s;
  s.dim = dim;
  s.data = std::move(data);
  return s;
}

Codebook make_kb(std::size_t dim, std::vector<float> data) {
  Codebook kb;
  kb.dim = dim;
  kb.data = std::move(data);
  return kb;
}

}  // namespace

TEST_CASE("k-means on K distinct points is a fixed point") {
  // With k == n every point becomes its own centroid; MSE must be zero.
  const VectorSet samples = make_set(2, {0.0f, 0.0f, 1.0f, 0.0f, 0.0f, 1.0f,
                                         5.0f, 5.0f});
  const Codebook kb = train_dedicated_kb(samples, 4, 7);
  CHECK(kb.size() == 4);
  CHECK(evaluate_mse(kb, samples) == 0.0);
  std::set<std::pair<float, float>> centers;
  for (std::size_t c = 0; c < 4; ++c)
    centers.emplace(kb.data[c * 2], kb.data[c * 2 + 1]);
  CHECK(centers.size() == 4);
  CHECK(centers.count({5.0f, 5.0f}) == 1);
}

TEST_CASE("k-means recovers two well-separated cluster means") {
  Rng rng(41);
  VectorSet samples;
  samples.dim = 3;
  const double centers[2][3] = {{-2.0, 0.0, 1.0}, {3.0, 4.0, -1.0}};
  for (int i = 0; i < 2000; ++i) {
    const int c = i % 2;
    for (int j = 0; j < 3; ++j)
      samples.data.push_back(
          static_cast<float>(centers[c][j] + 0.01 * rng.normal()));
  }
  const Codebook kb = train_dedicated_kb(samples, 2, 11);
  CHECK(kb.size() == 2);

  // Each true center must be matched by some centroid to ~the sample mean.
  for (const auto& center : centers) {
    double best = 1e300;
    for (std::size_t c = 0; c < 2; ++c) {
      double d2 = 0.0;
      for (int j = 0; j < 3; ++j) {
        const double d = double(kb.data[c * 3 + j]) - center[j];
        d2 += d * d;
      }
      best = std::min(best, d2);
    }
    CHECK(best <= 1e-5);
  }
}

TEST_CASE("k-means is deterministic for fixed inputs") {
  Rng rng(43);
  VectorSet samples;
  samples.dim = 4;
  for (int i = 0; i < 500; ++i)
    for (int j = 0; j < 4; ++j)
      samples.data.push_back(static_cast<float>(rng.normal()));
  const Codebook a = train_dedicated_kb(samples, 16, 99);
  const Codebook b = train_dedicated_kb(samples, 16, 99);
  CHECK(a.data == b.data);

  const Codebook c = train_dedicated_kb(samples, 16, 100);
  CHECK(c.data != a.data);
}

TEST_CASE("k-means rejects bad arguments") {
  const VectorSet samples = make_set(2, {0.0f, 0.0f, 1.0f, 1.0f});
  CHECK_THROWS_AS((void)train_dedicated_kb(samples, 0, 1), invalid_input);
  CHECK_THROWS_AS((void)train_dedicated_kb(samples, 3, 1), invalid_input);
}

TEST_CASE("random_subset_kb keeps parent order and is deterministic") {
  Rng rng(44);
  Codebook parent;
  parent.dim = 1;
  for (int i = 0; i < 100; ++i)
    parent.data.push_back(static_cast<float>(i));

  const Codebook a = random_subset_kb(parent, 10, 5);
  const Codebook b = random_subset_kb(parent, 10, 5);
  CHECK(a.data == b.data);
  CHECK(a.size() == 10);
  CHECK(std::is_sorted(a.data.begin(), a.data.end()));
  // Values are the original integers, i.e. genuine parent rows.
  std::set<float> unique(a.data.begin(), a.data.end());
  CHECK(unique.size() == 10);
  for (float v : a.data) CHECK(v == std::floor(v));

  const Codebook c = random_subset_kb(parent, 10, 6);
  CHECK(c.data != a.data);

  const Codebook all = random_subset_kb(parent, 100, 7);
  CHECK(all.data == parent.data);

  CHECK_THROWS_AS((void)random_subset_kb(parent, 0, 1), invalid_input);
  CHECK_THROWS_AS((void)random_subset_kb(parent, 101, 1), invalid_input);
}

TEST_CASE("evaluate_mse closed-form cases") {
  const Codebook origin = make_kb(2, {0.0f, 0.0f});
  const VectorSet test = make_set(2, {1.0f, 0.0f, 0.0f, 1.0f});
  CHECK(evaluate_mse(origin, test) == 1.0);

  // Adding the exact test points drives the error to zero.
  const Codebook exact = make_kb(2, {0.0f, 0.0f, 1.0f, 0.0f, 0.0f, 1.0f});
  CHECK(evaluate_mse(exact, test) == 0.0);

  CHECK_THROWS_AS((void)evaluate_mse(origin, make_set(2, {})), invalid_input);
  CHECK_THROWS_AS((void)evaluate_mse(origin, make_set(3, {1.f, 2.f, 3.f})),
                  invalid_input);
}

TEST_CASE("evaluate_mse is exactly monotone under codebook supersets") {
  Rng rng(45);
  Codebook parent;
  parent.dim = 4;
  for (int i = 0; i < 64 * 4; ++i)
    parent.data.push_back(static_cast<float>(rng.normal()));
  VectorSet test;
  test.dim = 4;
  for (int i = 0; i < 500 * 4; ++i)
    test.data.push_back(static_cast<float>(rng.normal()));

  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t k : {4u, 8u, 16u, 32u, 64u}) {
    Codebook prefix;
    prefix.dim = 4;
    prefix.data.assign(parent.data.begin(), parent.data.begin() + k * 4);
    const double mse = evaluate_mse(prefix, test);
    CHECK(mse <= previous);  // exact, no tolerance
    previous = mse;
  }
}

TEST_CASE("mixture realization and sampling are deterministic") {
  SyntheticSource source;
  source.dim = 8;
  const Mixture a = realize_mixture(source, 123);
  const Mixture b = realize_mixture(source, 123);
  CHECK(a.means == b.means);
  CHECK(a.cum_weight == b.cum_weight);
  CHECK(a.means.size() ==
        (source.hierarchical.parents +
         source.hierarchical.parents * source.hierarchical.children_per_parent) *
            source.dim);

  Rng r1(9), r2(9);
  const VectorSet s1 = draw_samples(a, 1000, r1);
  const VectorSet s2 = draw_samples(b, 1000, r2);
  CHECK(s1.data == s2.data);
  CHECK(s1.size() == 1000);

  const Mixture c = realize_mixture(source, 124);
  CHECK(c.means != a.means);
}

TEST_CASE("config parser covers keys, comments and errors") {
  const SweepConfig cfg = parse_sweep_config(
      "# rate sweep\n"
      "kind = gaussian-mixture\n"
      "dim = 4\n"
      "source_seed = 9\n"
      "parent_size = 64\n"
      "child_sizes = 4, 8, 16, 64\n"
      "n_train = 2000   # samples\n"
      "n_test = 500\n"
      "seeds = 1, 2\n"
      "gm_components = 10\n"
      "gm_sigma = 0.1\n"
      "records_csv = r.csv\n"
      "summary_csv = s.csv\n");
  CHECK(cfg.source.kind == SourceKind::GaussianMixture);
  CHECK(cfg.source.dim == 4);
  CHECK(cfg.source.seed == 9);
  CHECK(cfg.parent_size == 64);
  CHECK(cfg.child_sizes == std::vector<std::size_t>{4, 8, 16, 64});
  CHECK(cfg.n_train == 2000);
  CHECK(cfg.n_test == 500);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(cfg.source.gaussian.components == 10);
  CHECK(cfg.source.gaussian.sigma == 0.1);
  CHECK(cfg.records_csv == "r.csv");
  CHECK(cfg.summary_csv == "s.csv");

  try {
    (void)parse_sweep_config("bogus_key = 3\n");
    FAIL("expected invalid_input");
  } catch (const invalid_input& e) {
    CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
  }
  CHECK_THROWS_AS((void)parse_sweep_config("dim = abc\n"), invalid_input);
  CHECK_THROWS_AS((void)parse_sweep_config("just some text\n"), invalid_input);
  // Defaults fail validation only when made inconsistent.
  CHECK_THROWS_AS((void)parse_sweep_config("parent_size = 2\n"), invalid_input);
}

TEST_CASE("small sweep: record shape, determinism and monotonicity") {
  SweepConfig cfg;
  cfg.source.kind = SourceKind::GaussianMixture;
  cfg.source.dim = 4;
  cfg.source.gaussian.components = 16;
  cfg.parent_size = 64;
  cfg.child_sizes = {8, 16, 32, 64};
  cfg.n_train = 3000;
  cfg.n_test = 500;
  cfg.seeds = {1, 2};

  const auto records = run_sweep(cfg);
  CHECK(records.size() == cfg.seeds.size() * cfg.child_sizes.size() * 3);

  // Sorted by (seed, K, method); every cell present exactly once.
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& a = records[i - 1];
    const auto& b = records[i];
    CHECK(std::tie(a.seed, a.kb_size, a.method) <
          std::tie(b.seed, b.kb_size, b.method));
  }
  for (const auto& r : records) {
    CHECK(r.bits_per_index == bits_per_index(r.kb_size));
    CHECK(r.mse > 0.0);
    CHECK(std::isfinite(r.mse));
  }

  // Zero-shot children are nested, so MSE is monotone nonincreasing in K
  // within each seed. Dedicated codebooks are not nested; skip them here.
  for (std::uint64_t seed : cfg.seeds) {
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t k : cfg.child_sizes) {
      for (const auto& r : records)
        if (r.seed == seed && r.kb_size == k && r.method == "zero-shot") {
          CHECK(r.mse <= previous);
          previous = r.mse;
        }
    }
  }

  // Zero-shot at K = parent_size is the whole parent: identical MSE.
  for (std::uint64_t seed : cfg.seeds) {
    double zs = -1.0, dd = -2.0;
    for (const auto& r : records) {
      if (r.seed != seed || r.kb_size != cfg.parent_size) continue;
      if (r.method == "zero-shot") zs = r.mse;
      if (r.method == "dedicated") dd = r.mse;
    }
    // The zero-shot vectors take a float round trip through the embedding,
    // so allow a small relative slack.
    CHECK(zs == doctest::Approx(dd).epsilon(1e-5));
  }

  // Byte-identical CSVs on rerun, including the threaded path.
  const auto rerun = run_sweep(cfg, 4);
  CHECK(records_to_csv(rerun) == records_to_csv(records));

  const std::string records_csv = records_to_csv(records);
  CHECK(records_csv.rfind("seed,method,K,bits_per_index,mse\n", 0) == 0);
  const std::string summary = summary_to_csv(records);
  CHECK(summary.rfind(
            "method,K,bits_per_index,mean_mse,std_mse,mse_ratio_vs_dedicated\n",
            0) == 0);
  CHECK(summary_to_csv(rerun) == summary);

  // Dedicated rows carry ratio exactly 1.
  std::istringstream rows(summary);
  std::string line;
  std::getline(rows, line);
  std::size_t dedicated_rows = 0;
  while (std::getline(rows, line)) {
    if (line.rfind("dedicated,", 0) != 0) continue;
    ++dedicated_rows;
    CHECK(line.substr(line.rfind(',') + 1) == "1");
  }
  CHECK(dedicated_rows == cfg.child_sizes.size());
}
