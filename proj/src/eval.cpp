#include "kbz/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "kbz/codec.hpp"
#include "kbz/error.hpp"
#include "kbz/io_util.hpp"
#include "kbz/resizer.hpp"

namespace kbz {

Mixture realize_mixture(const SyntheticSource& source, std::uint64_t seed) {
  if (source.dim == 0) throw invalid_input("source: dim must be >= 1");
  Rng rng(seed);
  Mixture mix;
  mix.dim = source.dim;

  std::vector<double> weights;
  if (source.kind == SourceKind::GaussianMixture) {
    const auto& p = source.gaussian;
    if (p.components == 0)
      throw invalid_input("gaussian-mixture: components must be >= 1");
    for (std::size_t c = 0; c < p.components; ++c) {
      for (std::size_t j = 0; j < source.dim; ++j)
        mix.means.push_back(p.center_scale * rng.normal());
      mix.sigmas.push_back(p.sigma);
      weights.push_back(1.0);
    }
  } else {
    const auto& p = source.hierarchical;
    if (p.parents == 0 || p.children_per_parent == 0)
      throw invalid_input("hierarchical-gaussian: parents and children must be >= 1");
    if (p.parent_mass <= 0.0 || p.parent_mass >= 1.0)
      throw invalid_input("hierarchical-gaussian: parent_mass must be in (0, 1)");

    std::vector<double> parent_means(p.parents * source.dim);
    for (double& m : parent_means) m = p.parent_center_scale * rng.normal();

    const std::size_t total_children = p.parents * p.children_per_parent;
    for (std::size_t c = 0; c < p.parents; ++c) {
      mix.means.insert(mix.means.end(),
                       parent_means.begin() + static_cast<std::ptrdiff_t>(c * source.dim),
                       parent_means.begin() + static_cast<std::ptrdiff_t>((c + 1) * source.dim));
      mix.sigmas.push_back(p.parent_sigma);
      weights.push_back(p.parent_mass / double(p.parents));
    }
    for (std::size_t c = 0; c < p.parents; ++c) {
      for (std::size_t ch = 0; ch < p.children_per_parent; ++ch) {
        for (std::size_t j = 0; j < source.dim; ++j)
          mix.means.push_back(parent_means[c * source.dim + j] +
                              p.child_offset_scale * rng.normal());
        mix.sigmas.push_back(p.child_sigma);
        weights.push_back((1.0 - p.parent_mass) / double(total_children));
      }
    }
  }

  double total = 0.0;
  mix.cum_weight.reserve(weights.size());
  for (double w : weights) {
    total += w;
    mix.cum_weight.push_back(total);
  }
  return mix;
}

VectorSet draw_samples(const Mixture& mixture, std::size_t n, Rng& rng) {
  if (mixture.dim == 0 || mixture.cum_weight.empty())
    throw invalid_input("draw_samples: unrealized mixture");
  VectorSet out;
  out.dim = mixture.dim;
  out.data.reserve(n * mixture.dim);
  const double total = mixture.cum_weight.back();
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * total;
    const std::size_t c = static_cast<std::size_t>(
        std::lower_bound(mixture.cum_weight.begin(), mixture.cum_weight.end(), u) -
        mixture.cum_weight.begin());
    const double* mean = mixture.means.data() + c * mixture.dim;
    const double sigma = mixture.sigmas[c];
    for (std::size_t j = 0; j < mixture.dim; ++j)
      out.data.push_back(static_cast<float>(mean[j] + sigma * rng.normal()));
  }
  return out;
}

Codebook random_subset_kb(const Codebook& parent, std::size_t k,
                          std::uint64_t seed) {
  parent.validate();
  if (k < 1 || k > parent.size())
    throw invalid_input("random_subset_kb: k must be in [1, " +
                        std::to_string(parent.size()) + "], got " +
                        std::to_string(k));

  // Partial Fisher-Yates, then parent index order.
  std::vector<std::size_t> idx(parent.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(
                                  rng.uniform_index(parent.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());

  Codebook out;
  out.dim = parent.dim;
  out.data.reserve(k * parent.dim);
  for (std::size_t i : idx) {
    const auto v = parent.vec(i);
    out.data.insert(out.data.end(), v.begin(), v.end());
  }
  return out;
}

namespace {

/// Exact squared distance between float vectors, accumulated in double.
/// Every (x, s) pair computes the identical value regardless of which
/// candidate set it appears in, which makes nested-codebook MSE exactly
/// monotone.
double pair_d2(const float* a, const float* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = double(a[i]) - double(b[i]);
    s += d * d;
  }
  return s;
}

}  // namespace

double evaluate_mse(const Codebook& kb, const VectorSet& test) {
  kb.validate();
  if (test.size() == 0) throw invalid_input("evaluate_mse: empty test set");
  if (test.dim != kb.dim)
    throw invalid_input("evaluate_mse: dimension mismatch");

  double sum = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const float* x = test.row(i);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < kb.size(); ++c) {
      const double d2 = pair_d2(x, kb.data.data() + c * kb.dim, kb.dim);
      if (d2 < best) best = d2;
    }
    sum += best;
  }
  return sum / double(test.size());
}

void SweepConfig::validate() const {
  if (parent_size < 1) throw invalid_input("config: parent_size must be >= 1");
  if (child_sizes.empty()) throw invalid_input("config: child_sizes is empty");
  if (!std::is_sorted(child_sizes.begin(), child_sizes.end()))
    throw invalid_input("config: child_sizes must be sorted ascending");
  for (std::size_t k : child_sizes)
    if (k < 1 || k > parent_size)
      throw invalid_input("config: child size " + std::to_string(k) +
                          " outside [1, parent_size]");
  if (seeds.empty()) throw invalid_input("config: seeds is empty");
  if (n_train < parent_size)
    throw invalid_input("config: n_train must be >= parent_size");
  if (n_test < 1) throw invalid_input("config: n_test must be >= 1");
  if (records_csv.empty() || summary_csv.empty())
    throw invalid_input("config: output paths must be nonempty");
}

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::uint64_t parse_u64(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw invalid_input("config: key '" + key + "' expects an integer, got '" +
                        s + "'");
  }
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw invalid_input("config: key '" + key + "' expects a number, got '" +
                        s + "'");
  }
}

}  // namespace

SweepConfig parse_sweep_config(const std::string& text) {
  SweepConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw invalid_input("config: line " + std::to_string(line_no) +
                            " is not 'key = value'");
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw invalid_input("config: empty key on line " + std::to_string(line_no));

    auto& src = cfg.source;
    if (key == "kind") {
      if (value == "gaussian-mixture")
        src.kind = SourceKind::GaussianMixture;
      else if (value == "hierarchical-gaussian")
        src.kind = SourceKind::HierarchicalGaussian;
      else
        throw invalid_input("config: key 'kind' expects 'gaussian-mixture' or "
                            "'hierarchical-gaussian', got '" + value + "'");
    } else if (key == "dim") {
      src.dim = parse_u64(value, key);
    } else if (key == "source_seed") {
      src.seed = parse_u64(value, key);
    } else if (key == "parent_size") {
      cfg.parent_size = parse_u64(value, key);
    } else if (key == "child_sizes") {
      cfg.child_sizes.clear();
      for (const auto& item : split_list(value))
        cfg.child_sizes.push_back(parse_u64(item, key));
    } else if (key == "n_train") {
      cfg.n_train = parse_u64(value, key);
    } else if (key == "n_test") {
      cfg.n_test = parse_u64(value, key);
    } else if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& item : split_list(value))
        cfg.seeds.push_back(parse_u64(item, key));
    } else if (key == "records_csv") {
      cfg.records_csv = value;
    } else if (key == "summary_csv") {
      cfg.summary_csv = value;
    } else if (key == "gm_components") {
      src.gaussian.components = parse_u64(value, key);
    } else if (key == "gm_center_scale") {
      src.gaussian.center_scale = parse_double(value, key);
    } else if (key == "gm_sigma") {
      src.gaussian.sigma = parse_double(value, key);
    } else if (key == "hg_parents") {
      src.hierarchical.parents = parse_u64(value, key);
    } else if (key == "hg_children_per_parent") {
      src.hierarchical.children_per_parent = parse_u64(value, key);
    } else if (key == "hg_parent_center_scale") {
      src.hierarchical.parent_center_scale = parse_double(value, key);
    } else if (key == "hg_parent_sigma") {
      src.hierarchical.parent_sigma = parse_double(value, key);
    } else if (key == "hg_child_offset_scale") {
      src.hierarchical.child_offset_scale = parse_double(value, key);
    } else if (key == "hg_child_sigma") {
      src.hierarchical.child_sigma = parse_double(value, key);
    } else if (key == "hg_parent_mass") {
      src.hierarchical.parent_mass = parse_double(value, key);
    } else {
      throw invalid_input("config: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

namespace {

// Sub-stream tags for deriving per-purpose seeds from a sweep seed.
constexpr std::uint64_t kTagTrain = 0x747261696eULL;
constexpr std::uint64_t kTagTest = 0x74657374ULL;
constexpr std::uint64_t kTagKmeans = 0x6b6d65616e73ULL;
constexpr std::uint64_t kTagSubset = 0x737562736574ULL;

std::vector<EvalRecord> run_seed(const SweepConfig& cfg, std::uint64_t seed) {
  const Mixture mix =
      realize_mixture(cfg.source, mix_seed(cfg.source.seed, seed));
  Rng train_rng(mix_seed(seed, kTagTrain));
  Rng test_rng(mix_seed(seed, kTagTest));
  const VectorSet train = draw_samples(mix, cfg.n_train, train_rng);
  const VectorSet test = draw_samples(mix, cfg.n_test, test_rng);

  const Codebook parent = train_dedicated_kb(
      train, cfg.parent_size, mix_seed(seed, kTagKmeans, cfg.parent_size));
  const ImportanceRanking ranking = compute_ranking(parent);

  std::vector<EvalRecord> records;
  for (std::size_t k : cfg.child_sizes) {
    const Codebook zs = resize(parent, ranking, k);
    // Dedicated training at the parent size reproduces the parent exactly
    // (same samples, size and seed), so reuse it.
    const Codebook dedicated =
        k == cfg.parent_size
            ? parent
            : train_dedicated_kb(train, k, mix_seed(seed, kTagKmeans, k));
    const Codebook subset =
        random_subset_kb(parent, k, mix_seed(seed, kTagSubset, k));

    const unsigned bits = bits_per_index(k);
    records.push_back({seed, "zero-shot", k, bits, evaluate_mse(zs, test)});
    records.push_back({seed, "dedicated", k, bits, evaluate_mse(dedicated, test)});
    records.push_back(
        {seed, "random-subset", k, bits, evaluate_mse(subset, test)});
  }
  return records;
}

}  // namespace

std::vector<EvalRecord> run_sweep(const SweepConfig& config, unsigned threads,
                                  std::ostream* progress) {
  config.validate();
  if (threads < 1) threads = 1;

  std::vector<std::vector<EvalRecord>> per_seed(config.seeds.size());
  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.seeds.size()) return;
      per_seed[i] = run_seed(config, config.seeds[i]);
      if (progress) {
        std::lock_guard lock(log_mutex);
        *progress << "seed " << config.seeds[i] << " done ("
                  << per_seed[i].size() << " records)\n";
      }
    }
  };

  if (threads == 1 || config.seeds.size() == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const unsigned n = std::min<std::size_t>(threads, config.seeds.size());
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<EvalRecord> records;
  for (auto& part : per_seed)
    records.insert(records.end(), part.begin(), part.end());
  std::sort(records.begin(), records.end(),
            [](const EvalRecord& a, const EvalRecord& b) {
              return std::tie(a.seed, a.kb_size, a.method) <
                     std::tie(b.seed, b.kb_size, b.method);
            });
  return records;
}

std::string records_to_csv(const std::vector<EvalRecord>& records) {
  std::string out = "seed,method,K,bits_per_index,mse\n";
  for (const auto& r : records) {
    out += std::to_string(r.seed);
    out += ',';
    out += r.method;
    out += ',';
    out += std::to_string(r.kb_size);
    out += ',';
    out += std::to_string(r.bits_per_index);
    out += ',';
    out += format_g17(r.mse);
    out += '\n';
  }
  return out;
}

std::string summary_to_csv(const std::vector<EvalRecord>& records) {
  struct Agg {
    std::vector<double> values;
    unsigned bits = 0;
  };
  std::map<std::pair<std::string, std::size_t>, Agg> groups;
  for (const auto& r : records) {
    auto& g = groups[{r.method, r.kb_size}];
    g.values.push_back(r.mse);
    g.bits = r.bits_per_index;
  }

  auto mean_of = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
  };

  std::string out =
      "method,K,bits_per_index,mean_mse,std_mse,mse_ratio_vs_dedicated\n";
  for (const auto& [key, g] : groups) {
    const double mean = mean_of(g.values);
    double var = 0.0;
    if (g.values.size() > 1) {
      for (double v : g.values) var += (v - mean) * (v - mean);
      var /= double(g.values.size() - 1);
    }
    double ratio = std::numeric_limits<double>::quiet_NaN();
    if (auto it = groups.find({"dedicated", key.second}); it != groups.end()) {
      const double dmean = mean_of(it->second.values);
      if (dmean > 0.0) ratio = mean / dmean;
    }
    out += key.first;
    out += ',';
    out += std::to_string(key.second);
    out += ',';
    out += std::to_string(g.bits);
    out += ',';
    out += format_g17(mean);
    out += ',';
    out += format_g17(std::sqrt(var));
    out += ',';
    out += format_g17(ratio);
    out += '\n';
  }
  return out;
}

}  // namespace kbz
