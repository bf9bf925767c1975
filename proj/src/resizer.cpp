#include "kbz/resizer.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "kbz/error.hpp"
#include "kbz/geometry.hpp"
#include "kbz/io_util.hpp"
#include "kbz/semantic_tree.hpp"

namespace kbz {

namespace {
constexpr int kKbrVersion = 1;
}

ImportanceRanking compute_ranking(const Codebook& parent) {
  parent.validate();
  const PointSet points = embed_codebook(parent);
  const SemanticTree tree = build_mst(points);
  const RemovalOrder order = compute_removal_order(tree, points);

  ImportanceRanking ranking;
  ranking.parent_fingerprint = fingerprint_hex(parent);
  ranking.survival_order.reserve(parent.size());
  ranking.survival_order.push_back(tree.root);
  for (auto it = order.sequence.rbegin(); it != order.sequence.rend(); ++it)
    ranking.survival_order.push_back(*it);
  return ranking;
}

Codebook resize(const Codebook& parent, const ImportanceRanking& ranking,
                std::size_t k) {
  parent.validate();
  if (ranking.parent_fingerprint != fingerprint_hex(parent))
    throw stale_ranking_error(
        "ranking fingerprint does not match this codebook; recompute the ranking");
  if (ranking.survival_order.size() != parent.size())
    throw stale_ranking_error("ranking size does not match this codebook");
  if (k < 1 || k > parent.size())
    throw invalid_input("resize: k must be in [1, " +
                        std::to_string(parent.size()) + "], got " +
                        std::to_string(k));

  Codebook child;
  child.dim = parent.dim;
  child.data.reserve(k * parent.dim);
  std::vector<double> row(parent.dim);
  for (std::size_t i = 0; i < k; ++i) {
    const auto v = parent.vec(static_cast<std::size_t>(ranking.survival_order[i]));
    for (std::size_t j = 0; j < parent.dim; ++j) row[j] = v[j];
    const auto back = log_map(exp_map(row));
    for (double x : back) child.data.push_back(static_cast<float>(x));
  }
  return child;
}

VerifyReport verify_ranking(const Codebook& parent,
                            const ImportanceRanking& ranking) {
  VerifyReport report;
  auto fail = [&report](std::string why) {
    report.ok = false;
    report.detail = std::move(why);
    return report;
  };

  if (ranking.parent_fingerprint != fingerprint_hex(parent))
    return fail("fingerprint mismatch: ranking was computed from a different codebook");

  const std::size_t n = parent.size();
  if (ranking.survival_order.size() != n)
    return fail("survival_order has " +
                std::to_string(ranking.survival_order.size()) +
                " entries, codebook has " + std::to_string(n));

  std::vector<char> seen(n, 0);
  for (std::uint64_t idx : ranking.survival_order) {
    if (idx >= n) return fail("survival_order entry " + std::to_string(idx) +
                              " out of range");
    if (seen[idx]) return fail("survival_order repeats index " + std::to_string(idx));
    seen[idx] = 1;
  }

  const PointSet points = embed_codebook(parent);
  const SemanticTree tree = build_mst(points);
  if (ranking.survival_order[0] != tree.root)
    return fail("survival_order[0] = " +
                std::to_string(ranking.survival_order[0]) +
                " is not the tree root " + std::to_string(tree.root));

  // Replay: reversed survival order (dropping the root) must remove a leaf
  // of the remaining tree at every step.
  std::vector<std::size_t> child_count(n, 0);
  for (std::size_t v = 0; v < n; ++v)
    if (tree.parent[v] >= 0) ++child_count[static_cast<std::size_t>(tree.parent[v])];
  for (std::size_t t = 0; t + 1 < n; ++t) {
    const auto v =
        static_cast<std::size_t>(ranking.survival_order[n - 1 - t]);
    if (v == tree.root || child_count[v] != 0)
      return fail("replay violation at step " + std::to_string(t) + ": node " +
                  std::to_string(v) + " is not a removable leaf");
    --child_count[static_cast<std::size_t>(tree.parent[v])];
  }
  return report;
}

std::string to_kbr_text(const ImportanceRanking& ranking) {
  nlohmann::ordered_json doc;
  doc["version"] = kKbrVersion;
  doc["parent_fingerprint"] = ranking.parent_fingerprint;
  doc["root"] = ranking.root();
  doc["survival_order"] = ranking.survival_order;
  return doc.dump(2) + "\n";
}

ImportanceRanking from_kbr_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw decode_error(std::string("KBR parse error: ") + e.what(), 0);
  }
  try {
    if (doc.at("version").get<int>() != kKbrVersion)
      throw decode_error("unsupported KBR version", 0);
    ImportanceRanking ranking;
    ranking.parent_fingerprint = doc.at("parent_fingerprint").get<std::string>();
    ranking.survival_order =
        doc.at("survival_order").get<std::vector<std::uint64_t>>();
    if (ranking.survival_order.empty())
      throw decode_error("KBR with empty survival_order", 0);
    if (doc.at("root").get<std::uint64_t>() != ranking.survival_order[0])
      throw decode_error("KBR root field disagrees with survival_order", 0);
    return ranking;
  } catch (const nlohmann::json::exception& e) {
    throw decode_error(std::string("KBR field error: ") + e.what(), 0);
  }
}

ImportanceRanking load_kbr(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return from_kbr_text(
      std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void save_kbr(const std::filesystem::path& path, const ImportanceRanking& r) {
  write_file_atomic(path, to_kbr_text(r));
}

}  // namespace kbz
