#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kbz/codebook.hpp"

namespace kbz {

/// Reusable blueprint for resizing one parent codebook: all parent indices
/// ordered from most to least important. The first K entries are the size-K
/// child for every K, so one tree build amortizes over all future resizes.
struct ImportanceRanking {
  std::string parent_fingerprint;  // SHA-256 of the parent KBF bytes, hex
  std::vector<std::uint64_t> survival_order;

  std::uint64_t root() const { return survival_order.at(0); }
};

/// Embeds the parent into the Poincare ball, builds the semantic tree and
/// converts its leaf-pruning order into a global importance ranking.
ImportanceRanking compute_ranking(const Codebook& parent);

/// Materializes the size-k child: the top-k ranked parent vectors, each sent
/// through the ball and back (exp_map then log_map), stored in ranking
/// order. Throws stale_ranking_error if the ranking does not match parent.
Codebook resize(const Codebook& parent, const ImportanceRanking& ranking,
                std::size_t k);

struct VerifyReport {
  bool ok = true;
  std::string detail;  // first violation, empty when ok
};

/// Re-derives the semantic tree and checks the ranking against it:
/// fingerprint, permutation validity, root identity and replay validity of
/// the removal order. Reports the first violation instead of throwing.
VerifyReport verify_ranking(const Codebook& parent,
                            const ImportanceRanking& ranking);

/// KBR document: JSON with fields version, parent_fingerprint, root,
/// survival_order.
std::string to_kbr_text(const ImportanceRanking& ranking);
ImportanceRanking from_kbr_text(const std::string& text);
ImportanceRanking load_kbr(const std::filesystem::path& path);
void save_kbr(const std::filesystem::path& path, const ImportanceRanking& r);

}  // namespace kbz
