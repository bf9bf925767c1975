// Independent brute-force oracles used only by the test suites.
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "kbz/geometry.hpp"
#include "kbz/semantic_tree.hpp"

namespace kbz_test {

/// Full pairwise hyperbolic distance matrix.
inline std::vector<double> distance_matrix(const kbz::PointSet& points) {
  const std::size_t n = points.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = kbz::hyperbolic_distance(points.point(i), points.point(j));
      d[i * n + j] = w;
      d[j * n + i] = w;
    }
  return d;
}

/// Minimum spanning-tree weight by exhaustive enumeration of all n^(n-2)
/// labeled trees via Pruefer sequences. Usable for n <= 8 or so.
inline double brute_force_mst_weight(const std::vector<double>& dist,
                                     std::size_t n) {
  if (n == 1) return 0.0;
  if (n == 2) return dist[1];

  const std::size_t seq_len = n - 2;
  std::vector<std::size_t> seq(seq_len, 0);
  double best = std::numeric_limits<double>::infinity();

  while (true) {
    // Decode the Pruefer sequence into tree edges.
    std::vector<std::size_t> degree(n, 1);
    for (std::size_t v : seq) ++degree[v];
    std::vector<char> used(n, 0);
    double weight = 0.0;
    std::size_t remaining = seq_len;
    std::vector<std::size_t> work = seq;
    for (std::size_t step = 0; step < seq_len; ++step) {
      std::size_t leaf = n;
      for (std::size_t v = 0; v < n; ++v)
        if (!used[v] && degree[v] == 1) {
          leaf = v;
          break;
        }
      const std::size_t other = work[step];
      weight += dist[leaf * n + other];
      used[leaf] = 1;
      --degree[other];
      (void)remaining;
    }
    // Two unused vertices remain; join them.
    std::size_t a = n, b = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (used[v] || degree[v] != 1) continue;
      if (a == n)
        a = v;
      else
        b = v;
    }
    weight += dist[a * n + b];
    if (weight < best) best = weight;

    // Next sequence.
    std::size_t pos = 0;
    while (pos < seq_len && seq[pos] == n - 1) seq[pos++] = 0;
    if (pos == seq_len) break;
    ++seq[pos];
  }
  return best;
}

/// Checks that the sequence removes a leaf of the remaining tree at every
/// step and leaves exactly the root. Returns -1 when valid, otherwise the
/// violating step.
inline std::ptrdiff_t replay_removal_order(const kbz::SemanticTree& tree,
                                           const std::vector<std::size_t>& seq) {
  const std::size_t n = tree.node_count();
  if (seq.size() + 1 != n) return 0;
  std::vector<std::size_t> child_count(n, 0);
  for (std::size_t v = 0; v < n; ++v)
    if (tree.parent[v] >= 0)
      ++child_count[static_cast<std::size_t>(tree.parent[v])];
  std::vector<char> removed(n, 0);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const std::size_t v = seq[t];
    if (v >= n || removed[v] || v == tree.root || child_count[v] != 0)
      return static_cast<std::ptrdiff_t>(t);
    removed[v] = 1;
    --child_count[static_cast<std::size_t>(tree.parent[v])];
  }
  return -1;
}

/// Does the node subset induce a connected subtree containing the root?
/// In a rooted tree this holds iff every non-root member's parent is a
/// member too.
inline bool induces_root_subtree(const kbz::SemanticTree& tree,
                                 const std::vector<std::size_t>& nodes) {
  std::vector<char> in(tree.node_count(), 0);
  for (std::size_t v : nodes) in[v] = 1;
  if (!in[tree.root]) return false;
  for (std::size_t v : nodes) {
    if (v == tree.root) continue;
    if (!in[static_cast<std::size_t>(tree.parent[v])]) return false;
  }
  return true;
}

}  // namespace kbz_test
