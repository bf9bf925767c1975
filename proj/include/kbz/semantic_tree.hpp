#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "kbz/codebook.hpp"

namespace kbz {

/// Points of the Poincare ball, all norms < 1, stored flat in double
/// precision.
struct PointSet {
  std::size_t dim = 0;
  std::vector<double> coords;  // size() * dim, row-major

  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }

  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * dim, dim};
  }

  void validate() const;
};

/// exp_map applied row by row.
PointSet embed_codebook(const Codebook& cb);

/// Rooted spanning tree over point indices. parent[root] == -1; weights are
/// hyperbolic distances to the parent.
struct SemanticTree {
  std::size_t root = 0;
  std::vector<std::int64_t> parent;
  std::vector<double> parent_weight;

  std::size_t node_count() const { return parent.size(); }
  double total_weight() const;
  std::vector<std::vector<std::size_t>> children() const;
};

/// Index of the point nearest the origin (the most general concept); ties
/// go to the smallest index.
std::size_t select_root(const PointSet& points);

/// Minimum spanning tree of the complete hyperbolic-distance graph, rooted
/// at select_root(points). Dense Prim scan: O(n^2) time, O(n) memory.
/// Frontier ties pick the smaller candidate index, attached to the
/// smallest-index tree node achieving the minimum.
SemanticTree build_mst(const PointSet& points);

/// Leaf-pruning order: sequence[t] is the node removed at step t. At every
/// step the leaf with the greatest distance to the origin goes first, ties
/// to the larger index. The root is never removed.
struct RemovalOrder {
  std::size_t root_index = 0;
  std::vector<std::size_t> sequence;  // length node_count - 1
};

RemovalOrder compute_removal_order(const SemanticTree& tree,
                                   const PointSet& points);

/// Indices (ascending) surviving after pruning down to k nodes. The
/// survivors always induce a connected subtree containing the root.
std::vector<std::size_t> prune_to_size(const SemanticTree& tree,
                                       const RemovalOrder& order,
                                       std::size_t k);

/// Plain-text edge list, one "child parent weight" line per non-root node,
/// weights with 17 significant digits.
void write_edge_list(std::ostream& out, const SemanticTree& tree);

/// Graphviz DOT rendering of the same tree.
void write_dot(std::ostream& out, const SemanticTree& tree);

}  // namespace kbz
