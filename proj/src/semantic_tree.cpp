#include "kbz/semantic_tree.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <queue>

#include "kbz/error.hpp"
#include "kbz/geometry.hpp"
#include "kbz/io_util.hpp"

namespace kbz {

void PointSet::validate() const {
  if (dim == 0) throw invalid_input("point set: dim must be >= 1");
  if (coords.empty()) throw invalid_input("point set: empty");
  if (coords.size() % dim != 0)
    throw invalid_input("point set: coords size is not a multiple of dim");
  for (double x : coords)
    if (!std::isfinite(x))
      throw invalid_input("point set: non-finite coordinate");
  for (std::size_t i = 0; i < size(); ++i) {
    if (squared_norm(point(i)) >= 1.0)
      throw domain_error("point set: point " + std::to_string(i) +
                         " not strictly inside the unit ball");
  }
}

PointSet embed_codebook(const Codebook& cb) {
  cb.validate();
  PointSet ps;
  ps.dim = cb.dim;
  ps.coords.reserve(cb.data.size());
  std::vector<double> row(cb.dim);
  for (std::size_t k = 0; k < cb.size(); ++k) {
    const auto v = cb.vec(k);
    for (std::size_t i = 0; i < cb.dim; ++i) row[i] = v[i];
    const auto p = exp_map(row);
    ps.coords.insert(ps.coords.end(), p.begin(), p.end());
  }
  return ps;
}

double SemanticTree::total_weight() const {
  double s = 0.0;
  for (double w : parent_weight) s += w;
  return s;
}

std::vector<std::vector<std::size_t>> SemanticTree::children() const {
  std::vector<std::vector<std::size_t>> ch(node_count());
  for (std::size_t v = 0; v < node_count(); ++v)
    if (parent[v] >= 0) ch[static_cast<std::size_t>(parent[v])].push_back(v);
  return ch;
}

std::size_t select_root(const PointSet& points) {
  points.validate();
  std::size_t best = 0;
  double best_n2 = squared_norm(points.point(0));
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double n2 = squared_norm(points.point(i));
    if (n2 < best_n2) {
      best_n2 = n2;
      best = i;
    }
  }
  return best;
}

SemanticTree build_mst(const PointSet& points) {
  points.validate();
  const std::size_t n = points.size();
  const std::size_t root = select_root(points);

  SemanticTree tree;
  tree.root = root;
  tree.parent.assign(n, -1);
  tree.parent_weight.assign(n, 0.0);
  if (n == 1) return tree;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<char> in_tree(n, 0);
  std::vector<double> best_dist(n, kInf);
  std::vector<std::size_t> best_from(n, root);

  std::size_t just_added = root;
  in_tree[root] = 1;
  for (std::size_t step = 1; step < n; ++step) {
    const auto pu = points.point(just_added);
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      const double d = hyperbolic_distance(pu, points.point(v));
      if (d < best_dist[v] ||
          (d == best_dist[v] && just_added < best_from[v])) {
        best_dist[v] = d;
        best_from[v] = just_added;
      }
    }
    std::size_t pick = n;
    double pick_dist = kInf;
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      if (best_dist[v] < pick_dist) {
        pick_dist = best_dist[v];
        pick = v;
      }
    }
    in_tree[pick] = 1;
    tree.parent[pick] = static_cast<std::int64_t>(best_from[pick]);
    tree.parent_weight[pick] = best_dist[pick];
    just_added = pick;
  }
  return tree;
}

RemovalOrder compute_removal_order(const SemanticTree& tree,
                                   const PointSet& points) {
  const std::size_t n = tree.node_count();
  if (n == 0) throw invalid_input("compute_removal_order: empty tree");
  if (n != points.size())
    throw invalid_input("compute_removal_order: tree and point set disagree on size");

  std::vector<std::size_t> child_count(n, 0);
  for (std::size_t v = 0; v < n; ++v)
    if (tree.parent[v] >= 0) ++child_count[static_cast<std::size_t>(tree.parent[v])];

  std::vector<double> norm2(n);
  for (std::size_t i = 0; i < n; ++i) norm2[i] = squared_norm(points.point(i));

  // Max-heap keyed by (norm, index): the most boundary-proximate leaf is
  // pruned first, ties broken towards the larger index.
  std::priority_queue<std::pair<double, std::size_t>> leaves;
  for (std::size_t v = 0; v < n; ++v)
    if (child_count[v] == 0 && v != tree.root) leaves.emplace(norm2[v], v);

  RemovalOrder order;
  order.root_index = tree.root;
  order.sequence.reserve(n - 1);
  while (!leaves.empty()) {
    const std::size_t v = leaves.top().second;
    leaves.pop();
    order.sequence.push_back(v);
    const std::size_t p = static_cast<std::size_t>(tree.parent[v]);
    if (--child_count[p] == 0 && p != tree.root) leaves.emplace(norm2[p], p);
  }
  return order;
}

std::vector<std::size_t> prune_to_size(const SemanticTree& tree,
                                       const RemovalOrder& order,
                                       std::size_t k) {
  const std::size_t n = tree.node_count();
  if (order.sequence.size() + 1 != n)
    throw invalid_input("prune_to_size: removal order does not match tree");
  if (k < 1 || k > n)
    throw invalid_input("prune_to_size: k must be in [1, " +
                        std::to_string(n) + "], got " + std::to_string(k));

  std::vector<char> alive(n, 1);
  for (std::size_t t = 0; t < n - k; ++t) alive[order.sequence[t]] = 0;
  std::vector<std::size_t> survivors;
  survivors.reserve(k);
  for (std::size_t v = 0; v < n; ++v)
    if (alive[v]) survivors.push_back(v);
  return survivors;
}

void write_edge_list(std::ostream& out, const SemanticTree& tree) {
  for (std::size_t v = 0; v < tree.node_count(); ++v) {
    if (tree.parent[v] < 0) continue;
    out << v << ' ' << tree.parent[v] << ' '
        << format_g17(tree.parent_weight[v]) << '\n';
  }
}

void write_dot(std::ostream& out, const SemanticTree& tree) {
  out << "digraph semantic_tree {\n";
  out << "  node [shape=circle];\n";
  out << "  " << tree.root << " [shape=doublecircle];\n";
  for (std::size_t v = 0; v < tree.node_count(); ++v) {
    if (tree.parent[v] < 0) continue;
    out << "  " << tree.parent[v] << " -> " << v << " [label=\""
        << format_g17(tree.parent_weight[v]) << "\"];\n";
  }
  out << "}\n";
}

}  // namespace kbz
