#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltree/cadlag_path.hpp"

namespace ltree {

// Tree of a coding function f on [0, m] with f(m) = 0.
class TomTreeView {
 public:
  explicit TomTreeView(CadlagPath f);
  TomTreeView(const TomTreeView&) = delete;
  TomTreeView& operator=(const TomTreeView&) = delete;

  const CadlagPath& coding() const { return f_; }
  double total_mass() const { return f_.lifetime(); }
  double height(double s) const { return f_.value(s); }
  // f(s) + f(t) - 2 inf_{[s,t]} f
  double distance(double s, double t) const;
  double branch_height(double s, double t) const;
  bool same_point(double s, double t) const { return distance(s, t) <= 1e-12; }
  // sup of the class of s.
  double canonical(double s) const;
  // Order of tree points through their canonical times.
  bool less(double s, double t) const;
  // Time representing the ancestor of [s] at height y <= f(s).
  double ancestor(double s, double y) const;
  // Number of tree points at height y (distinct classes).
  std::size_t points_at_height(double y) const;

 private:
  CadlagPath f_;
  RangeMin rmq_;
};

// Three-piece splice placing the guest tree to the right of the host point
// represented by time `site`.
CadlagPath graft_right(const CadlagPath& host, double site, const CadlagPath& guest);

enum class NodeKind { ordinary, binary, infinite };
std::string to_string(NodeKind k);

struct TreeNode {
  int parent = -1;
  std::vector<int> children;
  double birth = 0.0;
  double lifespan = std::numeric_limits<double>::infinity();
  bool prolific = false;
  NodeKind kind = NodeKind::ordinary;

  double death() const { return birth + lifespan; }
};

// Chronological plane tree. Children are kept sorted by birth height, ties in
// insertion order; the index in `children` gives the Ulam-Harris label.
class ChronologicalTree {
 public:
  ChronologicalTree() = default;
  explicit ChronologicalTree(double root_lifespan, bool prolific = false);

  int add_child(int parent, double birth, double lifespan, bool prolific = false,
                NodeKind kind = NodeKind::ordinary);
  // Stable re-sort of every child list by birth height.
  void sort_children();

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const TreeNode& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  TreeNode& node(int i) { return nodes_[static_cast<std::size_t>(i)]; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  // "" for the root, "1.2" for the second child of the first child.
  std::string label(int i) const;
  int generation(int i) const;
  double max_height() const;
  double total_length(double cap = std::numeric_limits<double>::infinity()) const;

  // Own tip first, then children by decreasing birth, ties lower label first.
  std::vector<int> contour_order() const;
  std::vector<std::size_t> generation_sizes() const;
  // Number of lines alive at height a (birth <= a < death).
  std::size_t alive_at(double a) const;

  // Plane-tree axioms and child births inside the parent's life.
  void validate() const;
  nlohmann::json to_json() const;
  // Same shape and labels, heights equal within tol.
  bool approx_equal(const ChronologicalTree& o, double tol = 1e-9) const;

 private:
  std::vector<TreeNode> nodes_;
};

// Jumping contour: starts at the root's death height, slope -1, a jump at each
// birth met on the way down.
CadlagPath encode_jccp(const ChronologicalTree& t);
// Inverse of encode_jccp for any contour whose continuous parts never rise.
ChronologicalTree decode_jccp(const CadlagPath& f);

// Unit lifespans, children born at the parent's death.
ChronologicalTree lukasiewicz_to_tree(const std::vector<long>& e);
std::vector<long> tree_to_lukasiewicz(const ChronologicalTree& t);

ChronologicalTree truncate(const ChronologicalTree& t, double r);
CadlagPath truncate(const CadlagPath& f, double r);

struct SkeletonLine {
  int parent = -1;
  double alpha = 0.0;
  std::vector<int> children;
};

// Marked plane tree (tau_I, alpha) of the lines reaching the truncation level.
struct ProlificSkeleton {
  std::vector<SkeletonLine> lines;

  std::size_t size() const { return lines.size(); }
  std::string label(int i) const;
  // Lines in label order with their heights.
  std::vector<std::pair<std::string, double>> marked() const;
  nlohmann::json to_json() const;
  bool operator==(const ProlificSkeleton& o) const { return marked() == o.marked(); }
  // Same labels, heights equal within tol.
  bool approx_equal(const ProlificSkeleton& o, double tol = 1e-9) const;
};

// Builds the skeleton from the heights m_j at which tip j branches off the
// lineage of tip j-1 (tips listed in contour order; m has one entry less).
ProlificSkeleton skeleton_from_branch_heights(const std::vector<double>& m);

// Tips are the nodes reaching r; tagged mode keeps only prolific ones.
ProlificSkeleton prolific_skeleton(const ChronologicalTree& t, double r, bool tagged = true,
                                   double tol = 1e-9);
// Tips are f.tips, branch heights the minima of f between them.
ProlificSkeleton skeleton_from_contour(const CadlagPath& f);

// Lines as individuals: birth alpha, death r, all prolific.
ChronologicalTree reconstruct(const ProlificSkeleton& s, double r);

// Marks every node whose subtree contains a node reaching r.
void tag_reaching(ChronologicalTree& t, double r, double tol = 1e-9);

}  // namespace ltree
