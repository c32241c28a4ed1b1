#include "ltree/tree_core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ltree/errors.hpp"

namespace ltree {

TomTreeView::TomTreeView(CadlagPath f) : f_(std::move(f)), rmq_(f_) {
  if (f_.knots.empty()) throw MalformedPath("empty coding function");
}

double TomTreeView::branch_height(double s, double t) const { return rmq_.inf(s, t); }

double TomTreeView::distance(double s, double t) const {
  const double d = f_.value(s) + f_.value(t) - 2.0 * rmq_.inf(s, t);
  return std::max(d, 0.0);
}

double TomTreeView::canonical(double s) const { return rmq_.first_time_below(s, f_.value(s)); }

bool TomTreeView::less(double s, double t) const {
  if (same_point(s, t)) return false;
  return canonical(s) < canonical(t);
}

double TomTreeView::ancestor(double s, double y) const {
  if (y >= f_.value(s)) return s;
  return rmq_.first_time_below(s, y);
}

std::size_t TomTreeView::points_at_height(double y) const {
  std::size_t n = 0;
  const auto& k = f_.knots;
  for (std::size_t i = 0; i + 1 < k.size(); ++i)
    if (k[i].value >= y && k[i + 1].left < y) ++n;
  return n;
}

CadlagPath graft_right(const CadlagPath& host, double site, const CadlagPath& guest) {
  if (guest.empty()) return host;
  if (host.empty() || site < 0.0 || site > host.lifetime()) throw InvalidSite("site outside the host");
  const double height = host.value(site);
  const RangeMin rmq(host);
  const double t = rmq.first_time_below(site, height);
  auto [pre, post] = split_at(host, t);
  std::vector<CadlagPath> parts;
  parts.push_back(std::move(pre));
  parts.push_back(shift_values(guest, height));
  parts.push_back(std::move(post));
  CadlagPath out = concatenate(parts);
  out.terminal = host.terminal;
  return out;
}

std::string to_string(NodeKind k) {
  switch (k) {
    case NodeKind::ordinary: return "ordinary";
    case NodeKind::binary: return "binary";
    case NodeKind::infinite: return "infinite";
  }
  return "unknown";
}

ChronologicalTree::ChronologicalTree(double root_lifespan, bool prolific) {
  TreeNode root;
  root.lifespan = root_lifespan;
  root.prolific = prolific;
  nodes_.push_back(root);
}

int ChronologicalTree::add_child(int parent, double birth, double lifespan, bool prolific,
                                 NodeKind kind) {
  if (parent < 0 || static_cast<std::size_t>(parent) >= nodes_.size())
    throw InvalidSite("unknown parent");
  TreeNode n;
  n.parent = parent;
  n.birth = birth;
  n.lifespan = lifespan;
  n.prolific = prolific;
  n.kind = kind;
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(n);
  auto& ch = nodes_[static_cast<std::size_t>(parent)].children;
  auto it = std::upper_bound(ch.begin(), ch.end(), birth,
                             [this](double b, int c) { return b < node(c).birth; });
  ch.insert(it, id);
  return id;
}

void ChronologicalTree::sort_children() {
  for (auto& n : nodes_)
    std::stable_sort(n.children.begin(), n.children.end(),
                     [this](int a, int b) { return node(a).birth < node(b).birth; });
}

std::string ChronologicalTree::label(int i) const {
  std::vector<int> parts;
  while (node(i).parent >= 0) {
    const auto& ch = node(node(i).parent).children;
    parts.push_back(static_cast<int>(std::find(ch.begin(), ch.end(), i) - ch.begin()) + 1);
    i = node(i).parent;
  }
  std::string s;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (!s.empty()) s += '.';
    s += std::to_string(*it);
  }
  return s;
}

int ChronologicalTree::generation(int i) const {
  int g = 0;
  while (node(i).parent >= 0) {
    i = node(i).parent;
    ++g;
  }
  return g;
}

double ChronologicalTree::max_height() const {
  double m = 0.0;
  for (const auto& n : nodes_) m = std::max(m, n.death());
  return m;
}

double ChronologicalTree::total_length(double cap) const {
  double s = 0.0;
  for (const auto& n : nodes_) s += std::max(0.0, std::min(n.death(), cap) - n.birth);
  return s;
}

std::vector<int> ChronologicalTree::contour_order() const {
  std::vector<int> order;
  if (nodes_.empty()) return order;
  order.reserve(nodes_.size());
  std::vector<int> stack{0};
  std::vector<int> visit;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    order.push_back(u);
    visit = node(u).children;
    // children ascending by birth, ties by label: visiting order is by
    // decreasing birth with the lower label first among ties
    std::stable_sort(visit.begin(), visit.end(), [this](int a, int b) {
      return node(a).birth > node(b).birth;
    });
    for (auto it = visit.rbegin(); it != visit.rend(); ++it) stack.push_back(*it);
  }
  return order;
}

std::vector<std::size_t> ChronologicalTree::generation_sizes() const {
  std::vector<std::size_t> sizes;
  if (nodes_.empty()) return sizes;
  std::vector<int> level{0};
  while (!level.empty()) {
    sizes.push_back(level.size());
    std::vector<int> next;
    for (int u : level)
      for (int c : node(u).children) next.push_back(c);
    level = std::move(next);
  }
  return sizes;
}

std::size_t ChronologicalTree::alive_at(double a) const {
  std::size_t n = 0;
  for (const auto& v : nodes_)
    if (v.birth <= a && a < v.death()) ++n;
  return n;
}

void ChronologicalTree::validate() const {
  const double tol = 1e-9;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if ((i == 0) != (n.parent < 0)) throw MalformedPath("root must be the only parentless node");
    if (!(n.lifespan >= 0.0)) throw MalformedPath("negative lifespan");
    if (n.parent >= 0) {
      const auto& p = node(n.parent);
      if (std::find(p.children.begin(), p.children.end(), static_cast<int>(i)) == p.children.end())
        throw MalformedPath("child missing from its parent");
      if (n.birth < p.birth - tol || n.birth > p.death() + tol)
        throw MalformedPath("birth outside the parent's life");
    }
    for (std::size_t j = 1; j < n.children.size(); ++j)
      if (node(n.children[j]).birth < node(n.children[j - 1]).birth)
        throw MalformedPath("children not sorted by birth");
  }
}

nlohmann::json ChronologicalTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (int i : contour_order()) {
    const auto& n = node(i);
    nlohmann::json j;
    j["label"] = label(i);
    j["birth"] = n.birth;
    if (std::isfinite(n.lifespan))
      j["lifespan"] = n.lifespan;
    else
      j["lifespan"] = "inf";
    j["prolific"] = n.prolific;
    nodes.push_back(std::move(j));
  }
  return {{"nodes", nodes}};
}

bool ChronologicalTree::approx_equal(const ChronologicalTree& o, double tol) const {
  if (empty() || o.empty()) return empty() == o.empty();
  std::function<bool(int, int)> same = [&](int a, int b) {
    const auto& x = node(a);
    const auto& y = o.node(b);
    if (x.children.size() != y.children.size() || x.prolific != y.prolific) return false;
    if (std::abs(x.birth - y.birth) > tol) return false;
    if (std::isfinite(x.lifespan) != std::isfinite(y.lifespan)) return false;
    if (std::isfinite(x.lifespan) && std::abs(x.lifespan - y.lifespan) > tol) return false;
    for (std::size_t k = 0; k < x.children.size(); ++k)
      if (!same(x.children[k], y.children[k])) return false;
    return true;
  };
  return same(0, 0);
}

CadlagPath encode_jccp(const ChronologicalTree& t) {
  CadlagPath f;
  f.terminal = TerminalKind::hit_zero;
  if (t.empty()) return f;
  for (const auto& n : t.nodes())
    if (!std::isfinite(n.lifespan)) throw MalformedPath("contour needs finite lifespans");
  double time = 0.0;
  double h = t.node(0).death();
  f.push(0.0, h);
  // explicit stack of (node, next child position in visiting order)
  struct Frame {
    int u;
    std::vector<int> order;
    std::size_t next;
  };
  auto frame = [&](int u) {
    std::vector<int> order = t.node(u).children;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return t.node(a).birth > t.node(b).birth; });
    return Frame{u, std::move(order), 0};
  };
  std::vector<Frame> stack;
  stack.push_back(frame(0));
  while (!stack.empty()) {
    Frame& fr = stack.back();
    if (fr.next < fr.order.size()) {
      const int c = fr.order[fr.next++];
      const double a = t.node(c).birth;
      time += h - a;
      f.push(time, a);
      h = t.node(c).death();
      f.jump_to(h);
      stack.push_back(frame(c));
    } else {
      const double a = t.node(fr.u).birth;
      time += h - a;
      f.push(time, a);
      h = a;
      stack.pop_back();
    }
  }
  return f;
}

ChronologicalTree decode_jccp(const CadlagPath& f) {
  if (f.knots.empty()) throw MalformedPath("empty contour");
  const double tol = 1e-12;
  ChronologicalTree t(f.knots.front().left);
  std::vector<int> stack{0};
  auto jump = [&](const Knot& k) {
    if (k.value < k.left) throw MalformedPath("downward jump in a contour");
    if (k.value == k.left) return;
    const double a = k.left;
    while (stack.size() > 1 && t.node(stack.back()).birth >= a - tol) stack.pop_back();
    stack.push_back(t.add_child(stack.back(), a, k.value - a));
  };
  jump(f.knots.front());
  for (std::size_t i = 1; i < f.knots.size(); ++i) {
    const Knot& k = f.knots[i];
    if (k.left > f.knots[i - 1].value + 1e-9) throw NotFiniteVariation("contour rises between jumps");
    jump(k);
  }
  return t;
}

ChronologicalTree lukasiewicz_to_tree(const std::vector<long>& e) {
  if (e.size() < 2 || e.front() != 0 || e.back() != -1)
    throw MalformedPath("a Lukasiewicz path runs from 0 to -1");
  const std::size_t n = e.size() - 1;
  std::vector<long> k(n);
  for (std::size_t i = 0; i < n; ++i) {
    k[i] = e[i + 1] - e[i] + 1;
    if (k[i] < 0) throw MalformedPath("increment below -1");
    if (e[i] < 0) throw MalformedPath("path hits -1 too early");
  }
  ChronologicalTree t(1.0);
  // preorder: each stack entry is a node still owed children
  std::vector<std::pair<int, long>> stack{{0, k[0]}};
  for (std::size_t i = 1; i < n; ++i) {
    while (!stack.empty() && stack.back().second == 0) stack.pop_back();
    if (stack.empty()) throw MalformedPath("path describes a forest");
    auto& top = stack.back();
    --top.second;
    const double birth = t.node(top.first).death();
    const int c = t.add_child(top.first, birth, 1.0);
    stack.push_back({c, k[i]});
  }
  return t;
}

std::vector<long> tree_to_lukasiewicz(const ChronologicalTree& t) {
  std::vector<long> e{0};
  if (t.empty()) return e;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    const auto& ch = t.node(u).children;
    e.push_back(e.back() + static_cast<long>(ch.size()) - 1);
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return e;
}

ChronologicalTree truncate(const ChronologicalTree& t, double r) {
  if (!(r > 0.0)) throw OutOfDomain("truncation level must be > 0");
  if (t.empty()) return t;
  const auto& root = t.node(0);
  ChronologicalTree out(std::min(root.lifespan, r - root.birth), root.prolific);
  out.node(0).birth = root.birth;
  out.node(0).kind = root.kind;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [src, dst] = stack.back();
    stack.pop_back();
    for (int c : t.node(src).children) {
      const auto& n = t.node(c);
      if (n.birth >= r) continue;
      const int d = out.add_child(dst, n.birth, std::min(n.lifespan, r - n.birth), n.prolific, n.kind);
      stack.push_back({c, d});
    }
  }
  return out;
}

CadlagPath truncate(const CadlagPath& f, double r) {
  if (!(r > 0.0)) throw OutOfDomain("truncation level must be > 0");
  return time_change_below(f, r);
}

std::string ProlificSkeleton::label(int i) const {
  std::vector<int> parts;
  while (lines[static_cast<std::size_t>(i)].parent >= 0) {
    const int p = lines[static_cast<std::size_t>(i)].parent;
    const auto& ch = lines[static_cast<std::size_t>(p)].children;
    parts.push_back(static_cast<int>(std::find(ch.begin(), ch.end(), i) - ch.begin()) + 1);
    i = p;
  }
  std::string s;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (!s.empty()) s += '.';
    s += std::to_string(*it);
  }
  return s;
}

std::vector<std::pair<std::string, double>> ProlificSkeleton::marked() const {
  std::vector<std::pair<std::string, double>> out;
  if (lines.empty()) return out;
  std::vector<std::pair<int, std::string>> stack{{0, ""}};
  while (!stack.empty()) {
    auto [u, lab] = stack.back();
    stack.pop_back();
    out.emplace_back(lab, lines[static_cast<std::size_t>(u)].alpha);
    const auto& ch = lines[static_cast<std::size_t>(u)].children;
    for (std::size_t k = ch.size(); k-- > 0;)
      stack.push_back({ch[k], lab.empty() ? std::to_string(k + 1) : lab + "." + std::to_string(k + 1)});
  }
  return out;
}

bool ProlificSkeleton::approx_equal(const ProlificSkeleton& o, double tol) const {
  const auto a = marked(), b = o.marked();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].first != b[i].first || std::abs(a[i].second - b[i].second) > tol) return false;
  return true;
}

nlohmann::json ProlificSkeleton::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [lab, a] : marked()) arr.push_back({{"label", lab}, {"alpha", a}});
  return arr;
}

ProlificSkeleton skeleton_from_branch_heights(const std::vector<double>& m) {
  ProlificSkeleton s;
  s.lines.push_back({-1, 0.0, {}});
  int prev = 0;
  for (double h : m) {
    int L = prev;
    while (L != 0 && s.lines[static_cast<std::size_t>(L)].alpha >= h)
      L = s.lines[static_cast<std::size_t>(L)].parent;
    const int id = static_cast<int>(s.lines.size());
    s.lines.push_back({L, h, {}});
    s.lines[static_cast<std::size_t>(L)].children.push_back(id);
    prev = id;
  }
  for (auto& line : s.lines)
    std::stable_sort(line.children.begin(), line.children.end(), [&](int a, int b) {
      return s.lines[static_cast<std::size_t>(a)].alpha < s.lines[static_cast<std::size_t>(b)].alpha;
    });
  return s;
}

ProlificSkeleton prolific_skeleton(const ChronologicalTree& t, double r, bool tagged, double tol) {
  ProlificSkeleton empty;
  if (t.empty()) return empty;
  for (const auto& n : t.nodes())
    if (n.death() > r + tol) throw NotTruncated("a lifespan exceeds the truncation level");
  std::vector<int> tips;
  for (int u : t.contour_order()) {
    const auto& n = t.node(u);
    if (n.death() >= r - tol && (!tagged || n.prolific)) tips.push_back(u);
  }
  if (tips.empty()) return empty;
  std::vector<int> depth(t.size(), 0);
  for (int u : t.contour_order())
    if (t.node(u).parent >= 0) depth[static_cast<std::size_t>(u)] = depth[static_cast<std::size_t>(t.node(u).parent)] + 1;
  std::vector<double> m;
  for (std::size_t j = 1; j < tips.size(); ++j) {
    int a = tips[j - 1], b = tips[j];
    int child_b = -1;
    while (depth[static_cast<std::size_t>(a)] > depth[static_cast<std::size_t>(b)]) a = t.node(a).parent;
    while (depth[static_cast<std::size_t>(b)] > depth[static_cast<std::size_t>(a)]) {
      child_b = b;
      b = t.node(b).parent;
    }
    while (a != b) {
      a = t.node(a).parent;
      child_b = b;
      b = t.node(b).parent;
    }
    m.push_back(child_b >= 0 ? t.node(child_b).birth : t.node(b).birth);
  }
  return skeleton_from_branch_heights(m);
}

ProlificSkeleton skeleton_from_contour(const CadlagPath& f) {
  ProlificSkeleton empty;
  if (f.tips.empty() || f.empty()) return empty;
  const RangeMin rmq(f);
  std::vector<double> m;
  for (std::size_t j = 1; j < f.tips.size(); ++j) m.push_back(rmq.inf(f.tips[j - 1], f.tips[j]));
  return skeleton_from_branch_heights(m);
}

ChronologicalTree reconstruct(const ProlificSkeleton& s, double r) {
  if (s.lines.empty()) return {};
  ChronologicalTree t(r, true);
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [src, dst] = stack.back();
    stack.pop_back();
    for (int c : s.lines[static_cast<std::size_t>(src)].children) {
      const double a = s.lines[static_cast<std::size_t>(c)].alpha;
      stack.push_back({c, t.add_child(dst, a, r - a, true)});
    }
  }
  return t;
}

void tag_reaching(ChronologicalTree& t, double r, double tol) {
  const std::vector<int> order = t.contour_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TreeNode& n = t.node(*it);
    n.prolific = n.death() >= r - tol;
    for (int c : n.children) n.prolific = n.prolific || t.node(c).prolific;
  }
}

}  // namespace ltree
