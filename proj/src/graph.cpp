#include "causat/graph.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

namespace causat {

MixedGraph::MixedGraph(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() > static_cast<std::size_t>(kMaxNodes)) {
    throw std::invalid_argument("too many nodes (limit " + std::to_string(kMaxNodes) + ")");
  }
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw std::invalid_argument("empty node name");
    if (!seen.insert(n).second) throw std::invalid_argument("duplicate node name '" + n + "'");
  }
  children_.resize(names_.size());
  parents_.resize(names_.size());
  spouses_.resize(names_.size());
}

MixedGraph MixedGraph::with_size(int n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (int i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
  return MixedGraph(std::move(names));
}

std::optional<int> MixedGraph::index_of(std::string_view name) const {
  for (int i = 0; i < size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

void MixedGraph::check_pair(int a, int b) const {
  if (a < 0 || b < 0 || a >= size() || b >= size()) {
    throw std::out_of_range("node index out of range");
  }
  if (a == b) throw std::invalid_argument("self-loops are not allowed");
}

void MixedGraph::add_directed(int from, int to) {
  check_pair(from, to);
  children_[from] = children_[from].with(to);
  parents_[to] = parents_[to].with(from);
}

void MixedGraph::add_bidirected(int a, int b) {
  check_pair(a, b);
  spouses_[a] = spouses_[a].with(b);
  spouses_[b] = spouses_[b].with(a);
}

void MixedGraph::remove_directed(int from, int to) {
  check_pair(from, to);
  children_[from] = children_[from].without(to);
  parents_[to] = parents_[to].without(from);
}

void MixedGraph::remove_bidirected(int a, int b) {
  check_pair(a, b);
  spouses_[a] = spouses_[a].without(b);
  spouses_[b] = spouses_[b].without(a);
}

int MixedGraph::directed_count() const {
  int count = 0;
  for (auto c : children_) count += c.size();
  return count;
}

int MixedGraph::bidirected_count() const {
  int count = 0;
  for (auto s : spouses_) count += s.size();
  return count / 2;
}

TestSpec TestSpec::normalized() const {
  TestSpec t = *this;
  if (t.x > t.y) std::swap(t.x, t.y);
  return t;
}

bool test_order(const TestSpec& a, const TestSpec& b) {
  auto key = [](const TestSpec& t) {
    return std::tuple(t.conditioning.size(), t.intervention, t.x, t.y, t.conditioning);
  };
  return key(a) < key(b);
}

MixedGraph manipulate(const MixedGraph& g, NodeSet intervened) {
  if (!intervened.subset_of(g.nodes())) {
    throw std::invalid_argument("intervention set contains unknown nodes");
  }
  MixedGraph out = g;
  for (int v : intervened) {
    for (int p : g.parents(v)) out.remove_directed(p, v);
    for (int s : g.spouses(v)) out.remove_bidirected(v, s);
  }
  return out;
}

bool d_connected(const MixedGraph& g, const TestSpec& t) {
  const NodeSet cond = t.conditioning;
  const NodeSet jset = t.intervention;
  // Edges of the manipulated graph, seen from v.
  auto tails_in = [&](int v) { return jset.contains(v) ? NodeSet() : g.parents(v); };
  auto heads_out = [&](int v) { return g.children(v) - jset; };
  auto bidir = [&](int v) { return jset.contains(v) ? NodeSet() : g.spouses(v) - jset; };

  // arrived_tail: reached v by an edge with a tail at v; arrived_head likewise.
  NodeSet arrived_tail = tails_in(t.x);
  NodeSet arrived_head = heads_out(t.x) | bidir(t.x);
  NodeSet done_tail, done_head;

  while (true) {
    if (arrived_tail.contains(t.y) || arrived_head.contains(t.y)) return true;
    NodeSet todo_tail = arrived_tail - done_tail;
    NodeSet todo_head = arrived_head - done_head;
    if (todo_tail.empty() && todo_head.empty()) return false;
    done_tail = done_tail | todo_tail;
    done_head = done_head | todo_head;
    for (int v : todo_tail) {
      if (cond.contains(v)) continue;  // non-collider in C
      arrived_tail = arrived_tail | tails_in(v);
      arrived_head = arrived_head | heads_out(v) | bidir(v);
    }
    for (int v : todo_head) {
      if (cond.contains(v)) {
        arrived_tail = arrived_tail | tails_in(v);
        arrived_head = arrived_head | bidir(v);
      } else {
        arrived_head = arrived_head | heads_out(v);
      }
    }
  }
}

int max_path_length(int node_count, const TestSpec& t) {
  const NodeSet involved = t.conditioning | t.intervention | NodeSet{t.x, t.y};
  int bound = 2 * node_count - involved.size() - 1;
  if (node_count >= 3) bound = std::min(bound, 2 * node_count - 4);
  return std::max(bound, 1);
}

bool has_directed_path(const MixedGraph& g, int from, int to) {
  NodeSet reached = g.children(from);
  NodeSet done;
  while (true) {
    if (reached.contains(to)) return true;
    NodeSet todo = reached - done;
    if (todo.empty()) return false;
    done = done | todo;
    for (int v : todo) reached = reached | g.children(v);
  }
}

bool is_acyclic(const MixedGraph& g) {
  for (int v = 0; v < g.size(); ++v) {
    if (has_directed_path(g, v, v)) return false;
  }
  return true;
}

MixedGraph random_graph(int node_count, double edge_prob, Rng& rng) {
  if (edge_prob < 0.0 || edge_prob > 1.0) {
    throw std::invalid_argument("edge probability must lie in [0, 1]");
  }
  MixedGraph g = MixedGraph::with_size(node_count);
  for (int x = 0; x < node_count; ++x) {
    for (int y = 0; y < node_count; ++y) {
      if (x == y) continue;
      if (unit_draw(rng) < edge_prob) g.add_directed(x, y);
    }
  }
  for (int x = 0; x < node_count; ++x) {
    for (int y = x + 1; y < node_count; ++y) {
      if (unit_draw(rng) < edge_prob) g.add_bidirected(x, y);
    }
  }
  return g;
}

std::vector<Experiment> random_experiments(int node_count, int count, Rng& rng) {
  if (count < 1) throw std::invalid_argument("need at least one experiment");
  std::vector<Experiment> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Experiment e;
    for (int v = 0; v < node_count; ++v) {
      switch (rng() % 3) {
        case 0: e.nodes = e.nodes.with(v); e.intervened = e.intervened.with(v); break;
        case 1: e.nodes = e.nodes.with(v); break;
        default: break;
      }
    }
    out.push_back(e);
  }
  return out;
}

std::vector<NodeSet> subsets_of_size(NodeSet pool, int size) {
  std::vector<NodeSet> out;
  if (size < 0 || size > pool.size()) return out;
  const std::vector<int> members(pool.begin(), pool.end());
  const int m = static_cast<int>(members.size());
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    if (std::popcount(mask) != size) continue;
    NodeSet s;
    for (int i = 0; i < m; ++i) {
      if ((mask >> i) & 1u) s = s.with(members[i]);
    }
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Relation> oracle_relations(const MixedGraph& g,
                                       const std::vector<Experiment>& experiments,
                                       std::optional<int> max_c) {
  std::set<TestSpec, decltype(&test_order)> specs(&test_order);
  for (const auto& e : experiments) {
    if (!e.nodes.subset_of(g.nodes()) || !e.intervened.subset_of(e.nodes)) {
      throw std::invalid_argument("experiment references nodes outside the graph");
    }
    const int cap = max_c.value_or(e.nodes.size() - 2);
    for (int x : e.nodes) {
      for (int y : e.nodes) {
        if (y <= x) continue;
        const NodeSet pool = e.nodes - NodeSet{x, y};
        for (int c = 0; c <= std::min(cap, pool.size()); ++c) {
          for (NodeSet cs : subsets_of_size(pool, c)) {
            specs.insert(TestSpec{x, y, cs, e.intervened});
          }
        }
      }
    }
  }
  std::vector<Relation> out;
  out.reserve(specs.size());
  for (const auto& t : specs) out.push_back(Relation{t, d_connected(g, t)});
  return out;
}

}  // namespace causat
