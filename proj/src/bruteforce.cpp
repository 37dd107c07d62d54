#include "causat/bruteforce.hpp"

#include <stdexcept>
#include <vector>

#include "causat/sat.hpp"

namespace causat {

namespace {

class WalkSearch {
 public:
  WalkSearch(const MixedGraph& g, const TestSpec& t, int l_cap)
      : g_(manipulate(g, t.intervention)),
        t_(t),
        cap_(l_cap),
        failed_(static_cast<std::size_t>(g.size()) * 2 * (l_cap + 1), false) {}

  bool run() {
    for (const Step& s : steps(t_.x)) {
      if (visit(s.to, s.mark_at_to, cap_ - 1)) return true;
    }
    return false;
  }

 private:
  struct Step {
    int to;
    Mark mark_at_from;
    Mark mark_at_to;
  };

  std::vector<Step> steps(int v) const {
    std::vector<Step> out;
    for (int w : g_.children(v)) out.push_back({w, Mark::tail, Mark::head});
    for (int w : g_.parents(v)) out.push_back({w, Mark::head, Mark::tail});
    for (int w : g_.spouses(v)) out.push_back({w, Mark::head, Mark::head});
    return out;
  }

  // Walk currently ends at v, entered with mark `in`, with `remaining` edges left.
  bool visit(int v, Mark in, int remaining) {
    if (v == t_.y) return true;
    if (remaining == 0) return false;
    const std::size_t key = (static_cast<std::size_t>(v) * 2 + static_cast<std::size_t>(in)) * (cap_ + 1) + remaining;
    if (failed_[key]) return false;
    const bool in_c = t_.conditioning.contains(v);
    for (const Step& s : steps(v)) {
      const bool collider = in == Mark::head && s.mark_at_from == Mark::head;
      if (collider != in_c) continue;
      if (visit(s.to, s.mark_at_to, remaining - 1)) return true;
    }
    failed_[key] = true;
    return false;
  }

  MixedGraph g_;
  TestSpec t_;
  int cap_;
  std::vector<bool> failed_;
};

}  // namespace

bool walks_dconnect(const MixedGraph& g, const TestSpec& t, int l_cap) {
  if (l_cap < 1) throw std::invalid_argument("walk length cap must be at least 1");
  return WalkSearch(g, t, l_cap).run();
}

int candidate_edge_count(int node_count) { return 3 * node_count * (node_count - 1) / 2; }

MixedGraph graph_from_bits(int node_count, std::uint64_t bits) {
  MixedGraph g = MixedGraph::with_size(node_count);
  int k = 0;
  for (int from = 0; from < node_count; ++from) {
    for (int to = 0; to < node_count; ++to) {
      if (from == to) continue;
      if ((bits >> k++) & 1u) g.add_directed(from, to);
    }
  }
  for (int a = 0; a < node_count; ++a) {
    for (int b = a + 1; b < node_count; ++b) {
      if ((bits >> k++) & 1u) g.add_bidirected(a, b);
    }
  }
  return g;
}

void enumerate_graphs(int node_count, const std::function<void(const MixedGraph&)>& visit) {
  if (node_count < 1 || node_count > kMaxEnumeratedNodes) {
    throw std::invalid_argument("graph enumeration supports 1.." + std::to_string(kMaxEnumeratedNodes) +
                                " nodes");
  }
  const std::uint64_t total = std::uint64_t{1} << candidate_edge_count(node_count);
  for (std::uint64_t bits = 0; bits < total; ++bits) visit(graph_from_bits(node_count, bits));
}

EdgeSolution consensus(std::span<const Relation> relations, int node_count, const Assumptions& assumptions) {
  SolutionAccumulator acc(node_count);
  enumerate_graphs(node_count, [&](const MixedGraph& g) {
    if (!assumptions.admits(g)) return;
    for (const Relation& r : relations) {
      if (d_connected(g, r.spec) != r.connected) return;
    }
    acc.add(g);
  });
  if (acc.count() == 0) throw Unsatisfiable("no graph is consistent with the relations");
  return acc.result();
}

}  // namespace causat
