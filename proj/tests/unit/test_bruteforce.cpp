#include "causat/bruteforce.hpp"
#include "causat/sat.hpp"
#include "doctest.h"

using namespace causat;

namespace {

MixedGraph collider_chain() {
  MixedGraph g({"x", "y", "z", "w"});
  g.add_directed(0, 2);
  g.add_directed(1, 2);
  g.add_directed(2, 3);
  return g;
}

}  // namespace

TEST_CASE("walk enumeration examples") {
  const MixedGraph g = collider_chain();
  const TestSpec t{0, 1, NodeSet{3}, {}};
  // x -> z -> w <- z <- y reuses z -> w and needs four edges.
  CHECK(walks_dconnect(g, t, 4));
  CHECK_FALSE(walks_dconnect(g, t, 3));
  CHECK(walks_dconnect(g, {0, 3, {}, {}}, 2));
  CHECK_FALSE(walks_dconnect(g, {0, 3, {}, {}}, 1));
  CHECK_THROWS(walks_dconnect(g, t, 0));

  const MixedGraph empty = MixedGraph::with_size(4);
  for (int y = 1; y < 4; ++y) CHECK_FALSE(walks_dconnect(empty, {0, y, {}, {}}, 6));
}

TEST_CASE("walk enumeration agrees with reachability on every 3-node graph") {
  int connected = 0;
  enumerate_graphs(3, [&](const MixedGraph& g) {
    for (int x = 0; x < 3; ++x) {
      for (int y = 0; y < 3; ++y) {
        if (x == y) continue;
        const int z = 3 - x - y;
        for (NodeSet c : {NodeSet{}, NodeSet{z}}) {
          for (std::uint32_t j = 0; j < 8; ++j) {
            const TestSpec t{x, y, c, NodeSet(j)};
            const bool d = d_connected(g, t);
            connected += d;
            CHECK(walks_dconnect(g, t, max_path_length(3, t)) == d);
          }
        }
      }
    }
  });
  CHECK(connected > 0);
}

TEST_CASE("walk enumeration agrees with reachability on random graphs") {
  Rng rng(500);
  for (int round = 0; round < 500; ++round) {
    const int n = 3 + static_cast<int>(rng() % 4);
    const MixedGraph g = random_graph(n, 0.1 + 0.3 * unit_draw(rng), rng);
    TestSpec t;
    t.x = static_cast<int>(rng() % n);
    do t.y = static_cast<int>(rng() % n);
    while (t.y == t.x);
    const auto mask = (1u << n) - 1u;
    t.conditioning = NodeSet(static_cast<std::uint32_t>(rng()) & mask).without(t.x).without(t.y);
    t.intervention = NodeSet(static_cast<std::uint32_t>(rng() & rng()) & mask);
    CHECK(walks_dconnect(g, t, max_path_length(n, t)) == d_connected(g, t));
  }
}

TEST_CASE("graph enumeration") {
  const auto count = [](int n) {
    std::size_t c = 0;
    enumerate_graphs(n, [&](const MixedGraph&) { ++c; });
    return c;
  };
  CHECK(count(2) == 8);
  CHECK(count(3) == 512);
  CHECK(count(4) == 262144);
  CHECK(candidate_edge_count(4) == 18);
  CHECK_THROWS_AS(enumerate_graphs(5, [](const MixedGraph&) {}), std::invalid_argument);

  const MixedGraph g = graph_from_bits(3, (1u << 8) | 1u);
  CHECK(g.has_directed(0, 1));
  CHECK(g.directed_count() == 1);
  CHECK(g.has_bidirected(1, 2));

  std::size_t seen = 0;
  std::uint64_t bits = 0;
  enumerate_graphs(2, [&](const MixedGraph& h) {
    CHECK(h == graph_from_bits(2, bits++));
    ++seen;
  });
  CHECK(seen == 8);
}

TEST_CASE("consensus examples") {
  const std::vector<Relation> sep{{{0, 1, {}, {}}, false}};
  const EdgeSolution s = consensus(sep, 2);
  CHECK(s.directed(0, 1) == Status::absent);
  CHECK(s.directed(1, 0) == Status::absent);
  CHECK(s.bidirected(0, 1) == Status::absent);
  CHECK(s.ancestral(0, 1) == Status::absent);

  const EdgeSolution open = consensus({}, 2);
  CHECK(open.directed(0, 1) == Status::unknown);
  CHECK(open.bidirected(0, 1) == Status::unknown);

  const MixedGraph g = collider_chain();
  const auto relations = oracle_relations(g, {{g.nodes(), {}}});
  Assumptions both;
  both.acyclic = true;
  both.no_latents = true;
  const EdgeSolution fig = consensus(relations, 4, both);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      CHECK(fig.directed(a, b) == (g.has_directed(a, b) ? Status::present : Status::absent));
      if (a < b) CHECK(fig.bidirected(a, b) == Status::absent);
    }
  }

  const std::vector<Relation> clash{{{0, 1, {}, {}}, false}, {{0, 1, {}, NodeSet{1}}, true}};
  // x - y connected only when y is intervened on cannot come from any graph
  // without an x -> y edge, and that edge would connect them passively too.
  CHECK_THROWS_AS(consensus(clash, 2), Unsatisfiable);
}

TEST_CASE("solution bookkeeping") {
  EdgeSolution s(3);
  s.set_directed(0, 1, Status::present);
  CHECK(s.ancestral(0, 1) == Status::present);
  s.set_directed(0, 1, Status::present);
  CHECK_THROWS_AS(s.set_directed(0, 1, Status::absent), std::logic_error);
  s.set_bidirected(2, 1, Status::absent);
  CHECK(s.bidirected(1, 2) == Status::absent);
  CHECK(s.determined_edges() == 2);
  CHECK(s.determined_ancestral() == 1);
  CHECK(to_string(Status::unknown) == "unknown");

  Assumptions a;
  a.acyclic = true;
  MixedGraph cyc = MixedGraph::with_size(2);
  cyc.add_directed(0, 1);
  cyc.add_directed(1, 0);
  CHECK_FALSE(a.admits(cyc));
  cyc.remove_directed(1, 0);
  cyc.add_bidirected(0, 1);
  CHECK(a.admits(cyc));
  a.no_latents = true;
  CHECK_FALSE(a.admits(cyc));
}
