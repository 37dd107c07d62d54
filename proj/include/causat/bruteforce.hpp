#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "causat/graph.hpp"
#include "causat/solution.hpp"

namespace causat {

/// Explicit walk search: true iff some walk of at most `l_cap` edges from
/// t.x to t.y in the manipulated graph has all its colliders in C and all
/// other interior nodes outside C. Failed (node, mark, remaining) states are
/// memoized.
bool walks_dconnect(const MixedGraph& g, const TestSpec& t, int l_cap);

/// Largest node count accepted by the graph enumerator.
inline constexpr int kMaxEnumeratedNodes = 4;

/// Number of candidate edges: n(n-1) directed plus n(n-1)/2 bidirected.
int candidate_edge_count(int node_count);

/// Graph whose edge set is given by `bits`: bit k for the k-th directed pair
/// (from-major, skipping from == to), then one bit per bidirected pair a < b.
MixedGraph graph_from_bits(int node_count, std::uint64_t bits);

/// Calls `visit` once for every mixed graph over `node_count` nodes, in
/// increasing bit order. Throws std::invalid_argument above the cap.
void enumerate_graphs(int node_count, const std::function<void(const MixedGraph&)>& visit);

/// Statuses shared by every graph that satisfies the assumptions and agrees
/// with every relation. Throws Unsatisfiable when no graph survives.
EdgeSolution consensus(std::span<const Relation> relations, int node_count,
                       const Assumptions& assumptions = {});

}  // namespace causat
