#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <cstddef>
#include <initializer_list>
#include <iterator>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace causat {

/// Upper bound on |V|; node sets are 32-bit masks.
inline constexpr int kMaxNodes = 32;

using Rng = std::mt19937_64;

/// Uniform draw in [0, 1) from the top 53 bits of one generator output.
/// Used instead of std::uniform_real_distribution so that seeds give the
/// same instances on every standard library.
inline double unit_draw(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Set of node indices, stored as a bit mask.
class NodeSet {
 public:
  constexpr NodeSet() = default;
  constexpr explicit NodeSet(std::uint32_t bits) : bits_(bits) {}
  NodeSet(std::initializer_list<int> members) {
    for (int v : members) bits_ |= bit(v);
  }

  static constexpr NodeSet all(int n) {
    return NodeSet(n >= 32 ? ~0u : ((1u << n) - 1u));
  }

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool contains(int v) const { return (bits_ >> v) & 1u; }
  constexpr bool subset_of(NodeSet other) const {
    return (bits_ & ~other.bits_) == 0;
  }

  constexpr NodeSet with(int v) const { return NodeSet(bits_ | bit(v)); }
  constexpr NodeSet without(int v) const { return NodeSet(bits_ & ~bit(v)); }
  constexpr NodeSet operator|(NodeSet o) const { return NodeSet(bits_ | o.bits_); }
  constexpr NodeSet operator&(NodeSet o) const { return NodeSet(bits_ & o.bits_); }
  constexpr NodeSet operator-(NodeSet o) const { return NodeSet(bits_ & ~o.bits_); }

  constexpr auto operator<=>(const NodeSet&) const = default;

  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = int;
    using difference_type = std::ptrdiff_t;
    using pointer = void;
    using reference = int;

    constexpr iterator() = default;
    constexpr explicit iterator(std::uint32_t rest) : rest_(rest) {}
    constexpr int operator*() const { return std::countr_zero(rest_); }
    constexpr iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    constexpr iterator operator++(int) {
      iterator old = *this;
      ++*this;
      return old;
    }
    constexpr bool operator==(const iterator&) const = default;

   private:
    std::uint32_t rest_ = 0;
  };
  constexpr iterator begin() const { return iterator(bits_); }
  constexpr iterator end() const { return iterator(0); }

 private:
  static constexpr std::uint32_t bit(int v) { return 1u << v; }
  std::uint32_t bits_ = 0;
};

/// Directed graph with bidirected edges over named nodes. Any combination of
/// x->y, y->x and x<->y may be present; self-loops are rejected.
class MixedGraph {
 public:
  MixedGraph() = default;
  explicit MixedGraph(std::vector<std::string> names);
  /// Nodes named v0, v1, ...
  static MixedGraph with_size(int n);

  int size() const { return static_cast<int>(names_.size()); }
  NodeSet nodes() const { return NodeSet::all(size()); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(int v) const { return names_.at(v); }
  std::optional<int> index_of(std::string_view name) const;

  bool has_directed(int from, int to) const { return children_[from].contains(to); }
  bool has_bidirected(int a, int b) const { return spouses_[a].contains(b); }
  void add_directed(int from, int to);
  void add_bidirected(int a, int b);
  void remove_directed(int from, int to);
  void remove_bidirected(int a, int b);

  NodeSet children(int v) const { return children_[v]; }
  NodeSet parents(int v) const { return parents_[v]; }
  NodeSet spouses(int v) const { return spouses_[v]; }

  int directed_count() const;
  int bidirected_count() const;
  bool operator==(const MixedGraph& other) const = default;

 private:
  void check_pair(int a, int b) const;

  std::vector<std::string> names_;
  std::vector<NodeSet> children_;
  std::vector<NodeSet> parents_;
  std::vector<NodeSet> spouses_;
};

/// One data set: all nodes present in it, and the subset that was randomized.
struct Experiment {
  NodeSet nodes;
  NodeSet intervened;

  NodeSet passive() const { return nodes - intervened; }
  bool operator==(const Experiment&) const = default;
};

/// The statement "x and y given C under intervention J".
struct TestSpec {
  int x = 0;
  int y = 0;
  NodeSet conditioning;
  NodeSet intervention;

  /// Same statement with x < y.
  TestSpec normalized() const;
  /// Conditions on an intervened node. Such tests are well defined (the node
  /// blocks every walk through it) and are emitted like any other.
  bool conditions_on_intervened() const { return !(conditioning & intervention).empty(); }
  auto operator<=>(const TestSpec&) const = default;
};

struct Relation {
  TestSpec spec;
  bool connected = false;

  bool operator==(const Relation&) const = default;
};

/// Removes every edge carrying an arrowhead at a node of `intervened`.
MixedGraph manipulate(const MixedGraph& g, NodeSet intervened);

/// d-connection with edge reuse: reachability over (node, mark of the edge
/// we arrived by) on the manipulated graph.
bool d_connected(const MixedGraph& g, const TestSpec& t);

/// Length bound on walks that need to be considered for `t`:
/// 2|V| - |C u J u {x,y}| - 1, capped at 2|V| - 4 when |V| >= 3.
int max_path_length(int node_count, const TestSpec& t);

bool has_directed_path(const MixedGraph& g, int from, int to);
bool is_acyclic(const MixedGraph& g);

/// Includes each directed edge x->y (x-major, then y) and then each
/// bidirected edge x<->y (x < y) independently with `edge_prob`, consuming
/// one generator output per candidate edge in that order.
MixedGraph random_graph(int node_count, double edge_prob, Rng& rng);

/// Each node of each experiment is independently intervened, passively
/// observed or absent with probability 1/3 each (one draw per node).
std::vector<Experiment> random_experiments(int node_count, int count, Rng& rng);

/// All testable statements of every experiment with |C| <= max_c, answered
/// on `g`. Duplicates across experiments are emitted once; output is sorted
/// by (|C|, J, x, y, C).
std::vector<Relation> oracle_relations(const MixedGraph& g,
                                       const std::vector<Experiment>& experiments,
                                       std::optional<int> max_c = std::nullopt);

/// Subsets of `pool` of exactly `size` members, in increasing mask order.
std::vector<NodeSet> subsets_of_size(NodeSet pool, int size);

/// Orders tests for deterministic enumeration: |C|, then J, x, y, C.
bool test_order(const TestSpec& a, const TestSpec& b);

}  // namespace causat
