#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "causat/cnf.hpp"
#include "causat/graph.hpp"

namespace causat {

struct BackgroundConstraint {
  enum class Kind {
    edge_present,
    edge_absent,
    ancestral_present,
    ancestral_absent,
    path_present,
    path_absent,
  };
  Kind kind = Kind::edge_present;
  int x = 0;
  int y = 0;
  /// Edge kinds only: x <-> y instead of x -> y.
  bool bidirected = false;
  /// Path kinds only: nodes the directed walk visits in order.
  std::vector<int> waypoints;
  /// Path kinds only: bound on the total walk length.
  std::optional<int> max_length;

  bool operator==(const BackgroundConstraint&) const = default;
};

/// Builds the working formula: edge variables, walk variables per
/// (conditioning, intervention) context, relation variables and model-space
/// restrictions.
///
/// Walk variables are indexed by their target node. The variable for
/// (from, to, length, from_mark, to_mark) is true iff the manipulated graph
/// has a walk of exactly that length from `from` to `to`, with the given edge
/// marks at its two ends, that visits `to` only at its end and whose interior
/// nodes are colliders in C or non-colliders outside C. Length-one walks are
/// the edge literals themselves; walk variables that are constantly false are
/// not allocated.
class Encoder {
 public:
  explicit Encoder(int node_count);

  int node_count() const { return node_count_; }
  VarTable& table() { return table_; }
  const VarTable& table() const { return table_; }
  CnfFormula& formula() { return formula_; }
  const CnfFormula& formula() const { return formula_; }

  Lit directed(int from, int to) const;
  Lit bidirected(int a, int b) const;
  /// All edge variables: directed (from-major), then bidirected (a < b).
  std::vector<PropVar> edge_vars() const;

  /// Defines all walk variables of the context up to `max_length`, for every
  /// target. Idempotent.
  void encode_context(NodeSet conditioning, NodeSet intervention, int max_length);

  /// Literal of a walk variable, defining it on demand. nullopt when the walk
  /// type cannot exist (constant false).
  std::optional<Lit> path(NodeSet conditioning, NodeSet intervention, int from, int to, int length,
                          Mark from_mark, Mark to_mark);

  /// Relation variable for `t`, defined as the disjunction of all walks of
  /// length up to max_path_length(). Adds no constraint on its value.
  Lit relation(const TestSpec& t);
  /// Defines the relation variable and asserts its polarity.
  void encode_relation(const Relation& r);
  /// [from d-connected to | {} || {from}]: a directed path from -> ... -> to.
  Lit ancestral(int from, int to);

  void constrain_sufficiency();
  void constrain_acyclicity();
  /// Throws std::invalid_argument for malformed constraints.
  void add_background(const BackgroundConstraint& k);
  /// Variable true iff a directed walk visits `stops` in order with total
  /// length at most `max_length` (default (|stops| - 1)(|V| - 1)).
  Lit directed_walk(std::span<const int> stops, std::optional<int> max_length = std::nullopt);

  std::size_t context_count() const { return contexts_.size(); }

  struct ContextRecord {
    NodeSet conditioning;
    NodeSet intervention;
    int target = 0;
    int length = 0;
  };
  std::vector<ContextRecord> context_records() const;
  /// Rebuilds an encoder from a saved table, formula and context records.
  static Encoder restore(int node_count, VarTable table, CnfFormula formula,
                         std::span<const ContextRecord> records);

  /// Truth assignment (indexed by var id) describing `g`: edge variables from
  /// its edges, walk and relation variables from their graph semantics,
  /// auxiliary variables from their definitions.
  std::vector<bool> assignment_of(const MixedGraph& g) const;

 private:
  struct Context {
    NodeSet conditioning;
    NodeSet intervention;
    std::vector<int> encoded;  // per target: longest defined length
    // per target: DIMACS code per (length >= 2, from, from_mark, to_mark); 0 = false
    std::vector<std::vector<std::int32_t>> codes;
  };

  Context& context(NodeSet conditioning, NodeSet intervention);
  void extend(Context& ctx, int target, int length);
  std::int32_t code(const Context& ctx, int from, int to, int length, Mark from_mark, Mark to_mark) const;
  std::size_t slot(int length, int from, Mark from_mark, Mark to_mark) const;
  void check_node(int v) const;

  int node_count_;
  VarTable table_;
  CnfFormula formula_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, Context> contexts_;
};

}  // namespace causat
