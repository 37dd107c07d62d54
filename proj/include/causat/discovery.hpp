#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "causat/encoder.hpp"
#include "causat/graph.hpp"
#include "causat/sat.hpp"
#include "causat/solution.hpp"

namespace causat {

/// The working formula is unsatisfiable: no graph in the model space agrees
/// with the input.
class Contradiction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DiscoveryConfig {
  /// Largest conditioning set size tested; unset means no cap.
  std::optional<int> max_c;
  Assumptions assumptions;
  std::vector<BackgroundConstraint> background;
  /// Report ancestral statuses by adding ancestral relations to the backbone.
  bool track_ancestral = false;
  /// "embedded" or "external:PATH".
  std::string backend = "embedded";
  /// Wall-clock budget for the whole run; exceeding it throws Interrupted.
  std::optional<std::chrono::steady_clock::duration> timeout;
};

/// Where relations come from: a ground-truth graph observed through a list
/// of experiments, or a fixed list of relations over a given node universe.
class OracleSource {
 public:
  static OracleSource from_graph(MixedGraph truth, std::vector<Experiment> experiments);
  static OracleSource from_relations(std::vector<std::string> names, std::vector<Relation> relations);

  int node_count() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  bool graph_backed() const { return truth_.has_value(); }
  const std::vector<Experiment>& experiments() const { return experiments_; }

  /// Largest conditioning set size any candidate test can have.
  int max_conditioning() const;
  /// Candidate tests with |C| = c, deduplicated, in deterministic order.
  std::vector<TestSpec> candidates(int c) const;
  /// Answers for a test. Empty when unavailable; more than one value only
  /// when a fixed list states both polarities.
  std::vector<bool> answer(const TestSpec& t) const;

 private:
  OracleSource() = default;

  std::vector<std::string> names_;
  std::optional<MixedGraph> truth_;
  std::vector<Experiment> experiments_;
  std::map<TestSpec, std::vector<bool>> listed_;  // keyed by normalized spec
};

/// All (x, y, C, J_i) with {x, y} u C inside some experiment's node set and
/// |C| = c, deduplicated on (unordered pair, C, J), ordered by test_order.
std::vector<TestSpec> enumerate_candidates(const std::vector<Experiment>& experiments, int c, int node_count);

struct PruneResult {
  /// Tests whose polarity every graph compatible with the solution shares.
  std::vector<Relation> determined;
  std::vector<TestSpec> open;
  /// Tests whose conditioning set contains a node that no walk between the
  /// endpoints can reach; they repeat a test with a smaller set.
  std::vector<TestSpec> skipped;
};

/// G1 keeps only edges known present, G2 adds every unknown edge. A test
/// connected in G1 is connected everywhere; one separated in G2 is
/// separated everywhere.
PruneResult prune_tests(const EdgeSolution& s, const std::vector<TestSpec>& candidates);

/// The graphs G1 (known edges) and G2 (known and unknown edges).
MixedGraph lower_graph(const EdgeSolution& s);
MixedGraph upper_graph(const EdgeSolution& s);

struct DiscoveryStats {
  int levels = 0;
  std::size_t candidates = 0;
  std::size_t encoded = 0;
  std::size_t determined_by_pruning = 0;
  std::size_t skipped = 0;
  std::size_t unavailable = 0;
  std::size_t backbone_runs = 0;
  std::uint64_t sat_calls = 0;
  std::uint32_t variables = 0;
  std::size_t clauses = 0;
  SolverStats solver;
  double seconds = 0.0;
};

struct DiscoveryResult {
  EdgeSolution solution;
  DiscoveryStats stats;
  /// Relations added to the formula, in encoding order.
  std::vector<Relation> encoded;
};

// Query expressions ---------------------------------------------------------

struct Query {
  enum class Kind { constant, directed, bidirected, ancestral, connected, walk, exactly, negation, conjunction,
                    disjunction };
  Kind kind = Kind::constant;
  bool value = false;  // constant
  int x = 0;           // directed / bidirected / ancestral
  int y = 0;
  TestSpec spec;                                  // connected
  std::vector<int> stops;                         // walk
  std::optional<int> max_length;                  // walk
  std::vector<std::pair<int, int>> directed_edges;  // exactly
  std::vector<std::pair<int, int>> bidirected_edges;
  std::vector<Query> operands;
};

/// Grammar: or := and ('|' and)*; and := unary ('&' unary)*;
/// unary := '!' unary | '(' or ')' | atom. Atoms: true, false, a->b, a<-b,
/// a<->b, anc(a,b), con(a b | C || J), sep(a b | C || J),
/// path(a b via w1 w2 len <= L), exactly(a->b, c<->d, ...).
/// Throws std::invalid_argument with the offending position.
Query parse_query(std::string_view text, const std::vector<std::string>& names);

enum class Verdict { always_true, always_false, contingent };
std::string_view to_string(Verdict v);

/// Runs the discovery loop and keeps the working formula and solver for
/// later queries.
class Discovery {
 public:
  Discovery(int node_count, DiscoveryConfig config);
  ~Discovery();
  Discovery(Discovery&&) noexcept;
  Discovery& operator=(Discovery&&) noexcept;

  /// Throws Contradiction when the formula becomes unsatisfiable and
  /// Interrupted when the timeout expires.
  DiscoveryResult run(const OracleSource& oracle);

  /// Classifies `q` against the current formula.
  Verdict query(const Query& q);

  Encoder& encoder() { return encoder_; }
  const Encoder& encoder() const { return encoder_; }
  const EdgeSolution& solution() const { return solution_; }

  /// Resumes from a saved formula; runs no discovery.
  static Discovery from_encoder(Encoder encoder, const std::string& backend = "embedded");

 private:
  void sync();
  void refresh(DiscoveryStats& stats);
  std::variant<bool, Lit> compile(const Query& q);

  int n_;
  DiscoveryConfig config_;
  Encoder encoder_;
  std::unique_ptr<SatBackend> solver_;
  std::size_t synced_ = 0;
  EdgeSolution solution_;
  std::vector<std::pair<int, int>> ancestral_pairs_;
};

/// One-shot convenience wrapper around Discovery::run.
DiscoveryResult discover(const OracleSource& oracle, const DiscoveryConfig& config = {});

}  // namespace causat
