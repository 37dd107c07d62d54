#include "causat/discovery.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace causat {

// OracleSource ---------------------------------------------------------------

OracleSource OracleSource::from_graph(MixedGraph truth, std::vector<Experiment> experiments) {
  for (const Experiment& e : experiments) {
    if (!e.nodes.subset_of(truth.nodes()) || !e.intervened.subset_of(e.nodes)) {
      throw std::invalid_argument("experiment references nodes outside the graph");
    }
  }
  OracleSource s;
  s.names_ = truth.names();
  s.truth_ = std::move(truth);
  s.experiments_ = std::move(experiments);
  return s;
}

OracleSource OracleSource::from_relations(std::vector<std::string> names, std::vector<Relation> relations) {
  OracleSource s;
  s.names_ = std::move(names);
  const NodeSet all = NodeSet::all(s.node_count());
  for (const Relation& r : relations) {
    const TestSpec t = r.spec.normalized();
    if (t.x == t.y || t.x < 0 || t.y >= s.node_count() || !(t.conditioning | t.intervention).subset_of(all) ||
        t.conditioning.contains(t.x) || t.conditioning.contains(t.y)) {
      throw std::invalid_argument("relation outside the node universe");
    }
    auto& answers = s.listed_[t];
    if (std::find(answers.begin(), answers.end(), r.connected) == answers.end()) answers.push_back(r.connected);
  }
  return s;
}

int OracleSource::max_conditioning() const {
  int c = -1;
  if (truth_) {
    for (const Experiment& e : experiments_) c = std::max(c, e.nodes.size() - 2);
  } else {
    for (const auto& [t, answers] : listed_) c = std::max(c, t.conditioning.size());
  }
  return c;
}

std::vector<TestSpec> OracleSource::candidates(int c) const {
  if (truth_) return enumerate_candidates(experiments_, c, node_count());
  std::vector<TestSpec> out;
  for (const auto& [t, answers] : listed_) {
    if (t.conditioning.size() == c) out.push_back(t);
  }
  std::sort(out.begin(), out.end(), test_order);
  return out;
}

std::vector<bool> OracleSource::answer(const TestSpec& t) const {
  if (truth_) return {d_connected(*truth_, t)};
  auto it = listed_.find(t.normalized());
  if (it == listed_.end()) return {};
  return it->second;
}

std::vector<TestSpec> enumerate_candidates(const std::vector<Experiment>& experiments, int c, int node_count) {
  if (c < 0) throw std::invalid_argument("conditioning size must be non-negative");
  std::set<TestSpec, decltype(&test_order)> specs(&test_order);
  const NodeSet all = NodeSet::all(node_count);
  for (const Experiment& e : experiments) {
    if (!e.nodes.subset_of(all)) throw std::invalid_argument("experiment references unknown nodes");
    for (int x : e.nodes) {
      for (int y : e.nodes) {
        if (y <= x) continue;
        for (NodeSet cs : subsets_of_size(e.nodes - NodeSet{x, y}, c)) specs.insert(TestSpec{x, y, cs, e.intervened});
      }
    }
  }
  return {specs.begin(), specs.end()};
}

// Pruning --------------------------------------------------------------------

namespace {

MixedGraph bound_graph(const EdgeSolution& s, bool include_unknown) {
  const int n = s.node_count();
  MixedGraph g = MixedGraph::with_size(n);
  auto keep = [&](Status st) { return st == Status::present || (include_unknown && st == Status::unknown); };
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      if (keep(s.directed(a, b))) g.add_directed(a, b);
      if (a < b && keep(s.bidirected(a, b))) g.add_bidirected(a, b);
    }
  }
  return g;
}

NodeSet component_of(const MixedGraph& g, int v) {
  NodeSet seen{v};
  NodeSet frontier{v};
  while (!frontier.empty()) {
    NodeSet next;
    for (int u : frontier) next = next | g.children(u) | g.parents(u) | g.spouses(u);
    frontier = next - seen;
    seen = seen | next;
  }
  return seen;
}

}  // namespace

MixedGraph lower_graph(const EdgeSolution& s) { return bound_graph(s, false); }
MixedGraph upper_graph(const EdgeSolution& s) { return bound_graph(s, true); }

PruneResult prune_tests(const EdgeSolution& s, const std::vector<TestSpec>& candidates) {
  const MixedGraph g1 = lower_graph(s);
  const MixedGraph g2 = upper_graph(s);
  PruneResult out;
  std::map<std::uint32_t, MixedGraph> manipulated;
  for (const TestSpec& t : candidates) {
    if (d_connected(g1, t)) {
      out.determined.push_back({t, true});
      continue;
    }
    if (!d_connected(g2, t)) {
      out.determined.push_back({t, false});
      continue;
    }
    auto it = manipulated.find(t.intervention.bits());
    if (it == manipulated.end()) it = manipulated.emplace(t.intervention.bits(), manipulate(g2, t.intervention)).first;
    if (!t.conditioning.subset_of(component_of(it->second, t.x))) {
      out.skipped.push_back(t);
    } else {
      out.open.push_back(t);
    }
  }
  return out;
}

// Discovery ------------------------------------------------------------------

Discovery::Discovery(int node_count, DiscoveryConfig config)
    : n_(node_count),
      config_(std::move(config)),
      encoder_(node_count),
      solver_(make_backend(config_.backend)),
      solution_(node_count) {
  if (config_.max_c && (*config_.max_c < 0 || *config_.max_c > std::max(node_count - 2, 0))) {
    throw std::invalid_argument("max_c must lie in 0..|V|-2");
  }
}

Discovery::~Discovery() = default;
Discovery::Discovery(Discovery&&) noexcept = default;
Discovery& Discovery::operator=(Discovery&&) noexcept = default;

Discovery Discovery::from_encoder(Encoder encoder, const std::string& backend) {
  DiscoveryConfig cfg;
  cfg.backend = backend;
  Discovery d(encoder.node_count(), cfg);
  d.encoder_ = std::move(encoder);
  return d;
}

void Discovery::sync() {
  CnfFormula& f = encoder_.formula();
  f.ensure_vars(encoder_.table().size());
  solver_->add_clauses(f, synced_);
  synced_ = f.clause_count();
}

void Discovery::refresh(DiscoveryStats& stats) {
  sync();
  enum class Item : std::uint8_t { directed, bidirected, ancestral };
  struct Target {
    Item item;
    int a;
    int b;
  };
  std::vector<PropVar> candidates;
  std::unordered_map<std::uint32_t, Target> targets;
  auto want = [&](Lit lit, Target t) {
    targets.emplace(lit.var().id, t);
    candidates.push_back(lit.var());
  };
  for (int a = 0; a < n_; ++a) {
    for (int b = 0; b < n_; ++b) {
      if (a == b) continue;
      if (solution_.directed(a, b) == Status::unknown) want(encoder_.directed(a, b), {Item::directed, a, b});
      if (a < b && solution_.bidirected(a, b) == Status::unknown) {
        want(encoder_.bidirected(a, b), {Item::bidirected, a, b});
      }
    }
  }
  for (auto [a, b] : ancestral_pairs_) {
    if (solution_.ancestral(a, b) == Status::unknown) want(encoder_.ancestral(a, b), {Item::ancestral, a, b});
  }

  BackboneResult bb;
  try {
    bb = backbone(*solver_, candidates);
  } catch (const Unsatisfiable&) {
    throw Contradiction("the relations and assumptions admit no graph (formula unsatisfiable)");
  }
  ++stats.backbone_runs;
  stats.sat_calls += bb.sat_calls;
  synced_ = encoder_.formula().clause_count();
  for (Lit l : bb.fixed) {
    const Target& t = targets.at(l.var().id);
    const Status st = l.negated() ? Status::absent : Status::present;
    switch (t.item) {
      case Item::directed:
        solution_.set_directed(t.a, t.b, st);
        break;
      case Item::bidirected:
        solution_.set_bidirected(t.a, t.b, st);
        break;
      case Item::ancestral:
        solution_.set_ancestral(t.a, t.b, st);
        break;
    }
  }
}

DiscoveryResult Discovery::run(const OracleSource& oracle) {
  if (oracle.node_count() != n_) throw std::invalid_argument("oracle has a different node count");
  if (n_ < 1) throw std::invalid_argument("empty node universe");
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  std::optional<Clock::time_point> deadline;
  if (config_.timeout) deadline = start + *config_.timeout;
  solver_->set_deadline(deadline);
  auto check_time = [&] {
    if (deadline && Clock::now() > *deadline) throw Interrupted("discovery: deadline reached");
  };

  DiscoveryResult result;
  DiscoveryStats& stats = result.stats;

  if (config_.assumptions.no_latents) encoder_.constrain_sufficiency();
  if (config_.assumptions.acyclic) encoder_.constrain_acyclicity();
  for (const BackgroundConstraint& k : config_.background) encoder_.add_background(k);
  if (config_.track_ancestral) {
    for (int a = 0; a < n_; ++a) {
      for (int b = 0; b < n_; ++b) {
        if (a == b) continue;
        ancestral_pairs_.emplace_back(a, b);
        encoder_.ancestral(a, b);
      }
    }
  }
  refresh(stats);

  const bool from_list = !oracle.graph_backed();
  const int top = std::min(config_.max_c.value_or(n_), oracle.max_conditioning());
  for (int c = 0; c <= top; ++c) {
    check_time();
    // With every edge known, G1 = G2 and no test can be open.
    if (!from_list && solution_.determined_edges() == n_ * (n_ - 1) * 3 / 2) break;
    ++stats.levels;
    const std::vector<TestSpec> candidates = oracle.candidates(c);
    stats.candidates += candidates.size();
    PruneResult pruned = prune_tests(solution_, candidates);
    stats.determined_by_pruning += pruned.determined.size();

    std::size_t added = 0;
    auto encode = [&](const TestSpec& t, bool connected) {
      encoder_.encode_relation({t, connected});
      result.encoded.push_back({t, connected});
      ++added;
    };
    // Answers that disagree with a determined polarity (wrong background
    // knowledge or assumptions, inconsistent lists) must still reach the
    // formula so the contradiction is reported.
    for (const Relation& r : pruned.determined) {
      for (bool a : oracle.answer(r.spec)) {
        if (a != r.connected) encode(r.spec, a);
      }
    }
    if (from_list) {
      // A listed test need not have its smaller-set twin in the list, so
      // nothing is skipped.
      pruned.open.insert(pruned.open.end(), pruned.skipped.begin(), pruned.skipped.end());
      pruned.skipped.clear();
    }
    stats.skipped += pruned.skipped.size();
    for (const TestSpec& t : pruned.open) {
      const std::vector<bool> answers = oracle.answer(t);
      if (answers.empty()) ++stats.unavailable;
      for (bool a : answers) encode(t, a);
    }
    check_time();
    if (added > 0) refresh(stats);
  }
  stats.encoded = result.encoded.size();

  stats.variables = encoder_.table().size();
  stats.clauses = encoder_.formula().clause_count();
  stats.solver = solver_->stats();
  stats.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  result.solution = solution_;
  return result;
}

std::variant<bool, Lit> Discovery::compile(const Query& q) {
  using Kind = Query::Kind;
  CnfFormula& f = encoder_.formula();
  VarTable& table = encoder_.table();
  switch (q.kind) {
    case Kind::constant:
      return q.value;
    case Kind::directed:
      return encoder_.directed(q.x, q.y);
    case Kind::bidirected:
      return encoder_.bidirected(q.x, q.y);
    case Kind::ancestral:
      return encoder_.ancestral(q.x, q.y);
    case Kind::connected:
      return encoder_.relation(q.spec);
    case Kind::walk:
      return encoder_.directed_walk(q.stops, q.max_length);
    case Kind::exactly: {
      std::vector<Lit> lits;
      for (int a = 0; a < n_; ++a) {
        for (int b = 0; b < n_; ++b) {
          if (a == b) continue;
          const bool on = std::find(q.directed_edges.begin(), q.directed_edges.end(), std::pair(a, b)) !=
                          q.directed_edges.end();
          lits.push_back(on ? encoder_.directed(a, b) : ~encoder_.directed(a, b));
        }
      }
      for (int a = 0; a < n_; ++a) {
        for (int b = a + 1; b < n_; ++b) {
          const bool on = std::find(q.bidirected_edges.begin(), q.bidirected_edges.end(), std::pair(a, b)) !=
                              q.bidirected_edges.end() ||
                          std::find(q.bidirected_edges.begin(), q.bidirected_edges.end(), std::pair(b, a)) !=
                              q.bidirected_edges.end();
          lits.push_back(on ? encoder_.bidirected(a, b) : ~encoder_.bidirected(a, b));
        }
      }
      if (lits.size() == 1) return lits.front();
      return define_and(f, table, lits);
    }
    case Kind::negation: {
      if (q.operands.size() != 1) throw std::invalid_argument("negation takes one operand");
      auto inner = compile(q.operands.front());
      if (auto* b = std::get_if<bool>(&inner)) return !*b;
      return ~std::get<Lit>(inner);
    }
    case Kind::conjunction:
    case Kind::disjunction: {
      const bool is_and = q.kind == Kind::conjunction;
      std::vector<Lit> lits;
      for (const Query& op : q.operands) {
        auto part = compile(op);
        if (auto* b = std::get_if<bool>(&part)) {
          if (*b != is_and) return *b;  // false in a conjunction, true in a disjunction
          continue;
        }
        lits.push_back(std::get<Lit>(part));
      }
      if (lits.empty()) return is_and;
      if (lits.size() == 1) return lits.front();
      return is_and ? define_and(f, table, lits) : define_or(f, table, lits);
    }
  }
  throw std::logic_error("unhandled query kind");
}

Verdict Discovery::query(const Query& q) {
  const auto compiled = compile(q);
  sync();
  auto satisfiable_with = [&](std::optional<Lit> lit) {
    std::vector<Lit> assume;
    if (lit) assume.push_back(*lit);
    const SolveOutcome o = solver_->solve_under(assume);
    if (o.status == SolveStatus::interrupted) throw Interrupted("query: deadline reached");
    return o.satisfiable();
  };
  if (const bool* b = std::get_if<bool>(&compiled)) {
    if (!satisfiable_with(std::nullopt)) throw Contradiction("the working formula is unsatisfiable");
    return *b ? Verdict::always_true : Verdict::always_false;
  }
  const Lit lit = std::get<Lit>(compiled);
  const bool can_hold = satisfiable_with(lit);
  const bool can_fail = satisfiable_with(~lit);
  if (can_hold && can_fail) return Verdict::contingent;
  if (can_hold) return Verdict::always_true;
  if (can_fail) return Verdict::always_false;
  throw Contradiction("the working formula is unsatisfiable");
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::always_true:
      return "always-true";
    case Verdict::always_false:
      return "always-false";
    case Verdict::contingent:
      break;
  }
  return "contingent";
}

DiscoveryResult discover(const OracleSource& oracle, const DiscoveryConfig& config) {
  Discovery d(oracle.node_count(), config);
  return d.run(oracle);
}

}  // namespace causat
