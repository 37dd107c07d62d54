#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "causat/cnf.hpp"

namespace causat {

enum class SolveStatus { satisfiable, unsatisfiable, interrupted };

struct SolveOutcome {
  SolveStatus status = SolveStatus::unsatisfiable;
  /// Indexed by variable id; slot 0 unused. Empty unless satisfiable.
  std::vector<bool> model;

  bool satisfiable() const { return status == SolveStatus::satisfiable; }
  bool value(PropVar v) const { return model.at(v.id); }
};

struct SolverStats {
  std::uint64_t solves = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t restarts = 0;
};

/// Thrown when a formula that must be satisfiable is not.
class Unsatisfiable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a solve hits its deadline.
class Interrupted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incremental SAT solving contract: clauses accumulate, assumptions apply
/// to a single call.
class SatBackend {
 public:
  virtual ~SatBackend() = default;

  virtual void add_clause(std::span<const Lit> clause) = 0;
  virtual SolveOutcome solve_under(std::span<const Lit> assumptions) = 0;
  virtual std::uint32_t var_count() const = 0;
  virtual SolverStats stats() const = 0;
  virtual void set_deadline(std::optional<std::chrono::steady_clock::time_point> deadline) = 0;

  /// Adds clauses [from, f.clause_count()) of `f`.
  void add_clauses(const CnfFormula& f, std::size_t from = 0);
  SolveOutcome solve() { return solve_under({}); }
};

/// Conflict-driven clause learning solver: two watched literals, 1-UIP
/// learning with recursive minimization, VSIDS, phase saving, Luby restarts
/// and activity-based learnt clause deletion.
class CdclSolver final : public SatBackend {
 public:
  CdclSolver();
  ~CdclSolver() override;
  CdclSolver(const CdclSolver&) = delete;
  CdclSolver& operator=(const CdclSolver&) = delete;

  void add_clause(std::span<const Lit> clause) override;
  SolveOutcome solve_under(std::span<const Lit> assumptions) override;
  std::uint32_t var_count() const override;
  SolverStats stats() const override;
  void set_deadline(std::optional<std::chrono::steady_clock::time_point> deadline) override;

  /// Value fixed at decision level 0, if any.
  std::optional<bool> fixed_value(PropVar v) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Runs an external DIMACS solver (`command <file>`) on a fresh copy of the
/// clauses per call, with assumptions appended as unit clauses. Accepts
/// `SAT`/`UNSAT` or `s SATISFIABLE`/`s UNSATISFIABLE` plus a model line
/// (optionally prefixed `v`).
class ExternalSolver final : public SatBackend {
 public:
  explicit ExternalSolver(std::string command);

  void add_clause(std::span<const Lit> clause) override;
  SolveOutcome solve_under(std::span<const Lit> assumptions) override;
  std::uint32_t var_count() const override { return clauses_.var_count(); }
  SolverStats stats() const override { return stats_; }
  void set_deadline(std::optional<std::chrono::steady_clock::time_point>) override {}

 private:
  std::string command_;
  CnfFormula clauses_;
  SolverStats stats_;
};

/// Parses the output of a DIMACS solver. Throws std::runtime_error when no
/// verdict is found.
SolveOutcome parse_solver_output(const std::string& text, std::uint32_t var_count);

/// "embedded" or "external:PATH".
std::unique_ptr<SatBackend> make_backend(const std::string& spec);

struct BackboneResult {
  /// Backbone literals: the variable with its polarity.
  std::vector<Lit> fixed;
  std::vector<PropVar> free;
  std::uint64_t sat_calls = 0;
};

struct BackboneOptions {
  /// Drop candidates seen with both values across models without testing them.
  bool model_filtering = true;
  /// Add each backbone literal to the solver as a unit clause.
  bool commit_units = true;
};

/// A candidate is fixed at polarity p iff the formula is unsatisfiable with
/// it assumed at !p. Throws Unsatisfiable if the formula itself is.
BackboneResult backbone(SatBackend& solver, std::span<const PropVar> candidates,
                        const BackboneOptions& options = {});

}  // namespace causat
