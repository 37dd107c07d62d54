#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "causat/graph.hpp"

namespace causat {

/// Propositional variable; ids start at 1 (DIMACS numbering).
struct PropVar {
  std::uint32_t id = 0;
  auto operator<=>(const PropVar&) const = default;
};

/// Literal in DIMACS convention: +id or -id.
class Lit {
 public:
  constexpr Lit() = default;
  constexpr Lit(PropVar v, bool negated = false)
      : code_(negated ? -static_cast<std::int32_t>(v.id) : static_cast<std::int32_t>(v.id)) {}
  static constexpr Lit from_dimacs(std::int32_t code) {
    Lit l;
    l.code_ = code;
    return l;
  }

  constexpr PropVar var() const { return PropVar{static_cast<std::uint32_t>(code_ < 0 ? -code_ : code_)}; }
  constexpr bool negated() const { return code_ < 0; }
  constexpr std::int32_t dimacs() const { return code_; }
  constexpr Lit operator~() const { return from_dimacs(-code_); }
  /// Value of the literal under a value of its variable.
  constexpr bool holds(bool var_value) const { return var_value != negated(); }

  constexpr auto operator<=>(const Lit&) const = default;

 private:
  std::int32_t code_ = 0;
};

/// Conjunction of clauses, stored flat.
class CnfFormula {
 public:
  std::size_t clause_count() const { return starts_.size(); }
  std::uint32_t var_count() const { return var_count_; }
  std::size_t literal_count() const { return lits_.size(); }

  /// Appends a non-empty clause.
  void add_clause(std::span<const Lit> clause);
  void add_clause(std::initializer_list<Lit> clause) {
    add_clause(std::span<const Lit>(clause.begin(), clause.size()));
  }
  void ensure_vars(std::uint32_t count) { var_count_ = std::max(var_count_, count); }

  std::span<const Lit> clause(std::size_t i) const {
    const std::size_t end = i + 1 < starts_.size() ? starts_[i + 1] : lits_.size();
    return {lits_.data() + starts_[i], end - starts_[i]};
  }

  /// True if every clause has a literal satisfied by `values` (indexed by var id).
  bool satisfied_by(const std::vector<bool>& values) const;

 private:
  std::vector<Lit> lits_;
  std::vector<std::size_t> starts_;
  std::uint32_t var_count_ = 0;
};

enum class Mark : std::uint8_t { tail = 0, head = 1 };

enum class VarRole : std::uint8_t {
  directed,    ///< [x -> y]
  bidirected,  ///< [x <-> y], x < y
  relation,    ///< [x d-connected y | C || J], x < y
  path,        ///< walk from x to y of a given length and end marks
  conjunction, ///< auxiliary: AND of its definition literals
  disjunction, ///< auxiliary: OR of its definition literals
};

/// Semantic identity of a variable. Fields that do not apply to a role are 0.
struct VarKey {
  VarRole role = VarRole::directed;
  std::uint8_t x = 0;
  std::uint8_t y = 0;
  Mark from_mark = Mark::tail;
  Mark to_mark = Mark::tail;
  std::uint16_t length = 0;
  NodeSet conditioning;
  NodeSet intervention;

  static VarKey directed(int from, int to);
  static VarKey bidirected(int a, int b);
  static VarKey relation(const TestSpec& t);
  static VarKey path(int from, int to, int length, Mark from_mark, Mark to_mark,
                     NodeSet conditioning, NodeSet intervention);

  bool operator==(const VarKey&) const = default;
};

struct VarKeyHash {
  std::size_t operator()(const VarKey& k) const noexcept;
};

/// Map between semantic keys and variables, plus the definitions of
/// auxiliary variables.
class VarTable {
 public:
  /// Existing variable for `key`, or the next free id.
  PropVar fresh_var(const VarKey& key);
  std::optional<PropVar> find(const VarKey& key) const;

  /// Unkeyed auxiliary variable defined as AND / OR of `definition`.
  PropVar conjunction_var(std::span<const Lit> definition);
  PropVar disjunction_var(std::span<const Lit> definition);

  std::uint32_t size() const { return static_cast<std::uint32_t>(keys_.size()); }
  const VarKey& key(PropVar v) const { return keys_.at(v.id - 1); }
  bool is_auxiliary(PropVar v) const {
    const auto role = key(v).role;
    return role == VarRole::conjunction || role == VarRole::disjunction;
  }
  std::span<const Lit> definition(PropVar v) const;

  /// Restores a variable at a fixed id; used when loading saved formulas.
  void restore(PropVar v, const VarKey& key, std::span<const Lit> definition = {});

 private:
  PropVar push(const VarKey& key, std::span<const Lit> definition, bool keyed);

  std::vector<VarKey> keys_;
  std::vector<std::size_t> def_start_;
  std::vector<std::uint32_t> def_size_;
  std::vector<Lit> defs_;
  std::unordered_map<VarKey, PropVar, VarKeyHash> index_;
};

using Term = std::vector<Lit>;

/// Adds clauses for lhs <=> OR_k (AND term_k) using one auxiliary
/// conjunction variable per multi-literal term. An empty rhs yields ~lhs.
void add_equiv_disjunction(CnfFormula& f, VarTable& table, Lit lhs, std::span<const Term> rhs);

/// Fresh auxiliary variable equivalent to the conjunction / disjunction of
/// `lits`, with its defining clauses added to `f`.
Lit define_and(CnfFormula& f, VarTable& table, std::span<const Lit> lits);
Lit define_or(CnfFormula& f, VarTable& table, std::span<const Lit> lits);

/// Standard DIMACS CNF: header line then one zero-terminated clause per line.
void write_dimacs(const CnfFormula& f, std::ostream& out);
/// Parses DIMACS CNF; comment lines are skipped. Throws std::runtime_error.
CnfFormula read_dimacs(std::istream& in);

}  // namespace causat
