#include "causat/cnf.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace causat {

void CnfFormula::add_clause(std::span<const Lit> clause) {
  if (clause.empty()) throw std::invalid_argument("empty clause");
  starts_.push_back(lits_.size());
  for (Lit l : clause) {
    if (l.var().id == 0) throw std::invalid_argument("literal with variable id 0");
    var_count_ = std::max(var_count_, l.var().id);
    lits_.push_back(l);
  }
}

bool CnfFormula::satisfied_by(const std::vector<bool>& values) const {
  for (std::size_t i = 0; i < clause_count(); ++i) {
    bool sat = false;
    for (Lit l : clause(i)) {
      if (l.holds(values.at(l.var().id))) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

VarKey VarKey::directed(int from, int to) {
  VarKey k;
  k.role = VarRole::directed;
  k.x = static_cast<std::uint8_t>(from);
  k.y = static_cast<std::uint8_t>(to);
  return k;
}

VarKey VarKey::bidirected(int a, int b) {
  VarKey k;
  k.role = VarRole::bidirected;
  k.x = static_cast<std::uint8_t>(std::min(a, b));
  k.y = static_cast<std::uint8_t>(std::max(a, b));
  return k;
}

VarKey VarKey::relation(const TestSpec& t) {
  const TestSpec n = t.normalized();
  VarKey k;
  k.role = VarRole::relation;
  k.x = static_cast<std::uint8_t>(n.x);
  k.y = static_cast<std::uint8_t>(n.y);
  k.conditioning = n.conditioning;
  k.intervention = n.intervention;
  return k;
}

VarKey VarKey::path(int from, int to, int length, Mark from_mark, Mark to_mark,
                    NodeSet conditioning, NodeSet intervention) {
  VarKey k;
  k.role = VarRole::path;
  k.x = static_cast<std::uint8_t>(from);
  k.y = static_cast<std::uint8_t>(to);
  k.length = static_cast<std::uint16_t>(length);
  k.from_mark = from_mark;
  k.to_mark = to_mark;
  k.conditioning = conditioning;
  k.intervention = intervention;
  return k;
}

std::size_t VarKeyHash::operator()(const VarKey& k) const noexcept {
  std::uint64_t h = static_cast<std::uint64_t>(k.role);
  h = h * 1000003u ^ k.x;
  h = h * 1000003u ^ k.y;
  h = h * 1000003u ^ static_cast<std::uint64_t>(k.from_mark);
  h = h * 1000003u ^ static_cast<std::uint64_t>(k.to_mark);
  h = h * 1000003u ^ k.length;
  h = h * 0x9e3779b97f4a7c15ull ^ k.conditioning.bits();
  h = h * 0x9e3779b97f4a7c15ull ^ k.intervention.bits();
  return static_cast<std::size_t>(h ^ (h >> 29));
}

PropVar VarTable::push(const VarKey& key, std::span<const Lit> definition, bool keyed) {
  keys_.push_back(key);
  def_start_.push_back(defs_.size());
  def_size_.push_back(static_cast<std::uint32_t>(definition.size()));
  defs_.insert(defs_.end(), definition.begin(), definition.end());
  const PropVar v{static_cast<std::uint32_t>(keys_.size())};
  if (keyed) index_.emplace(key, v);
  return v;
}

PropVar VarTable::fresh_var(const VarKey& key) {
  if (key.role == VarRole::conjunction || key.role == VarRole::disjunction) {
    throw std::invalid_argument("auxiliary variables are not keyed");
  }
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  return push(key, {}, true);
}

std::optional<PropVar> VarTable::find(const VarKey& key) const {
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  return std::nullopt;
}

PropVar VarTable::conjunction_var(std::span<const Lit> definition) {
  VarKey k;
  k.role = VarRole::conjunction;
  return push(k, definition, false);
}

PropVar VarTable::disjunction_var(std::span<const Lit> definition) {
  VarKey k;
  k.role = VarRole::disjunction;
  return push(k, definition, false);
}

std::span<const Lit> VarTable::definition(PropVar v) const {
  const std::size_t i = v.id - 1;
  return {defs_.data() + def_start_.at(i), def_size_.at(i)};
}

void VarTable::restore(PropVar v, const VarKey& key, std::span<const Lit> definition) {
  if (v.id != keys_.size() + 1) throw std::runtime_error("variables must be restored in id order");
  const bool keyed = !(key.role == VarRole::conjunction || key.role == VarRole::disjunction);
  if (keyed && index_.contains(key)) throw std::runtime_error("duplicate variable key");
  push(key, definition, keyed);
}

void add_equiv_disjunction(CnfFormula& f, VarTable& table, Lit lhs, std::span<const Term> rhs) {
  std::vector<Lit> disjuncts;
  disjuncts.reserve(rhs.size());
  for (const Term& term : rhs) {
    if (term.empty()) throw std::invalid_argument("empty conjunction term");
    disjuncts.push_back(term.size() == 1 ? term.front() : define_and(f, table, term));
  }
  std::vector<Lit> big;
  big.reserve(disjuncts.size() + 1);
  big.push_back(~lhs);
  for (Lit d : disjuncts) {
    f.add_clause({~d, lhs});
    big.push_back(d);
  }
  f.add_clause(big);
}

Lit define_and(CnfFormula& f, VarTable& table, std::span<const Lit> lits) {
  const Lit out{table.conjunction_var(lits)};
  std::vector<Lit> big;
  big.reserve(lits.size() + 1);
  big.push_back(out);
  for (Lit l : lits) {
    f.add_clause({~out, l});
    big.push_back(~l);
  }
  f.add_clause(big);
  return out;
}

Lit define_or(CnfFormula& f, VarTable& table, std::span<const Lit> lits) {
  const Lit out{table.disjunction_var(lits)};
  std::vector<Lit> big;
  big.reserve(lits.size() + 1);
  big.push_back(~out);
  for (Lit l : lits) {
    f.add_clause({out, ~l});
    big.push_back(l);
  }
  f.add_clause(big);
  return out;
}

void write_dimacs(const CnfFormula& f, std::ostream& out) {
  out << "p cnf " << f.var_count() << ' ' << f.clause_count() << '\n';
  for (std::size_t i = 0; i < f.clause_count(); ++i) {
    for (Lit l : f.clause(i)) out << l.dimacs() << ' ';
    out << "0\n";
  }
  if (!out) throw std::runtime_error("failed writing DIMACS output");
}

CnfFormula read_dimacs(std::istream& in) {
  CnfFormula f;
  std::string line;
  bool header = false;
  std::uint32_t declared_vars = 0;
  std::size_t declared_clauses = 0;
  std::vector<Lit> pending;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == 'c' || line[0] == '%') continue;
    std::istringstream ls(line);
    if (line[0] == 'p') {
      std::string p, fmt;
      ls >> p >> fmt >> declared_vars >> declared_clauses;
      if (!ls || fmt != "cnf") {
        throw std::runtime_error("line " + std::to_string(line_no) + ": malformed problem line");
      }
      header = true;
      continue;
    }
    if (!header) throw std::runtime_error("line " + std::to_string(line_no) + ": clause before header");
    long long code = 0;
    while (ls >> code) {
      if (code == 0) {
        if (pending.empty()) throw std::runtime_error("line " + std::to_string(line_no) + ": empty clause");
        f.add_clause(pending);
        pending.clear();
      } else {
        if (static_cast<unsigned long long>(std::llabs(code)) > declared_vars) {
          throw std::runtime_error("line " + std::to_string(line_no) + ": variable exceeds header");
        }
        pending.push_back(Lit::from_dimacs(static_cast<std::int32_t>(code)));
      }
    }
    if (!ls.eof()) throw std::runtime_error("line " + std::to_string(line_no) + ": bad token");
  }
  if (!pending.empty()) f.add_clause(pending);
  if (!header) throw std::runtime_error("missing DIMACS header");
  if (f.clause_count() != declared_clauses) {
    throw std::runtime_error("clause count does not match header");
  }
  f.ensure_vars(declared_vars);
  return f;
}

}  // namespace causat
