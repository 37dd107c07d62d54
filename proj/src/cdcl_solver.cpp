#include <algorithm>
#include <cmath>
#include <cstring>

#include "causat/sat.hpp"

namespace causat {

namespace {

// Internal literal: 2 * (id - 1) + sign, sign = 1 for a negated literal.
using ILit = std::uint32_t;
using CRef = std::uint32_t;
constexpr ILit kNoLit = ~0u;
constexpr CRef kNoReason = ~0u;

inline ILit to_internal(Lit l) { return 2 * (l.var().id - 1) + (l.negated() ? 1u : 0u); }
inline std::uint32_t var_of(ILit l) { return l >> 1; }
inline ILit negate(ILit l) { return l ^ 1u; }

// Literal values: +1 true, -1 false, 0 unassigned.
constexpr std::int8_t kTrue = 1;
constexpr std::int8_t kFalse = -1;
constexpr std::int8_t kUndef = 0;

double luby(double base, int index) {
  int size = 1;
  int seq = 0;
  while (size < index + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != index) {
    size = (size - 1) >> 1;
    --seq;
    index = index % size;
  }
  return std::pow(base, seq);
}

// Max-heap of variables ordered by activity.
class VarHeap {
 public:
  explicit VarHeap(const std::vector<double>& activity) : activity_(activity) {}

  bool empty() const { return heap_.empty(); }
  bool contains(std::uint32_t v) const { return v < index_.size() && index_[v] >= 0; }

  void grow(std::uint32_t vars) { index_.resize(vars, -1); }

  void insert(std::uint32_t v) {
    if (contains(v)) return;
    index_[v] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    up(index_[v]);
  }

  void increased(std::uint32_t v) {
    if (contains(v)) up(index_[v]);
  }

  std::uint32_t pop() {
    const std::uint32_t top = heap_.front();
    heap_.front() = heap_.back();
    index_[heap_.front()] = 0;
    index_[top] = -1;
    heap_.pop_back();
    if (heap_.size() > 1) down(0);
    return top;
  }

 private:
  bool before(std::uint32_t a, std::uint32_t b) const { return activity_[a] > activity_[b]; }

  void up(int i) {
    const std::uint32_t v = heap_[i];
    while (i > 0) {
      const int parent = (i - 1) >> 1;
      if (!before(v, heap_[parent])) break;
      heap_[i] = heap_[parent];
      index_[heap_[i]] = i;
      i = parent;
    }
    heap_[i] = v;
    index_[v] = i;
  }

  void down(int i) {
    const std::uint32_t v = heap_[i];
    const int n = static_cast<int>(heap_.size());
    while (true) {
      int child = 2 * i + 1;
      if (child >= n) break;
      if (child + 1 < n && before(heap_[child + 1], heap_[child])) ++child;
      if (!before(heap_[child], v)) break;
      heap_[i] = heap_[child];
      index_[heap_[i]] = i;
      i = child;
    }
    heap_[i] = v;
    index_[v] = i;
  }

  const std::vector<double>& activity_;
  std::vector<std::uint32_t> heap_;
  std::vector<int> index_;
};

struct Watcher {
  CRef cref;
  ILit blocker;
};

enum class SearchResult { sat, unsat, restart, interrupted };

}  // namespace

struct CdclSolver::Impl {
  // Clause arena: [header][activity][lits...]. Header bits: size | learnt << 30 | deleted << 31.
  std::vector<std::uint32_t> arena;
  std::size_t wasted = 0;
  std::vector<CRef> clauses;
  std::vector<CRef> learnts;

  std::uint32_t nvars = 0;
  std::vector<std::int8_t> value;  // per literal
  std::vector<int> level;
  std::vector<CRef> reason;
  std::vector<double> activity;
  std::vector<std::uint8_t> polarity;  // saved sign
  std::vector<std::uint8_t> seen;
  std::vector<std::vector<Watcher>> watches;  // per literal
  VarHeap order{activity};

  std::vector<ILit> trail;
  std::vector<std::size_t> trail_lim;
  std::size_t qhead = 0;
  std::vector<ILit> assumptions;

  bool ok = true;
  double var_inc = 1.0;
  double cla_inc = 1.0;
  static constexpr double kVarDecay = 0.95;
  static constexpr double kClaDecay = 0.999;
  double max_learnts = 0;
  std::size_t simplified_trail = 0;

  std::vector<ILit> analyze_stack;
  std::vector<ILit> analyze_clear;
  std::vector<ILit> learnt_buf;

  SolverStats stats;
  std::optional<std::chrono::steady_clock::time_point> deadline;

  // --- clause access
  std::uint32_t csize(CRef c) const { return arena[c] & 0x3fffffffu; }
  bool clearnt(CRef c) const { return (arena[c] >> 30) & 1u; }
  bool cdeleted(CRef c) const { return (arena[c] >> 31) & 1u; }
  ILit* clits(CRef c) { return arena.data() + c + 2; }
  float& cactivity(CRef c) { return *reinterpret_cast<float*>(&arena[c + 1]); }

  CRef alloc(const std::vector<ILit>& lits, bool learnt) {
    const CRef c = static_cast<CRef>(arena.size());
    arena.push_back(static_cast<std::uint32_t>(lits.size()) | (learnt ? (1u << 30) : 0u));
    float zero = 0.0f;
    std::uint32_t bits;
    std::memcpy(&bits, &zero, sizeof bits);
    arena.push_back(bits);
    arena.insert(arena.end(), lits.begin(), lits.end());
    return c;
  }

  int decision_level() const { return static_cast<int>(trail_lim.size()); }
  std::int8_t val(ILit l) const { return value[l]; }

  void grow(std::uint32_t vars) {
    if (vars <= nvars) return;
    value.resize(2 * vars, kUndef);
    level.resize(vars, 0);
    reason.resize(vars, kNoReason);
    activity.resize(vars, 0.0);
    polarity.resize(vars, 1);
    seen.resize(vars, 0);
    watches.resize(2 * vars);
    order.grow(vars);
    for (std::uint32_t v = nvars; v < vars; ++v) order.insert(v);
    nvars = vars;
  }

  void attach(CRef c) {
    ILit* lits = clits(c);
    watches[negate(lits[0])].push_back({c, lits[1]});
    watches[negate(lits[1])].push_back({c, lits[0]});
  }

  void remove(CRef c) {
    arena[c] |= 1u << 31;
    wasted += csize(c) + 2;
  }

  bool locked(CRef c) {
    const ILit first = clits(c)[0];
    return val(first) == kTrue && reason[var_of(first)] == c;
  }

  void enqueue(ILit l, CRef from) {
    const std::uint32_t v = var_of(l);
    value[l] = kTrue;
    value[negate(l)] = kFalse;
    level[v] = decision_level();
    reason[v] = from;
    trail.push_back(l);
  }

  CRef propagate() {
    CRef conflict = kNoReason;
    while (qhead < trail.size()) {
      const ILit p = trail[qhead++];
      const ILit false_lit = negate(p);
      std::vector<Watcher>& ws = watches[p];
      std::size_t i = 0, j = 0;
      const std::size_t end = ws.size();
      ++stats.propagations;
      while (i < end) {
        const Watcher w = ws[i];
        if (val(w.blocker) == kTrue) {
          ws[j++] = ws[i++];
          continue;
        }
        const CRef c = w.cref;
        if (cdeleted(c)) {
          ++i;
          continue;
        }
        ILit* lits = clits(c);
        if (lits[0] == false_lit) std::swap(lits[0], lits[1]);
        ++i;
        const ILit first = lits[0];
        const Watcher keep{c, first};
        if (first != w.blocker && val(first) == kTrue) {
          ws[j++] = keep;
          continue;
        }
        const std::uint32_t size = csize(c);
        bool moved = false;
        for (std::uint32_t k = 2; k < size; ++k) {
          if (val(lits[k]) != kFalse) {
            lits[1] = lits[k];
            lits[k] = false_lit;
            watches[negate(lits[1])].push_back(keep);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = keep;
        if (val(first) == kFalse) {
          conflict = c;
          qhead = trail.size();
          while (i < end) ws[j++] = ws[i++];
        } else {
          enqueue(first, c);
        }
      }
      ws.resize(j);
      if (conflict != kNoReason) break;
    }
    return conflict;
  }

  void bump_var(std::uint32_t v) {
    if ((activity[v] += var_inc) > 1e100) {
      for (auto& a : activity) a *= 1e-100;
      var_inc *= 1e-100;
    }
    order.increased(v);
  }

  void bump_clause(CRef c) {
    if ((cactivity(c) += static_cast<float>(cla_inc)) > 1e20f) {
      for (CRef l : learnts) cactivity(l) *= 1e-20f;
      cla_inc *= 1e-20;
    }
  }

  std::uint32_t abstract_level(std::uint32_t v) const { return 1u << (level[v] & 31); }

  bool lit_redundant(ILit p, std::uint32_t levels) {
    analyze_stack.clear();
    analyze_stack.push_back(p);
    const std::size_t top = analyze_clear.size();
    while (!analyze_stack.empty()) {
      const CRef c = reason[var_of(analyze_stack.back())];
      analyze_stack.pop_back();
      ILit* lits = clits(c);
      const std::uint32_t size = csize(c);
      for (std::uint32_t i = 1; i < size; ++i) {
        const ILit q = lits[i];
        const std::uint32_t v = var_of(q);
        if (seen[v] || level[v] == 0) continue;
        if (reason[v] != kNoReason && (abstract_level(v) & levels) != 0) {
          seen[v] = 1;
          analyze_stack.push_back(q);
          analyze_clear.push_back(q);
        } else {
          for (std::size_t k = top; k < analyze_clear.size(); ++k) seen[var_of(analyze_clear[k])] = 0;
          analyze_clear.resize(top);
          return false;
        }
      }
    }
    return true;
  }

  int analyze(CRef conflict, std::vector<ILit>& out) {
    int path_count = 0;
    ILit p = kNoLit;
    out.clear();
    out.push_back(kNoLit);
    std::size_t index = trail.size();
    do {
      if (clearnt(conflict)) bump_clause(conflict);
      ILit* lits = clits(conflict);
      const std::uint32_t size = csize(conflict);
      for (std::uint32_t j = (p == kNoLit ? 0 : 1); j < size; ++j) {
        const ILit q = lits[j];
        const std::uint32_t v = var_of(q);
        if (seen[v] || level[v] == 0) continue;
        bump_var(v);
        seen[v] = 1;
        if (level[v] >= decision_level()) {
          ++path_count;
        } else {
          out.push_back(q);
        }
      }
      do {
        --index;
      } while (!seen[var_of(trail[index])]);
      p = trail[index];
      conflict = reason[var_of(p)];
      seen[var_of(p)] = 0;
      --path_count;
    } while (path_count > 0);
    out[0] = negate(p);

    analyze_clear.assign(out.begin(), out.end());
    std::uint32_t levels = 0;
    for (std::size_t i = 1; i < out.size(); ++i) levels |= abstract_level(var_of(out[i]));
    std::size_t kept = 1;
    for (std::size_t i = 1; i < out.size(); ++i) {
      const std::uint32_t v = var_of(out[i]);
      if (reason[v] == kNoReason || !lit_redundant(out[i], levels)) out[kept++] = out[i];
    }
    out.resize(kept);

    int backtrack = 0;
    if (out.size() > 1) {
      std::size_t max_i = 1;
      for (std::size_t i = 2; i < out.size(); ++i) {
        if (level[var_of(out[i])] > level[var_of(out[max_i])]) max_i = i;
      }
      std::swap(out[1], out[max_i]);
      backtrack = level[var_of(out[1])];
    }
    for (ILit l : analyze_clear) seen[var_of(l)] = 0;
    return backtrack;
  }

  void cancel_until(int target) {
    if (decision_level() <= target) return;
    for (std::size_t c = trail.size(); c-- > trail_lim[target];) {
      const ILit l = trail[c];
      const std::uint32_t v = var_of(l);
      value[l] = kUndef;
      value[negate(l)] = kUndef;
      polarity[v] = l & 1u;
      order.insert(v);
    }
    qhead = trail_lim[target];
    trail.resize(trail_lim[target]);
    trail_lim.resize(target);
  }

  ILit pick_branch() {
    while (!order.empty()) {
      const std::uint32_t v = order.pop();
      if (val(2 * v) == kUndef) return 2 * v + polarity[v];
    }
    return kNoLit;
  }

  void reduce_db() {
    const double extra = cla_inc / std::max<std::size_t>(learnts.size(), 1);
    std::sort(learnts.begin(), learnts.end(), [&](CRef a, CRef b) {
      return csize(a) > 2 && (csize(b) == 2 || cactivity(a) < cactivity(b));
    });
    std::size_t j = 0;
    for (std::size_t i = 0; i < learnts.size(); ++i) {
      const CRef c = learnts[i];
      const bool drop = csize(c) > 2 && !locked(c) &&
                        (i < learnts.size() / 2 || cactivity(c) < extra);
      if (drop) {
        remove(c);
      } else {
        learnts[j++] = c;
      }
    }
    learnts.resize(j);
  }

  bool satisfied(CRef c) {
    ILit* lits = clits(c);
    for (std::uint32_t i = 0; i < csize(c); ++i) {
      if (val(lits[i]) == kTrue) return true;
    }
    return false;
  }

  // At level 0 only.
  void simplify() {
    if (trail.size() != simplified_trail) {
      for (auto* list : {&clauses, &learnts}) {
        std::size_t j = 0;
        for (CRef c : *list) {
          if (satisfied(c)) {
            remove(c);
          } else {
            (*list)[j++] = c;
          }
        }
        list->resize(j);
      }
      simplified_trail = trail.size();
    }
    if (wasted > arena.size() / 4) collect_garbage();
  }

  // At level 0 only: compacts the arena and rebuilds every watch list.
  void collect_garbage() {
    std::vector<std::uint32_t> fresh;
    fresh.reserve(arena.size() - wasted);
    for (auto* list : {&clauses, &learnts}) {
      for (CRef& c : *list) {
        const CRef moved = static_cast<CRef>(fresh.size());
        fresh.insert(fresh.end(), arena.begin() + c, arena.begin() + c + 2 + csize(c));
        c = moved;
      }
    }
    arena.swap(fresh);
    wasted = 0;
    for (ILit l : trail) reason[var_of(l)] = kNoReason;
    for (auto& ws : watches) ws.clear();
    for (CRef c : clauses) attach(c);
    for (CRef c : learnts) attach(c);
  }

  bool out_of_time() const {
    return deadline && std::chrono::steady_clock::now() > *deadline;
  }

  SearchResult search(int conflict_budget) {
    int conflicts = 0;
    while (true) {
      const CRef conflict = propagate();
      if (conflict != kNoReason) {
        ++stats.conflicts;
        ++conflicts;
        if (decision_level() == 0) {
          ok = false;
          return SearchResult::unsat;
        }
        const int backtrack = analyze(conflict, learnt_buf);
        cancel_until(backtrack);
        if (learnt_buf.size() == 1) {
          enqueue(learnt_buf[0], kNoReason);
        } else {
          const CRef c = alloc(learnt_buf, true);
          learnts.push_back(c);
          attach(c);
          bump_clause(c);
          enqueue(learnt_buf[0], c);
        }
        var_inc /= kVarDecay;
        cla_inc /= kClaDecay;
        if ((stats.conflicts & 255u) == 0 && out_of_time()) {
          cancel_until(0);
          return SearchResult::interrupted;
        }
        continue;
      }

      if (conflicts >= conflict_budget) {
        cancel_until(0);
        return SearchResult::restart;
      }
      if (static_cast<double>(learnts.size()) - static_cast<double>(trail.size()) >= max_learnts) {
        reduce_db();
      }

      ILit next = kNoLit;
      while (decision_level() < static_cast<int>(assumptions.size())) {
        const ILit a = assumptions[decision_level()];
        if (val(a) == kTrue) {
          trail_lim.push_back(trail.size());
        } else if (val(a) == kFalse) {
          return SearchResult::unsat;
        } else {
          next = a;
          break;
        }
      }
      if (next == kNoLit) {
        ++stats.decisions;
        next = pick_branch();
        if (next == kNoLit) return SearchResult::sat;
      }
      trail_lim.push_back(trail.size());
      enqueue(next, kNoReason);
    }
  }

  void add_clause(std::span<const Lit> input) {
    if (!ok) return;
    cancel_until(0);
    std::uint32_t max_var = 0;
    for (Lit l : input) max_var = std::max(max_var, l.var().id);
    grow(max_var);
    std::vector<ILit> lits;
    lits.reserve(input.size());
    for (Lit l : input) lits.push_back(to_internal(l));
    std::sort(lits.begin(), lits.end());
    std::size_t j = 0;
    ILit prev = kNoLit;
    for (ILit l : lits) {
      if (val(l) == kTrue || l == negate(prev)) return;  // satisfied or tautology
      if (val(l) != kFalse && l != prev) lits[j++] = prev = l;
    }
    lits.resize(j);
    if (lits.empty()) {
      ok = false;
    } else if (lits.size() == 1) {
      enqueue(lits[0], kNoReason);
      if (propagate() != kNoReason) ok = false;
    } else {
      const CRef c = alloc(lits, false);
      clauses.push_back(c);
      attach(c);
    }
  }

  SolveOutcome solve(std::span<const Lit> assume) {
    ++stats.solves;
    SolveOutcome outcome;
    if (!ok) return outcome;
    cancel_until(0);
    for (Lit l : assume) grow(l.var().id);
    if (propagate() != kNoReason) {
      ok = false;
      return outcome;
    }
    simplify();
    assumptions.clear();
    for (Lit l : assume) assumptions.push_back(to_internal(l));
    max_learnts = std::max(max_learnts, std::max(static_cast<double>(clauses.size()) / 3.0, 5000.0));

    SearchResult result = SearchResult::restart;
    for (int restarts = 0; result == SearchResult::restart; ++restarts) {
      result = search(static_cast<int>(luby(2.0, restarts) * 100));
      if (result == SearchResult::restart) {
        ++stats.restarts;
        max_learnts *= 1.02;
        simplify();
      }
    }
    if (result == SearchResult::sat) {
      outcome.status = SolveStatus::satisfiable;
      outcome.model.assign(nvars + 1, false);
      for (std::uint32_t v = 0; v < nvars; ++v) outcome.model[v + 1] = val(2 * v) == kTrue;
    } else if (result == SearchResult::interrupted) {
      outcome.status = SolveStatus::interrupted;
    }
    cancel_until(0);
    return outcome;
  }
};

CdclSolver::CdclSolver() : impl_(std::make_unique<Impl>()) {}
CdclSolver::~CdclSolver() = default;

void CdclSolver::add_clause(std::span<const Lit> clause) {
  if (clause.empty()) {
    impl_->ok = false;
    return;
  }
  impl_->add_clause(clause);
}

SolveOutcome CdclSolver::solve_under(std::span<const Lit> assumptions) {
  SolveOutcome out = impl_->solve(assumptions);
  if (out.satisfiable() && out.model.size() < var_count() + 1u) out.model.resize(var_count() + 1, false);
  return out;
}

std::uint32_t CdclSolver::var_count() const { return impl_->nvars; }
SolverStats CdclSolver::stats() const { return impl_->stats; }

void CdclSolver::set_deadline(std::optional<std::chrono::steady_clock::time_point> deadline) {
  impl_->deadline = deadline;
}

std::optional<bool> CdclSolver::fixed_value(PropVar v) const {
  if (v.id == 0 || v.id > impl_->nvars) return std::nullopt;
  const ILit l = 2 * (v.id - 1);
  if (impl_->val(l) == kUndef || impl_->level[v.id - 1] != 0) return std::nullopt;
  return impl_->val(l) == kTrue;
}

}  // namespace causat
