#include "causat/encoder.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>
#include <string>

namespace causat {

namespace {

constexpr Mark kMarks[2] = {Mark::tail, Mark::head};

int mark_index(Mark m) { return static_cast<int>(m); }

}  // namespace

Encoder::Encoder(int node_count) : node_count_(node_count) {
  if (node_count < 1 || node_count > kMaxNodes) throw std::invalid_argument("node count out of range");
  for (int x = 0; x < node_count; ++x) {
    for (int y = 0; y < node_count; ++y) {
      if (x != y) table_.fresh_var(VarKey::directed(x, y));
    }
  }
  for (int x = 0; x < node_count; ++x) {
    for (int y = x + 1; y < node_count; ++y) table_.fresh_var(VarKey::bidirected(x, y));
  }
  formula_.ensure_vars(table_.size());
}

void Encoder::check_node(int v) const {
  if (v < 0 || v >= node_count_) throw std::invalid_argument("node index out of range");
}

Lit Encoder::directed(int from, int to) const {
  check_node(from);
  check_node(to);
  if (from == to) throw std::invalid_argument("no self-loop variables");
  // Directed variables are allocated first, from-major, skipping the diagonal.
  const int id = from * (node_count_ - 1) + (to < from ? to : to - 1) + 1;
  return Lit{PropVar{static_cast<std::uint32_t>(id)}};
}

Lit Encoder::bidirected(int a, int b) const {
  check_node(a);
  check_node(b);
  if (a == b) throw std::invalid_argument("no self-loop variables");
  return Lit{*table_.find(VarKey::bidirected(a, b))};
}

std::vector<PropVar> Encoder::edge_vars() const {
  std::vector<PropVar> out;
  const int n = node_count_;
  for (std::uint32_t id = 1; id <= static_cast<std::uint32_t>(n * (n - 1) + n * (n - 1) / 2); ++id) {
    out.push_back(PropVar{id});
  }
  return out;
}

Encoder::Context& Encoder::context(NodeSet conditioning, NodeSet intervention) {
  const auto key = std::pair(conditioning.bits(), intervention.bits());
  auto it = contexts_.find(key);
  if (it == contexts_.end()) {
    Context ctx;
    ctx.conditioning = conditioning;
    ctx.intervention = intervention;
    ctx.encoded.assign(node_count_, 1);
    ctx.codes.resize(node_count_);
    it = contexts_.emplace(key, std::move(ctx)).first;
  }
  return it->second;
}

std::size_t Encoder::slot(int length, int from, Mark from_mark, Mark to_mark) const {
  return ((static_cast<std::size_t>(length - 2) * node_count_ + from) * 2 + mark_index(from_mark)) * 2 +
         mark_index(to_mark);
}

std::int32_t Encoder::code(const Context& ctx, int from, int to, int length, Mark from_mark,
                           Mark to_mark) const {
  const NodeSet j = ctx.intervention;
  if (length == 1) {
    if (from_mark == Mark::tail && to_mark == Mark::head) {
      return j.contains(to) ? 0 : directed(from, to).dimacs();
    }
    if (from_mark == Mark::head && to_mark == Mark::tail) {
      return j.contains(from) ? 0 : directed(to, from).dimacs();
    }
    if (from_mark == Mark::head && to_mark == Mark::head) {
      return j.contains(from) || j.contains(to) ? 0 : bidirected(from, to).dimacs();
    }
    return 0;  // a single edge cannot have tails at both ends
  }
  return ctx.codes[to][slot(length, from, from_mark, to_mark)];
}

void Encoder::extend(Context& ctx, int target, int length) {
  const int n = node_count_;
  const NodeSet cond = ctx.conditioning;
  const NodeSet interv = ctx.intervention;
  auto& codes = ctx.codes[target];
  std::vector<Term> terms;
  for (int l = ctx.encoded[target] + 1; l <= length; ++l) {
    codes.resize(static_cast<std::size_t>(l - 1) * n * 4, 0);
    for (int from = 0; from < n; ++from) {
      if (from == target) continue;
      for (Mark fm : kMarks) {
        for (Mark tm : kMarks) {
          terms.clear();
          auto add = [&](std::int32_t first, std::int32_t rest) {
            if (first != 0 && rest != 0) terms.push_back({Lit::from_dimacs(first), Lit::from_dimacs(rest)});
          };
          for (int z = 0; z < n; ++z) {
            if (z == from || z == target) continue;
            const bool in_c = cond.contains(z);
            if (fm == Mark::tail) {
              // from -> z: arrowhead at z
              const std::int32_t first = code(ctx, from, z, 1, Mark::tail, Mark::head);
              if (first == 0) continue;
              add(first, code(ctx, z, target, l - 1, in_c ? Mark::head : Mark::tail, tm));
            } else {
              // z -> from: tail at z, so z is a non-collider
              if (!in_c) {
                const std::int32_t first = code(ctx, from, z, 1, Mark::head, Mark::tail);
                if (first != 0) {
                  add(first, code(ctx, z, target, l - 1, Mark::tail, tm));
                  add(first, code(ctx, z, target, l - 1, Mark::head, tm));
                }
              }
              // from <-> z: arrowhead at z
              const std::int32_t first = code(ctx, from, z, 1, Mark::head, Mark::head);
              if (first != 0) add(first, code(ctx, z, target, l - 1, in_c ? Mark::head : Mark::tail, tm));
            }
          }
          std::int32_t result = 0;
          if (!terms.empty()) {
            const PropVar v = table_.fresh_var(VarKey::path(from, target, l, fm, tm, cond, interv));
            add_equiv_disjunction(formula_, table_, Lit{v}, terms);
            result = static_cast<std::int32_t>(v.id);
          }
          codes[slot(l, from, fm, tm)] = result;
        }
      }
    }
    ctx.encoded[target] = l;
  }
  formula_.ensure_vars(table_.size());
}

void Encoder::encode_context(NodeSet conditioning, NodeSet intervention, int max_length) {
  if (max_length < 1) throw std::invalid_argument("path length bound must be positive");
  Context& ctx = context(conditioning, intervention);
  for (int t = 0; t < node_count_; ++t) {
    if (ctx.encoded[t] < max_length) extend(ctx, t, max_length);
  }
}

std::optional<Lit> Encoder::path(NodeSet conditioning, NodeSet intervention, int from, int to, int length,
                                 Mark from_mark, Mark to_mark) {
  check_node(from);
  check_node(to);
  if (from == to || length < 1) throw std::invalid_argument("bad walk query");
  Context& ctx = context(conditioning, intervention);
  if (ctx.encoded[to] < length) extend(ctx, to, length);
  const std::int32_t c = code(ctx, from, to, length, from_mark, to_mark);
  if (c == 0) return std::nullopt;
  return Lit::from_dimacs(c);
}

Lit Encoder::relation(const TestSpec& spec) {
  const TestSpec t = spec.normalized();
  check_node(t.x);
  check_node(t.y);
  if (t.x == t.y) throw std::invalid_argument("relation needs two distinct nodes");
  if (t.conditioning.contains(t.x) || t.conditioning.contains(t.y)) {
    throw std::invalid_argument("conditioning set contains an endpoint");
  }
  if (!(t.conditioning | t.intervention).subset_of(NodeSet::all(node_count_))) {
    throw std::invalid_argument("relation references unknown nodes");
  }
  const VarKey key = VarKey::relation(t);
  if (auto existing = table_.find(key)) return Lit{*existing};

  const int max_length = max_path_length(node_count_, t);
  Context& ctx = context(t.conditioning, t.intervention);
  if (ctx.encoded[t.y] < max_length) extend(ctx, t.y, max_length);
  std::vector<Term> terms;
  for (int l = 1; l <= max_length; ++l) {
    for (Mark fm : kMarks) {
      for (Mark tm : kMarks) {
        const std::int32_t c = code(ctx, t.x, t.y, l, fm, tm);
        if (c != 0) terms.push_back({Lit::from_dimacs(c)});
      }
    }
  }
  const Lit v{table_.fresh_var(key)};
  add_equiv_disjunction(formula_, table_, v, terms);
  formula_.ensure_vars(table_.size());
  return v;
}

void Encoder::encode_relation(const Relation& r) {
  const Lit v = relation(r.spec);
  formula_.add_clause({r.connected ? v : ~v});
}

Lit Encoder::ancestral(int from, int to) {
  return relation(TestSpec{from, to, NodeSet(), NodeSet{from}});
}

void Encoder::constrain_sufficiency() {
  for (int x = 0; x < node_count_; ++x) {
    for (int y = x + 1; y < node_count_; ++y) formula_.add_clause({~bidirected(x, y)});
  }
}

void Encoder::constrain_acyclicity() {
  for (int x = 0; x < node_count_; ++x) {
    for (int y = x + 1; y < node_count_; ++y) {
      formula_.add_clause({~ancestral(x, y), ~ancestral(y, x)});
    }
  }
}

void Encoder::add_background(const BackgroundConstraint& k) {
  using Kind = BackgroundConstraint::Kind;
  check_node(k.x);
  check_node(k.y);
  const bool is_path = k.kind == Kind::path_present || k.kind == Kind::path_absent;
  if (!is_path && (!k.waypoints.empty() || k.max_length)) {
    throw std::invalid_argument("waypoints and lengths apply to path constraints only");
  }
  switch (k.kind) {
    case Kind::edge_present:
    case Kind::edge_absent: {
      const Lit e = k.bidirected ? bidirected(k.x, k.y) : directed(k.x, k.y);
      formula_.add_clause({k.kind == Kind::edge_present ? e : ~e});
      return;
    }
    case Kind::ancestral_present:
    case Kind::ancestral_absent: {
      if (k.x == k.y) throw std::invalid_argument("ancestral constraint needs two distinct nodes");
      const Lit a = ancestral(k.x, k.y);
      formula_.add_clause({k.kind == Kind::ancestral_present ? a : ~a});
      return;
    }
    case Kind::path_present:
    case Kind::path_absent:
      break;
  }

  std::vector<int> stops{k.x};
  stops.insert(stops.end(), k.waypoints.begin(), k.waypoints.end());
  stops.push_back(k.y);
  const Lit exists = directed_walk(stops, k.max_length);
  formula_.add_clause({k.kind == Kind::path_present ? exists : ~exists});
}

Lit Encoder::directed_walk(std::span<const int> stops, std::optional<int> max_length) {
  // In the context (C = {}, J = {}) a walk leaving its source by a tail and
  // entering its target by an arrowhead has no collider, hence is directed.
  if (stops.size() < 2) throw std::invalid_argument("a walk needs a source and a target");
  for (int v : stops) check_node(v);
  for (std::size_t i = 0; i + 1 < stops.size(); ++i) {
    if (stops[i] == stops[i + 1]) throw std::invalid_argument("consecutive path stops must differ");
  }
  const int segments = static_cast<int>(stops.size()) - 1;
  const int bound = max_length.value_or(segments * (node_count_ - 1));
  if (segments - 1 > bound - 1) {
    throw std::invalid_argument("more waypoints than the length bound allows");
  }
  // reach[s]: the walk so far has reached the current stop with length s.
  std::vector<std::optional<Lit>> reach(bound + 1);
  for (int s = 1; s <= bound; ++s) {
    reach[s] = path(NodeSet(), NodeSet(), stops[0], stops[1], s, Mark::tail, Mark::head);
  }
  for (int seg = 1; seg < segments; ++seg) {
    std::vector<std::optional<Lit>> next(bound + 1);
    for (int s = 2; s <= bound; ++s) {
      std::vector<Lit> options;
      for (int prefix = 1; prefix < s; ++prefix) {
        if (!reach[prefix]) continue;
        auto step = path(NodeSet(), NodeSet(), stops[seg], stops[seg + 1], s - prefix, Mark::tail, Mark::head);
        if (!step) continue;
        const Lit both[2] = {*reach[prefix], *step};
        options.push_back(define_and(formula_, table_, both));
      }
      if (!options.empty()) next[s] = define_or(formula_, table_, options);
    }
    reach = std::move(next);
  }
  std::vector<Lit> any;
  for (int s = 1; s <= bound; ++s) {
    if (reach[s]) any.push_back(*reach[s]);
  }
  const Lit exists = define_or(formula_, table_, any);
  formula_.ensure_vars(table_.size());
  return exists;
}

std::vector<Encoder::ContextRecord> Encoder::context_records() const {
  std::vector<ContextRecord> out;
  for (const auto& [key, ctx] : contexts_) {
    for (int t = 0; t < node_count_; ++t) {
      if (ctx.encoded[t] > 1) out.push_back({ctx.conditioning, ctx.intervention, t, ctx.encoded[t]});
    }
  }
  return out;
}

Encoder Encoder::restore(int node_count, VarTable table, CnfFormula formula,
                         std::span<const ContextRecord> records) {
  Encoder enc(node_count);
  const std::uint32_t edges = enc.table_.size();
  if (table.size() < edges) throw std::runtime_error("saved table lacks edge variables");
  for (std::uint32_t id = 1; id <= edges; ++id) {
    if (!(table.key(PropVar{id}) == enc.table_.key(PropVar{id}))) {
      throw std::runtime_error("saved table has a different edge numbering");
    }
  }
  enc.table_ = std::move(table);
  enc.formula_ = std::move(formula);
  enc.formula_.ensure_vars(enc.table_.size());
  for (const auto& r : records) {
    if (r.target < 0 || r.target >= node_count || r.length < 1) throw std::runtime_error("bad context record");
    Context& ctx = enc.context(r.conditioning, r.intervention);
    auto& codes = ctx.codes[r.target];
    codes.assign(static_cast<std::size_t>(std::max(r.length - 1, 0)) * node_count * 4, 0);
    for (int l = 2; l <= r.length; ++l) {
      for (int from = 0; from < node_count; ++from) {
        if (from == r.target) continue;
        for (Mark fm : kMarks) {
          for (Mark tm : kMarks) {
            const auto v = enc.table_.find(
                VarKey::path(from, r.target, l, fm, tm, r.conditioning, r.intervention));
            if (v) codes[enc.slot(l, from, fm, tm)] = static_cast<std::int32_t>(v->id);
          }
        }
      }
    }
    ctx.encoded[r.target] = r.length;
  }
  return enc;
}

namespace {

// Bit (1 << to_mark) of entry l-1 is set iff a qualifying walk of exactly l
// edges reaches `to` with that mark. Forward expansion from `from`.
std::vector<std::uint8_t> walk_profile(const MixedGraph& gm, NodeSet cond, int from, int to, Mark from_mark,
                                       int max_length) {
  std::vector<std::uint8_t> out(max_length, 0);
  NodeSet at_tail, at_head;  // current frontier: arrived with a tail / an arrowhead
  if (from_mark == Mark::tail) {
    at_head = gm.children(from);
  } else {
    at_tail = gm.parents(from);
    at_head = gm.spouses(from);
  }
  for (int l = 1; l <= max_length; ++l) {
    if (at_tail.contains(to)) out[l - 1] |= 1u << mark_index(Mark::tail);
    if (at_head.contains(to)) out[l - 1] |= 1u << mark_index(Mark::head);
    NodeSet next_tail, next_head;
    for (int v : at_tail.without(to)) {
      if (cond.contains(v)) continue;
      next_tail = next_tail | gm.parents(v);
      next_head = next_head | gm.children(v) | gm.spouses(v);
    }
    for (int v : at_head.without(to)) {
      if (cond.contains(v)) {
        next_tail = next_tail | gm.parents(v);
        next_head = next_head | gm.spouses(v);
      } else {
        next_head = next_head | gm.children(v);
      }
    }
    at_tail = next_tail;
    at_head = next_head;
  }
  return out;
}

}  // namespace

std::vector<bool> Encoder::assignment_of(const MixedGraph& g) const {
  if (g.size() != node_count_) throw std::invalid_argument("graph has a different node count");
  std::vector<bool> values(table_.size() + 1, false);
  std::map<std::tuple<std::uint32_t, std::uint32_t, int, int, int>, std::vector<std::uint8_t>> profiles;
  std::map<std::uint32_t, MixedGraph> manipulated;
  int longest = 1;
  for (std::uint32_t id = 1; id <= table_.size(); ++id) {
    const VarKey& k = table_.key(PropVar{id});
    if (k.role == VarRole::path) longest = std::max<int>(longest, k.length);
  }

  for (std::uint32_t id = 1; id <= table_.size(); ++id) {
    const VarKey& k = table_.key(PropVar{id});
    switch (k.role) {
      case VarRole::directed:
        values[id] = g.has_directed(k.x, k.y);
        break;
      case VarRole::bidirected:
        values[id] = g.has_bidirected(k.x, k.y);
        break;
      case VarRole::relation:
        values[id] = d_connected(g, TestSpec{k.x, k.y, k.conditioning, k.intervention});
        break;
      case VarRole::path: {
        auto git = manipulated.find(k.intervention.bits());
        if (git == manipulated.end()) {
          git = manipulated.emplace(k.intervention.bits(), manipulate(g, k.intervention)).first;
        }
        const auto pkey = std::tuple(k.conditioning.bits(), k.intervention.bits(), int{k.x}, int{k.y},
                                     mark_index(k.from_mark));
        auto pit = profiles.find(pkey);
        if (pit == profiles.end()) {
          pit = profiles
                    .emplace(pkey, walk_profile(git->second, k.conditioning, k.x, k.y, k.from_mark, longest))
                    .first;
        }
        const auto& prof = pit->second;
        values[id] = k.length <= prof.size() && ((prof[k.length - 1] >> mark_index(k.to_mark)) & 1u);
        break;
      }
      case VarRole::conjunction:
      case VarRole::disjunction:
        break;
    }
  }
  for (std::uint32_t id = 1; id <= table_.size(); ++id) {
    const VarKey& k = table_.key(PropVar{id});
    if (k.role != VarRole::conjunction && k.role != VarRole::disjunction) continue;
    const bool is_and = k.role == VarRole::conjunction;
    bool v = is_and;
    for (Lit l : table_.definition(PropVar{id})) {
      const bool lv = l.holds(values[l.var().id]);
      if (is_and && !lv) v = false;
      if (!is_and && lv) v = true;
    }
    values[id] = v;
  }
  return values;
}

}  // namespace causat
