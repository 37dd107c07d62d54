#include <sstream>

#include "causat/cnf.hpp"
#include "doctest.h"

using namespace causat;

namespace {

// Values of every variable in `table` once the first `inputs` are set from
// `bits`: auxiliary variables take the value of their definition.
std::vector<bool> extend(const VarTable& table, std::uint32_t inputs, std::uint32_t bits) {
  std::vector<bool> v(table.size() + 1, false);
  for (std::uint32_t i = 1; i <= inputs; ++i) v[i] = (bits >> (i - 1)) & 1u;
  for (std::uint32_t id = inputs + 1; id <= table.size(); ++id) {
    const PropVar p{id};
    const auto def = table.definition(p);
    const bool is_and = table.key(p).role == VarRole::conjunction;
    bool acc = is_and;
    for (Lit l : def) {
      const bool lv = l.holds(v[l.var().id]);
      acc = is_and ? (acc && lv) : (acc || lv);
    }
    v[id] = acc;
  }
  return v;
}

bool eval_dnf(std::span<const Term> terms, const std::vector<bool>& v) {
  for (const Term& t : terms) {
    bool all = true;
    for (Lit l : t) all = all && l.holds(v[l.var().id]);
    if (all) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("fresh_var returns one id per key") {
  VarTable t;
  const VarKey k = VarKey::directed(0, 1);
  const PropVar a = t.fresh_var(k);
  CHECK(t.fresh_var(k) == a);
  CHECK(t.fresh_var(VarKey::directed(1, 0)) != a);
  CHECK(t.fresh_var(VarKey::bidirected(0, 1)) != a);
  CHECK(a.id == 1);
  CHECK(t.find(k) == a);
  CHECK_FALSE(t.find(VarKey::directed(2, 0)));

  VarTable big;
  int made = 0;
  for (int x = 0; x < 10; ++x) {
    for (int y = 0; y < 10; ++y) {
      for (int len = 1; len <= 100; ++len) {
        if (x == y) continue;
        big.fresh_var(VarKey::path(x, y, len, Mark::tail, Mark::head, {}, {}));
        ++made;
      }
    }
  }
  for (int i = 0; i < 1000; ++i) big.fresh_var(VarKey::relation({0, 1, NodeSet(static_cast<std::uint32_t>(i)), {}}));
  made += 1000;
  CHECK(made == 10000);
  CHECK(big.size() == 10000);
  for (int x = 0; x < 10; ++x) big.fresh_var(VarKey::path(x, (x + 1) % 10, 7, Mark::tail, Mark::head, {}, {}));
  CHECK(big.size() == 10000);
}

TEST_CASE("equivalence with a disjunction of terms") {
  SUBCASE("empty disjunction forces the left side false") {
    CnfFormula f;
    VarTable t;
    const Lit a = t.fresh_var(VarKey::directed(0, 1));
    add_equiv_disjunction(f, t, a, {});
    CHECK(f.clause_count() == 1);
    CHECK(f.satisfied_by({false, false}));
    CHECK_FALSE(f.satisfied_by({false, true}));
  }
  SUBCASE("single literal term gives an equivalence") {
    CnfFormula f;
    VarTable t;
    const Lit a = t.fresh_var(VarKey::directed(0, 1));
    const Lit b = t.fresh_var(VarKey::directed(1, 0));
    const std::vector<Term> rhs{{b}};
    add_equiv_disjunction(f, t, a, rhs);
    CHECK(t.size() == 2);
    for (int m = 0; m < 4; ++m) {
      const bool va = m & 1, vb = m & 2;
      CHECK(f.satisfied_by({false, va, vb}) == (va == vb));
    }
  }
  SUBCASE("A <=> (B and C) or D") {
    CnfFormula f;
    VarTable t;
    const Lit a = t.fresh_var(VarKey::directed(0, 1));
    const Lit b = t.fresh_var(VarKey::directed(0, 2));
    const Lit c = t.fresh_var(VarKey::directed(1, 2));
    const Lit d = t.fresh_var(VarKey::directed(2, 0));
    const std::vector<Term> rhs{{b, c}, {d}};
    add_equiv_disjunction(f, t, a, rhs);
    CHECK(t.size() == 5);
    for (std::uint32_t m = 0; m < 16; ++m) {
      const auto v = extend(t, 4, m);
      const bool expect = v[1] == ((v[2] && v[3]) || v[4]);
      CHECK(f.satisfied_by(v) == expect);
      // Any other value of the auxiliary variable breaks the formula.
      auto flipped = v;
      flipped[5] = !flipped[5];
      CHECK_FALSE(f.satisfied_by(flipped));
    }
  }
  SUBCASE("empty term is rejected") {
    CnfFormula f;
    VarTable t;
    const Lit a = t.fresh_var(VarKey::directed(0, 1));
    CHECK_THROWS(add_equiv_disjunction(f, t, a, std::vector<Term>{{}}));
  }
}

TEST_CASE("random equivalences preserve models on the original variables") {
  Rng rng(4242);
  for (int round = 0; round < 300; ++round) {
    const std::uint32_t inputs = 2 + rng() % 5;
    CnfFormula f;
    VarTable t;
    for (std::uint32_t i = 0; i < inputs; ++i) t.fresh_var(VarKey::directed(static_cast<int>(i), 31));
    std::vector<Term> rhs(rng() % 4);
    for (Term& term : rhs) {
      const std::size_t len = 1 + rng() % 3;
      for (std::size_t k = 0; k < len; ++k) {
        term.push_back(Lit(PropVar{static_cast<std::uint32_t>(2 + rng() % (inputs - 1))}, rng() % 2 == 1));
      }
    }
    const Lit lhs(PropVar{1}, rng() % 2 == 1);
    add_equiv_disjunction(f, t, lhs, rhs);
    const std::uint32_t aux = t.size() - inputs;
    REQUIRE(aux <= 4);
    for (std::uint32_t m = 0; m < (1u << inputs); ++m) {
      const auto canonical = extend(t, inputs, m);
      const bool expect = lhs.holds(canonical[1]) == eval_dnf(rhs, canonical);
      int extensions = 0;
      for (std::uint32_t a = 0; a < (1u << aux); ++a) {
        auto v = canonical;
        for (std::uint32_t k = 0; k < aux; ++k) v[inputs + 1 + k] = (a >> k) & 1u;
        if (f.satisfied_by(v)) ++extensions;
      }
      CHECK(extensions == (expect ? 1 : 0));
    }
  }
}

TEST_CASE("clause count is linear in the input size") {
  CnfFormula f;
  VarTable t;
  const Lit a = t.fresh_var(VarKey::directed(0, 1));
  std::vector<Term> rhs;
  std::size_t lits = 0;
  for (int i = 0; i < 50; ++i) {
    Term term;
    for (int k = 0; k <= i % 4; ++k) term.push_back(t.fresh_var(VarKey::directed(2 + i, k)));
    lits += term.size();
    rhs.push_back(term);
  }
  add_equiv_disjunction(f, t, a, rhs);
  CHECK(f.clause_count() <= 2 * (lits + rhs.size()) + 1);
}

TEST_CASE("DIMACS output") {
  CnfFormula f;
  f.add_clause({Lit::from_dimacs(1), Lit::from_dimacs(-2)});
  f.add_clause({Lit::from_dimacs(2)});
  std::ostringstream out;
  write_dimacs(f, out);
  CHECK(out.str() == "p cnf 2 2\n1 -2 0\n2 0\n");

  std::ostringstream empty;
  write_dimacs(CnfFormula{}, empty);
  CHECK(empty.str() == "p cnf 0 0\n");
  CHECK_THROWS(f.add_clause(std::span<const Lit>{}));
}

TEST_CASE("DIMACS round trip and errors") {
  Rng rng(9);
  for (int round = 0; round < 100; ++round) {
    CnfFormula f;
    const int clauses = static_cast<int>(rng() % 20);
    for (int c = 0; c < clauses; ++c) {
      std::vector<Lit> cl;
      for (int k = 0, len = 1 + static_cast<int>(rng() % 4); k < len; ++k) {
        cl.push_back(Lit(PropVar{static_cast<std::uint32_t>(1 + rng() % 30)}, rng() % 2 == 1));
      }
      f.add_clause(cl);
    }
    std::stringstream io;
    write_dimacs(f, io);
    const CnfFormula g = read_dimacs(io);
    REQUIRE(g.clause_count() == f.clause_count());
    CHECK(g.var_count() == f.var_count());
    for (std::size_t i = 0; i < f.clause_count(); ++i) {
      CHECK(std::vector<Lit>(g.clause(i).begin(), g.clause(i).end()) ==
            std::vector<Lit>(f.clause(i).begin(), f.clause(i).end()));
    }
  }

  auto parse = [](const char* text) {
    std::istringstream in(text);
    return read_dimacs(in);
  };
  CHECK(parse("c hello\np cnf 3 1\n1 -3\n0\n").clause_count() == 1);
  CHECK_THROWS_WITH(parse("1 2 0\n"), doctest::Contains("line 1"));
  CHECK_THROWS_WITH(parse("p cnf 2 1\n1 5 0\n"), doctest::Contains("exceeds"));
  CHECK_THROWS_WITH(parse("p cnf 2 2\n1 0\n"), doctest::Contains("clause count"));
  CHECK_THROWS_WITH(parse("p cnf 2 1\n1 x 0\n"), doctest::Contains("bad token"));
  CHECK_THROWS(parse(""));
}
