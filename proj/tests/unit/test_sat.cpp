#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>

#include "causat/sat.hpp"
#include "doctest.h"

using namespace causat;

namespace {

Lit L(int code) { return Lit::from_dimacs(code); }

CnfFormula random_3cnf(int vars, int clauses, Rng& rng) {
  CnfFormula f;
  f.ensure_vars(static_cast<std::uint32_t>(vars));
  for (int c = 0; c < clauses; ++c) {
    std::vector<Lit> cl;
    for (int k = 0; k < 3; ++k) {
      cl.push_back(Lit(PropVar{static_cast<std::uint32_t>(1 + rng() % vars)}, rng() % 2 == 1));
    }
    f.add_clause(cl);
  }
  return f;
}

std::vector<bool> assignment(std::uint32_t vars, std::uint32_t bits) {
  std::vector<bool> v(vars + 1, false);
  for (std::uint32_t i = 1; i <= vars; ++i) v[i] = (bits >> (i - 1)) & 1u;
  return v;
}

// Pigeonhole: `holes + 1` pigeons into `holes` holes. Hard for resolution.
CnfFormula pigeonhole(int holes) {
  CnfFormula f;
  auto var = [&](int p, int h) { return Lit(PropVar{static_cast<std::uint32_t>(p * holes + h + 1)}); };
  for (int p = 0; p <= holes; ++p) {
    std::vector<Lit> cl;
    for (int h = 0; h < holes; ++h) cl.push_back(var(p, h));
    f.add_clause(cl);
  }
  for (int h = 0; h < holes; ++h) {
    for (int p = 0; p <= holes; ++p) {
      for (int q = p + 1; q <= holes; ++q) f.add_clause({~var(p, h), ~var(q, h)});
    }
  }
  return f;
}

}  // namespace

TEST_CASE("solving small formulas") {
  CdclSolver s;
  CnfFormula f;
  f.add_clause({L(1), L(2)});
  f.add_clause({L(-1)});
  s.add_clauses(f);
  const SolveOutcome o = s.solve();
  REQUIRE(o.satisfiable());
  CHECK_FALSE(o.value(PropVar{1}));
  CHECK(o.value(PropVar{2}));

  const Lit a[] = {L(-2)};
  CHECK(s.solve_under(a).status == SolveStatus::unsatisfiable);
  // Assumptions do not persist.
  CHECK(s.solve().satisfiable());

  CdclSolver u;
  u.add_clause(std::vector<Lit>{L(1)});
  u.add_clause(std::vector<Lit>{L(-1)});
  CHECK(u.solve().status == SolveStatus::unsatisfiable);

  CdclSolver empty;
  CHECK(empty.solve().satisfiable());
}

TEST_CASE("agreement with truth tables on random 3-CNF") {
  Rng rng(31337);
  int sat = 0;
  for (int round = 0; round < 1000; ++round) {
    const int vars = 3 + static_cast<int>(rng() % 13);
    const int clauses = static_cast<int>(vars * (3.0 + unit_draw(rng) * 2.5));
    const CnfFormula f = random_3cnf(vars, clauses, rng);
    bool expect = false;
    for (std::uint32_t m = 0; m < (1u << vars) && !expect; ++m) expect = f.satisfied_by(assignment(vars, m));
    CdclSolver s;
    s.add_clauses(f);
    const SolveOutcome o = s.solve();
    REQUIRE(o.satisfiable() == expect);
    if (o.satisfiable()) {
      ++sat;
      CHECK(f.satisfied_by(o.model));
    }
  }
  CHECK(sat > 100);
  CHECK(sat < 900);
}

TEST_CASE("repeated assumptions on one solver agree with truth tables") {
  Rng rng(5);
  for (int round = 0; round < 50; ++round) {
    const int vars = 8;
    const CnfFormula f = random_3cnf(vars, 28, rng);
    CdclSolver s;
    s.add_clauses(f);
    for (int q = 0; q < 20; ++q) {
      std::vector<Lit> assume;
      for (int k = 0; k < 3; ++k) assume.push_back(Lit(PropVar{static_cast<std::uint32_t>(1 + rng() % vars)}, rng() % 2));
      bool expect = false;
      for (std::uint32_t m = 0; m < 256 && !expect; ++m) {
        const auto v = assignment(vars, m);
        bool ok = f.satisfied_by(v);
        for (Lit l : assume) ok = ok && l.holds(v[l.var().id]);
        expect = ok;
      }
      CHECK(s.solve_under(assume).satisfiable() == expect);
    }
  }
}

TEST_CASE("backbone examples") {
  CdclSolver s;
  s.add_clause(std::vector<Lit>{L(1)});
  s.add_clause(std::vector<Lit>{L(-1), L(2)});
  s.add_clause(std::vector<Lit>{L(3), L(4)});
  const std::vector<PropVar> cands{PropVar{1}, PropVar{2}, PropVar{3}, PropVar{4}};
  const BackboneResult r = backbone(s, cands);
  CHECK(r.fixed == std::vector<Lit>{L(1), L(2)});
  CHECK(r.free == std::vector<PropVar>{PropVar{3}, PropVar{4}});

  CdclSolver bad;
  bad.add_clause(std::vector<Lit>{L(1)});
  bad.add_clause(std::vector<Lit>{L(-1)});
  CHECK_THROWS_AS(backbone(bad, cands), Unsatisfiable);
}

TEST_CASE("backbone agrees with model enumeration, with and without filtering") {
  Rng rng(77);
  for (int round = 0; round < 300; ++round) {
    const int vars = 2 + static_cast<int>(rng() % 11);
    const CnfFormula f = random_3cnf(vars, static_cast<int>(vars * 3.5), rng);
    std::vector<int> seen_true(vars + 1, 0), seen_false(vars + 1, 0);
    bool any = false;
    for (std::uint32_t m = 0; m < (1u << vars); ++m) {
      const auto v = assignment(vars, m);
      if (!f.satisfied_by(v)) continue;
      any = true;
      for (int i = 1; i <= vars; ++i) (v[i] ? seen_true : seen_false)[i] = 1;
    }
    std::vector<PropVar> cands;
    for (int i = 1; i <= vars; ++i) cands.push_back(PropVar{static_cast<std::uint32_t>(i)});
    for (bool filtering : {true, false}) {
      CdclSolver s;
      s.add_clauses(f);
      BackboneOptions opt;
      opt.model_filtering = filtering;
      if (!any) {
        CHECK_THROWS_AS(backbone(s, cands, opt), Unsatisfiable);
        continue;
      }
      const BackboneResult r = backbone(s, cands, opt);
      std::vector<Lit> expect;
      for (int i = 1; i <= vars; ++i) {
        if (seen_true[i] != seen_false[i]) expect.push_back(Lit(PropVar{static_cast<std::uint32_t>(i)}, seen_false[i] == 1));
      }
      CHECK(r.fixed == expect);
      CHECK(r.fixed.size() + r.free.size() == cands.size());
      if (!filtering) CHECK(r.sat_calls == cands.size() + 1);
    }
  }
}

TEST_CASE("committed backbone units become level-0 facts") {
  CdclSolver s;
  s.add_clause(std::vector<Lit>{L(1), L(2)});
  s.add_clause(std::vector<Lit>{L(1), L(-2)});
  const std::vector<PropVar> cands{PropVar{1}};
  backbone(s, cands);
  CHECK(s.fixed_value(PropVar{1}) == true);
}

TEST_CASE("deadline interrupts a hard solve") {
  CdclSolver s;
  s.add_clauses(pigeonhole(11));
  s.set_deadline(std::chrono::steady_clock::now() + std::chrono::milliseconds(100));
  const auto start = std::chrono::steady_clock::now();
  const SolveOutcome o = s.solve();
  CHECK(o.status == SolveStatus::interrupted);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(5));
  const std::vector<PropVar> cands{PropVar{1}};
  CHECK_THROWS_AS(backbone(s, cands), Interrupted);
  s.set_deadline(std::nullopt);
  CdclSolver small;
  small.add_clauses(pigeonhole(5));
  CHECK(small.solve().status == SolveStatus::unsatisfiable);
}

TEST_CASE("parsing solver output") {
  const SolveOutcome a = parse_solver_output("c comment\ns SATISFIABLE\nv 1 -2\nv 3 0\n", 3);
  REQUIRE(a.satisfiable());
  CHECK(a.model == std::vector<bool>{false, true, false, true});
  const SolveOutcome b = parse_solver_output("SAT\n-1 2 0\n", 2);
  CHECK(b.model == std::vector<bool>{false, false, true});
  CHECK(parse_solver_output("s UNSATISFIABLE\n", 2).status == SolveStatus::unsatisfiable);
  CHECK(parse_solver_output("UNSAT\n", 2).status == SolveStatus::unsatisfiable);
  CHECK_THROWS(parse_solver_output("nothing here\n", 2));
  CHECK_THROWS(make_backend("minisat"));
  CHECK(make_backend("embedded") != nullptr);
}

namespace {

void check_external(const std::string& command) {
  Rng rng(11);
  for (int round = 0; round < 25; ++round) {
    const int vars = 10;
    const CnfFormula f = random_3cnf(vars, 43, rng);
    CdclSolver embedded;
    embedded.add_clauses(f);
    auto external = make_backend("external:" + command);
    external->add_clauses(f);
    const SolveOutcome e = external->solve();
    CHECK(e.satisfiable() == embedded.solve().satisfiable());
    if (e.satisfiable()) CHECK(f.satisfied_by(e.model));
    const Lit assume[] = {L(1), L(-2)};
    const SolveOutcome ea = external->solve_under(assume);
    CHECK(ea.satisfiable() == embedded.solve_under(assume).satisfiable());
    if (ea.satisfiable()) {
      CHECK(ea.model[1]);
      CHECK_FALSE(ea.model[2]);
    }
  }
}

}  // namespace

TEST_CASE("external backend through the command-line solver") {
  check_external(std::string(CAUSAT_CLI) + " solve");
}

TEST_CASE("external backend through pysat") {
  const std::string pysat = PYSAT_SOLVE;
  if (pysat.empty()) {
    MESSAGE("pysat not available; skipped");
    return;
  }
  check_external(pysat);
}
