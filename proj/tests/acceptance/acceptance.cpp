// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "causat/bruteforce.hpp"
#include "causat/discovery.hpp"
#include "causat/encoder.hpp"
#include "causat/experiments.hpp"
#include "causat/sat.hpp"

using namespace causat;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<TestSpec> all_specs(int n) {
  std::vector<TestSpec> out;
  const NodeSet all = NodeSet::all(n);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      if (x == y) continue;
      const NodeSet rest = all.without(x).without(y);
      for (std::uint32_t c = 0; c <= all.bits(); ++c) {
        if (!NodeSet(c).subset_of(rest)) continue;
        for (std::uint32_t j = 0; j <= all.bits(); ++j) out.push_back({x, y, NodeSet(c), NodeSet(j)});
      }
    }
  }
  return out;
}

TestSpec random_spec(int n, Rng& rng) {
  TestSpec t;
  t.x = static_cast<int>(rng() % n);
  do t.y = static_cast<int>(rng() % n);
  while (t.y == t.x);
  const auto mask = (1u << n) - 1u;
  t.conditioning = NodeSet(static_cast<std::uint32_t>(rng()) & mask).without(t.x).without(t.y);
  t.intervention = NodeSet(static_cast<std::uint32_t>(rng()) & mask);
  return t;
}

MixedGraph collider_chain() {
  MixedGraph g({"x", "y", "z", "w"});
  g.add_directed(0, 2);
  g.add_directed(1, 2);
  g.add_directed(2, 3);
  return g;
}

Outcome encoding_soundness() {
  std::size_t checks = 0, failures = 0;
  std::vector<MixedGraph> graphs;
  enumerate_graphs(3, [&](const MixedGraph& g) { graphs.push_back(g); });
  for (const TestSpec& t : all_specs(3)) {
    for (bool polarity : {false, true}) {
      Encoder enc(3);
      enc.encode_relation({t, polarity});
      for (const MixedGraph& g : graphs) {
        ++checks;
        const bool sat = enc.formula().satisfied_by(enc.assignment_of(g));
        if (sat != (d_connected(g, t) == polarity)) ++failures;
      }
    }
  }
  Rng rng(591);
  for (int i = 0; i < 200; ++i) {
    const MixedGraph g = random_graph(5, 0.1 + 0.3 * unit_draw(rng), rng);
    const TestSpec t = random_spec(5, rng);
    const bool truth = d_connected(g, t);
    for (bool polarity : {false, true}) {
      Encoder enc(5);
      enc.encode_relation({t, polarity});
      ++checks;
      if (enc.formula().satisfied_by(enc.assignment_of(g)) != (truth == polarity)) ++failures;
    }
  }
  return {failures == 0, std::to_string(checks) + " checks, " + std::to_string(failures) + " failures"};
}

Outcome walk_length_bound() {
  std::size_t checks = 0, failures = 0;
  const auto specs3 = all_specs(3);
  enumerate_graphs(3, [&](const MixedGraph& g) {
    for (const TestSpec& t : specs3) {
      ++checks;
      if (walks_dconnect(g, t, max_path_length(3, t)) != d_connected(g, t)) ++failures;
    }
  });
  Rng rng(592);
  std::vector<std::vector<TestSpec>> specs(7);
  for (int n = 3; n <= 6; ++n) specs[n] = all_specs(n);
  for (int i = 0; i < 500; ++i) {
    const int n = 2 + static_cast<int>(rng() % 5);
    if (specs[n].empty()) specs[n] = all_specs(n);
    const MixedGraph g = random_graph(n, 0.1 + 0.3 * unit_draw(rng), rng);
    for (const TestSpec& t : specs[n]) {
      ++checks;
      if (walks_dconnect(g, t, max_path_length(n, t)) != d_connected(g, t)) ++failures;
    }
  }
  return {failures == 0, std::to_string(checks) + " checks, " + std::to_string(failures) + " failures"};
}

Outcome discovery_consensus() {
  std::size_t runs = 0, mismatches = 0;
  auto check = [&](const MixedGraph& g, const std::vector<Experiment>& ex, int n) {
    DiscoveryConfig cfg;
    cfg.track_ancestral = true;
    const EdgeSolution s = discover(OracleSource::from_graph(g, ex), cfg).solution;
    ++runs;
    if (!(s == consensus(oracle_relations(g, ex), n))) ++mismatches;
  };
  Rng rng(593);
  std::vector<std::vector<Experiment>> sets{{{NodeSet::all(3), {}}}};
  for (int i = 0; i < 50; ++i) sets.push_back(random_experiments(3, 1 + static_cast<int>(rng() % 4), rng));
  enumerate_graphs(3, [&](const MixedGraph& g) {
    for (const auto& ex : sets) check(g, ex, 3);
  });
  for (int i = 0; i < 50; ++i) {
    const MixedGraph g = random_graph(4, 0.25, rng);
    check(g, random_experiments(4, 1 + static_cast<int>(rng() % 4), rng), 4);
  }
  return {mismatches == 0, std::to_string(runs) + " runs, " + std::to_string(mismatches) + " mismatches"};
}

Outcome collider_chain_end_to_end() {
  const MixedGraph g = collider_chain();
  const std::vector<Experiment> passive{{g.nodes(), {}}};
  const bool pattern = !d_connected(g, {0, 1, {}, {}}) && !d_connected(g, {0, 3, NodeSet{2}, {}}) &&
                       d_connected(g, {0, 1, NodeSet{2}, {}});
  DiscoveryConfig cfg;
  cfg.assumptions.acyclic = true;
  cfg.assumptions.no_latents = true;
  cfg.track_ancestral = true;
  const EdgeSolution s = discover(OracleSource::from_graph(g, passive), cfg).solution;
  bool exact = true;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      exact = exact && s.directed(a, b) == (g.has_directed(a, b) ? Status::present : Status::absent);
      exact = exact && s.bidirected(a, b) == Status::absent;
    }
  }
  const bool oracle = s == consensus(oracle_relations(g, passive), 4, cfg.assumptions);
  return {pattern && exact && oracle, std::string("independencies ") + (pattern ? "ok" : "wrong") + ", statuses " +
                                          (exact ? "exact" : "differ") + ", consensus " + (oracle ? "equal" : "differs")};
}

Outcome chain_queries() {
  MixedGraph g({"x", "y", "z"});
  g.add_directed(0, 1);
  g.add_directed(1, 2);
  Discovery d(3, {});
  d.run(OracleSource::from_graph(g, {{g.nodes(), {}}}));
  const Verdict collider = d.query(parse_query("exactly(x->y, z->y)", g.names()));
  const Verdict reversed = d.query(parse_query("exactly(y->x, z->y)", g.names()));
  return {collider == Verdict::always_false && reversed == Verdict::contingent,
          "x->y<-z " + std::string(to_string(collider)) + ", x<-y<-z " + std::string(to_string(reversed))};
}

Outcome backbone_correctness() {
  Rng rng(596);
  int formulas = 0, failures = 0;
  while (formulas < 1000) {
    const int vars = 1 + static_cast<int>(rng() % 12);
    CnfFormula f;
    f.ensure_vars(static_cast<std::uint32_t>(vars));
    const int clauses = static_cast<int>(vars * (1.0 + 4.0 * unit_draw(rng)));
    for (int c = 0; c < clauses; ++c) {
      std::vector<Lit> cl;
      const int len = 1 + static_cast<int>(rng() % 3);
      for (int k = 0; k < len; ++k) cl.push_back(Lit(PropVar{static_cast<std::uint32_t>(1 + rng() % vars)}, rng() % 2));
      f.add_clause(cl);
    }
    std::vector<int> seen_true(vars + 1, 0), seen_false(vars + 1, 0);
    bool any = false;
    for (std::uint32_t m = 0; m < (1u << vars); ++m) {
      std::vector<bool> v(vars + 1, false);
      for (int i = 1; i <= vars; ++i) v[i] = (m >> (i - 1)) & 1u;
      if (!f.satisfied_by(v)) continue;
      any = true;
      for (int i = 1; i <= vars; ++i) (v[i] ? seen_true : seen_false)[i] = 1;
    }
    if (!any) continue;
    ++formulas;
    std::vector<PropVar> cands;
    std::vector<Lit> expect;
    for (int i = 1; i <= vars; ++i) {
      cands.push_back(PropVar{static_cast<std::uint32_t>(i)});
      if (seen_true[i] != seen_false[i]) expect.push_back(Lit(cands.back(), seen_false[i] == 1));
    }
    CdclSolver s;
    s.add_clauses(f);
    if (backbone(s, cands).fixed != expect) ++failures;
  }
  return {failures == 0, std::to_string(formulas) + " formulas, " + std::to_string(failures) + " failures"};
}

std::string seconds(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << std::fixed << v << "s";
  return ss.str();
}

Outcome scaling() {
  HarnessOptions opts;
  opts.instances = 20;
  opts.seed = 597;
  opts.timeout = std::chrono::minutes(10);
  const ScalingRow full = run_scaling({8}, std::nullopt, opts).front();
  const ScalingRow capped = run_scaling({8}, 2, opts).front();
  const bool pass = full.timeouts == 0 && full.median_seconds < 600.0 && capped.median_seconds < full.median_seconds;
  return {pass, "n=8 median " + seconds(full.median_seconds) + " (" + std::to_string(full.timeouts) +
                    " timeouts), max_c=2 median " + seconds(capped.median_seconds)};
}

Outcome identifiability() {
  HarnessOptions opts;
  opts.instances = 30;
  opts.seed = 598;
  const auto rows = run_identifiability(6, opts);
  bool pass = true;
  std::string detail;
  for (std::size_t k = 0; k < kCategoryCount; ++k) {
    const auto& m0 = rows[0].mean[k];
    const auto& m2 = rows[2].mean[k];
    const auto& m4 = rows[4].mean[k];
    if (!m0 || !m2 || !m4) {
      pass = false;
      detail += std::string(to_string(static_cast<Category>(k))) + " undefined; ";
      continue;
    }
    const double low = *m2 - *m0, high = *m4 - *m2;
    pass = pass && high < low;
    std::ostringstream ss;
    ss.precision(3);
    ss << std::fixed << to_string(static_cast<Category>(k)) << " " << low << "/" << high;
    detail += (detail.empty() ? "" : ", ") + ss.str();
  }
  return {pass, "gain 0->2 / 2->4: " + detail};
}

Outcome assumption_robustness() {
  HarnessOptions opts;
  opts.instances = 20;
  opts.seed = 599;
  const auto rows = run_assumption_comparison(5, opts, {Restriction::both});
  double none = -1, both = -1;
  int shrinks = 0, false_statuses = 0;
  for (const auto& r : rows) {
    shrinks += r.shrinks;
    false_statuses += static_cast<int>(r.pooled.false_statuses);
    if (r.assumed == Restriction::none) none = r.mean_determinate;
    if (r.assumed == Restriction::both) both = r.mean_determinate;
  }
  const double gap = both - none;
  std::ostringstream ss;
  ss.precision(3);
  ss << std::fixed << "determinate none " << none << ", both " << both << ", gap " << gap * 100 << " pp, shrinks "
     << shrinks << ", false statuses " << false_statuses;
  return {none >= 0 && both >= 0 && std::abs(gap) <= 0.15 && shrinks == 0 && false_statuses == 0, ss.str()};
}

Outcome contradiction() {
  namespace fs = std::filesystem;
  const fs::path file = fs::temp_directory_path() / ("causat-acceptance-" + std::to_string(::getpid()) + ".txt");
  std::ofstream(file) << "sep x y | - || -\ncon x y | - || -\n";
  const std::string cmd = std::string(CAUSAT_CLI) + " discover --nodes \"x y\" --relations " + file.string() +
                          " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  std::string out;
  if (pipe != nullptr) {
    char buf[512];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  }
  const int status = pipe != nullptr ? ::pclose(pipe) : -1;
  fs::remove(file);
  const int code = status >= 0 && WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  const bool report = out.find("UNSAT") != std::string::npos;
  return {code == 2 && report, "exit " + std::to_string(code) + (report ? ", UNSAT reported" : ", no UNSAT report")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"encoding soundness", encoding_soundness},
      {"walk length bound", walk_length_bound},
      {"discovery equals consensus", discovery_consensus},
      {"collider chain end to end", collider_chain_end_to_end},
      {"query engine on a chain", chain_queries},
      {"backbone correctness", backbone_correctness},
      {"scaling at n=8", scaling},
      {"identifiability saturation", identifiability},
      {"assumption robustness", assumption_robustness},
      {"contradiction handling", contradiction},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
              << " [" << seconds(secs) << "]" << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
