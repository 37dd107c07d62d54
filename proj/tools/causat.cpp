// causat: causal structure discovery from d-separation relations.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "causat/bruteforce.hpp"
#include "causat/discovery.hpp"
#include "causat/experiments.hpp"
#include "causat/formats.hpp"

using namespace causat;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitContradiction = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return read_text_file(path);
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + out_path + "'");
}

std::optional<std::chrono::steady_clock::duration> seconds_budget(double sec) {
  if (sec <= 0) return std::nullopt;
  return std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(sec));
}

// Options shared by commands that read a relation source.
struct SourceOptions {
  std::string relations;
  std::string graph;
  std::string experiments;
  bool passive = false;
  int random_experiments = 0;
  std::string nodes;
  std::optional<int> max_c;
};

void add_source_options(CLI::App* cmd, SourceOptions& o) {
  cmd->add_option("--relations", o.relations, "Relation list file ('-' for stdin)");
  cmd->add_option("--graph", o.graph, "Ground-truth graph file; relations come from its oracle");
  cmd->add_option("--experiments", o.experiments, "Experiment file (with --graph)");
  cmd->add_flag("--passive", o.passive, "One passive experiment over all nodes (with --graph)");
  cmd->add_option("--random-experiments", o.random_experiments, "Draw K random experiments (with --graph)");
  cmd->add_option("--nodes", o.nodes, "Node universe, e.g. \"x y z\"");
  cmd->add_option("--max-c", o.max_c, "Largest conditioning set size")->check(CLI::NonNegativeNumber);
}

std::vector<Experiment> experiments_for(const SourceOptions& o, const MixedGraph& g, std::uint64_t seed) {
  const int chosen = (o.passive ? 1 : 0) + (o.experiments.empty() ? 0 : 1) + (o.random_experiments > 0 ? 1 : 0);
  if (chosen != 1) throw UsageError("with --graph give exactly one of --passive, --experiments, --random-experiments");
  if (o.passive) return {Experiment{g.nodes(), NodeSet()}};
  if (!o.experiments.empty()) return parse_experiments(read_input(o.experiments), g.names());
  Rng rng(seed);
  return random_experiments(g.size(), o.random_experiments, rng);
}

std::vector<std::string> universe(const SourceOptions& o) {
  return o.nodes.empty() ? std::vector<std::string>{} : parse_names(o.nodes);
}

OracleSource load_source(const SourceOptions& o, std::uint64_t seed) {
  if (!o.graph.empty()) {
    if (!o.relations.empty()) throw UsageError("give either --graph or --relations, not both");
    MixedGraph g = parse_graph(read_input(o.graph));
    auto ex = experiments_for(o, g, seed);
    return OracleSource::from_graph(std::move(g), std::move(ex));
  }
  if (o.passive || !o.experiments.empty() || o.random_experiments > 0) {
    throw UsageError("experiment options need --graph");
  }
  std::optional<std::vector<std::string>> names;
  if (!o.nodes.empty()) names = universe(o);
  RelationSet rs = parse_relations(read_input(o.relations), names);
  return OracleSource::from_relations(std::move(rs.names), std::move(rs.relations));
}

struct ModelOptions {
  std::vector<std::string> assume;
  std::string know;
  std::string backend = "embedded";
  bool ancestral = false;
};

void add_model_options(CLI::App* cmd, ModelOptions& o) {
  cmd->add_option("--assume", o.assume, "Model-space assumption (repeatable)")
      ->check(CLI::IsMember({"acyclic", "no-latents"}));
  cmd->add_option("--know", o.know, "Background knowledge file");
  cmd->add_option("--backend", o.backend, "SAT backend: embedded or external:PATH");
  cmd->add_flag("--ancestral", o.ancestral, "Also report ancestral relations");
}

DiscoveryConfig config_for(const ModelOptions& m, const std::vector<std::string>& names) {
  DiscoveryConfig cfg;
  cfg.backend = m.backend;
  cfg.track_ancestral = m.ancestral;
  if (!m.know.empty()) {
    Knowledge k = parse_knowledge(read_input(m.know), names);
    cfg.background = std::move(k.background);
    cfg.assumptions = k.assumptions;
  }
  for (const auto& a : m.assume) {
    if (a == "acyclic") cfg.assumptions.acyclic = true;
    if (a == "no-latents") cfg.assumptions.no_latents = true;
  }
  return cfg;
}

std::string summary(const DiscoveryResult& r, bool ancestral) {
  int present = 0, absent = 0, unknown = 0;
  const EdgeSolution& s = r.solution;
  auto count = [&](Status st) {
    if (st == Status::present) ++present;
    if (st == Status::absent) ++absent;
    if (st == Status::unknown) ++unknown;
  };
  for (int a = 0; a < s.node_count(); ++a) {
    for (int b = 0; b < s.node_count(); ++b) {
      if (a == b) continue;
      count(s.directed(a, b));
      if (a < b) count(s.bidirected(a, b));
      if (ancestral) count(s.ancestral(a, b));
    }
  }
  std::ostringstream out;
  out << "# present " << present << " absent " << absent << " unknown " << unknown << '\n';
  out << "# relations encoded " << r.stats.encoded << " determined-by-pruning " << r.stats.determined_by_pruning
      << " skipped " << r.stats.skipped << " unavailable " << r.stats.unavailable << '\n';
  out << "# sat calls " << r.stats.sat_calls << " conflicts " << r.stats.solver.conflicts << " variables "
      << r.stats.variables << " clauses " << r.stats.clauses << " seconds " << r.stats.seconds << '\n';
  return out.str();
}

int contradiction(const std::string& why) {
  std::cout << "UNSAT\n";
  std::cerr << "contradiction: " << why << '\n';
  return kExitContradiction;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad number '" + item + "' in list");
    }
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal structure discovery over cyclic graphs with latent confounders"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 1;
  std::string out_path;
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--out", out_path, "Write results to this file instead of standard output");

  SourceOptions source;
  ModelOptions model;
  std::string save_path;
  double timeout_sec = 0;

  auto* discover_cmd = app.add_subcommand("discover", "Determine edge and ancestral statuses");
  add_source_options(discover_cmd, source);
  add_model_options(discover_cmd, model);
  discover_cmd->add_option("--save-formula", save_path, "Save the final formula for later queries");
  discover_cmd->add_option("--timeout-sec", timeout_sec, "Wall-clock budget");

  auto* oracle_cmd = app.add_subcommand("oracle", "Print the d-separation relations of a graph");
  SourceOptions oracle_source;
  add_source_options(oracle_cmd, oracle_source);

  auto* encode_cmd = app.add_subcommand("encode", "Print the working formula as DIMACS");
  SourceOptions encode_source;
  ModelOptions encode_model;
  add_source_options(encode_cmd, encode_source);
  add_model_options(encode_cmd, encode_model);

  auto* query_cmd = app.add_subcommand("query", "Classify a structural query against a saved formula");
  std::string formula_path;
  std::string expression;
  std::string query_backend = "embedded";
  query_cmd->add_option("--formula", formula_path, "Formula saved by discover or encode")->required();
  query_cmd->add_option("--backend", query_backend, "SAT backend: embedded or external:PATH");
  query_cmd->add_option("expression", expression, "Query, e.g. \"exactly(x->y, z->y)\"")->required();

  auto* verify_cmd = app.add_subcommand("verify", "Cross-check discovery against exhaustive enumeration");
  int verify_n = 3;
  int verify_instances = 20;
  int verify_experiments = 3;
  double verify_prob = 0.3;
  verify_cmd->add_option("--n", verify_n, "Node count (2..4)")->check(CLI::Range(2, kMaxEnumeratedNodes));
  verify_cmd->add_option("--instances", verify_instances, "Random instances")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--experiments", verify_experiments, "Experiments per instance")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--edge-prob", verify_prob, "Edge probability")->check(CLI::Range(0.0, 1.0));
  std::vector<std::string> verify_assume;
  verify_cmd->add_option("--assume", verify_assume, "Model-space assumption (repeatable)")
      ->check(CLI::IsMember({"acyclic", "no-latents"}));

  auto* simulate_cmd = app.add_subcommand("simulate", "Run a simulation study and print a TSV table");
  std::string study = "scaling";
  std::string sizes = "5,6,7,8";
  int sim_n = 0;
  HarnessOptions harness;
  std::optional<int> sim_max_c;
  simulate_cmd->add_option("--study", study, "scaling, identifiability or assumptions")
      ->check(CLI::IsMember({"scaling", "identifiability", "assumptions"}));
  simulate_cmd->add_option("--sizes", sizes, "Node counts for the scaling study, comma separated");
  simulate_cmd->add_option("--n", sim_n, "Node count (identifiability: 8, assumptions: 5 by default)");
  simulate_cmd->add_option("--instances", harness.instances, "Instances per row")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--experiments", harness.experiments, "Experiments per instance")
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--edge-prob", harness.edge_prob, "Edge probability")->check(CLI::Range(0.0, 1.0));
  simulate_cmd->add_option("--max-c", sim_max_c, "Conditioning cap for the scaling study")
      ->check(CLI::NonNegativeNumber);
  simulate_cmd->add_option("--timeout-sec", timeout_sec, "Per-instance wall-clock budget");
  simulate_cmd->add_option("--backend", harness.backend, "SAT backend: embedded or external:PATH");

  auto* solve_cmd = app.add_subcommand("solve", "Solve a DIMACS file (exit 0 satisfiable, 2 unsatisfiable)");
  std::string dimacs_path;
  solve_cmd->add_option("file", dimacs_path, "DIMACS CNF file ('-' for stdin)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (discover_cmd->parsed()) {
      const OracleSource oracle = load_source(source, seed);
      DiscoveryConfig cfg = config_for(model, oracle.names());
      cfg.max_c = source.max_c;
      cfg.timeout = seconds_budget(timeout_sec);
      Discovery d(oracle.node_count(), cfg);
      DiscoveryResult r;
      try {
        r = d.run(oracle);
      } catch (const Contradiction& e) {
        return contradiction(e.what());
      }
      if (!save_path.empty()) {
        std::ofstream out(save_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + save_path + "'");
        save_formula(d.encoder(), oracle.names(), out);
      }
      emit(out_path, print_solution(oracle.names(), r.solution, model.ancestral) + summary(r, model.ancestral));
      return kExitOk;
    }

    if (oracle_cmd->parsed()) {
      if (oracle_source.graph.empty()) throw UsageError("oracle needs --graph");
      const MixedGraph g = parse_graph(read_input(oracle_source.graph));
      const auto ex = experiments_for(oracle_source, g, seed);
      emit(out_path, print_relations(g.names(), oracle_relations(g, ex, oracle_source.max_c)));
      return kExitOk;
    }

    if (encode_cmd->parsed()) {
      const OracleSource oracle = load_source(encode_source, seed);
      const DiscoveryConfig cfg = config_for(encode_model, oracle.names());
      Encoder enc(oracle.node_count());
      if (cfg.assumptions.no_latents) enc.constrain_sufficiency();
      if (cfg.assumptions.acyclic) enc.constrain_acyclicity();
      for (const auto& k : cfg.background) enc.add_background(k);
      const int top = std::min(encode_source.max_c.value_or(oracle.node_count()), oracle.max_conditioning());
      for (int c = 0; c <= top; ++c) {
        for (const TestSpec& t : oracle.candidates(c)) {
          for (bool a : oracle.answer(t)) enc.encode_relation({t, a});
        }
      }
      std::ostringstream out;
      save_formula(enc, oracle.names(), out);
      emit(out_path, out.str());
      return kExitOk;
    }

    if (query_cmd->parsed()) {
      std::ifstream in(formula_path, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open '" + formula_path + "'");
      SavedFormula saved = load_formula(in);
      const Query q = parse_query(expression, saved.names);
      Discovery d = Discovery::from_encoder(std::move(saved.encoder), query_backend);
      try {
        emit(out_path, std::string(to_string(d.query(q))) + "\n");
      } catch (const Contradiction& e) {
        return contradiction(e.what());
      }
      return kExitOk;
    }

    if (verify_cmd->parsed()) {
      Assumptions assume;
      for (const auto& a : verify_assume) {
        if (a == "acyclic") assume.acyclic = true;
        if (a == "no-latents") assume.no_latents = true;
      }
      Rng rng(seed);
      int mismatches = 0;
      std::ostringstream out;
      for (int i = 0; i < verify_instances; ++i) {
        MixedGraph g = random_graph(verify_n, verify_prob, rng);
        if (assume.no_latents) {
          for (int a = 0; a < verify_n; ++a) {
            for (int b = a + 1; b < verify_n; ++b) g.remove_bidirected(a, b);
          }
        }
        if (assume.acyclic && !is_acyclic(g)) {
          // Keep only edges that agree with the index order.
          for (int a = 0; a < verify_n; ++a) {
            for (int b = 0; b < a; ++b) g.remove_directed(a, b);
          }
        }
        const auto ex = random_experiments(verify_n, verify_experiments, rng);
        DiscoveryConfig cfg;
        cfg.assumptions = assume;
        cfg.track_ancestral = true;
        const EdgeSolution found = discover(OracleSource::from_graph(g, ex), cfg).solution;
        const EdgeSolution expected = consensus(oracle_relations(g, ex), verify_n, assume);
        const bool ok = found == expected;
        if (!ok) ++mismatches;
        out << "instance " << i << (ok ? " agree" : " MISMATCH") << '\n';
      }
      out << "# instances " << verify_instances << " mismatches " << mismatches << '\n';
      emit(out_path, out.str());
      return mismatches == 0 ? kExitOk : kExitUsage;
    }

    if (simulate_cmd->parsed()) {
      harness.seed = seed;
      harness.timeout = seconds_budget(timeout_sec);
      std::string table;
      if (study == "scaling") {
        table = scaling_tsv(run_scaling(parse_int_list(sizes), sim_max_c, harness));
      } else if (study == "identifiability") {
        table = identifiability_tsv(run_identifiability(sim_n > 0 ? sim_n : 8, harness));
      } else {
        table = assumptions_tsv(run_assumption_comparison(sim_n > 0 ? sim_n : 5, harness));
      }
      emit(out_path, table);
      return kExitOk;
    }

    if (solve_cmd->parsed()) {
      std::istringstream in(read_input(dimacs_path));
      const CnfFormula f = read_dimacs(in);
      CdclSolver solver;
      solver.add_clauses(f);
      const SolveOutcome o = solver.solve();
      std::ostringstream out;
      if (!o.satisfiable()) {
        out << "s UNSATISFIABLE\n";
        emit(out_path, out.str());
        return kExitContradiction;
      }
      out << "s SATISFIABLE\nv";
      for (std::uint32_t id = 1; id <= f.var_count(); ++id) {
        out << ' ' << (id < o.model.size() && o.model[id] ? static_cast<long>(id) : -static_cast<long>(id));
      }
      out << " 0\n";
      emit(out_path, out.str());
      return kExitOk;
    }
  } catch (const Contradiction& e) {
    return contradiction(e.what());
  } catch (const Unsatisfiable& e) {
    return contradiction(e.what());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
