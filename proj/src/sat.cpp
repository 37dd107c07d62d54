#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "causat/sat.hpp"

namespace causat {

void SatBackend::add_clauses(const CnfFormula& f, std::size_t from) {
  for (std::size_t i = from; i < f.clause_count(); ++i) add_clause(f.clause(i));
}

ExternalSolver::ExternalSolver(std::string command) : command_(std::move(command)) {
  if (command_.empty()) throw std::invalid_argument("empty external solver command");
}

void ExternalSolver::add_clause(std::span<const Lit> clause) { clauses_.add_clause(clause); }

namespace {

class TempFile {
 public:
  TempFile() {
    std::string pattern = (std::filesystem::temp_directory_path() / "causat-XXXXXX.cnf").string();
    const int fd = mkstemps(pattern.data(), 4);
    if (fd < 0) throw std::runtime_error("cannot create temporary file");
    ::close(fd);
    path_ = pattern;
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

SolveOutcome ExternalSolver::solve_under(std::span<const Lit> assumptions) {
  ++stats_.solves;
  CnfFormula copy = clauses_;
  for (Lit a : assumptions) copy.add_clause({a});
  TempFile file;
  {
    std::ofstream out(file.path());
    write_dimacs(copy, out);
  }
  const std::string cmd = command_ + " " + shell_quote(file.path()) + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("cannot run external solver: " + command_);
  std::string text;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) text.append(buf, n);
  ::pclose(pipe);
  return parse_solver_output(text, copy.var_count());
}

SolveOutcome parse_solver_output(const std::string& text, std::uint32_t var_count) {
  SolveOutcome out;
  std::istringstream in(text);
  std::string line;
  bool verdict = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "SAT" || line == "s SATISFIABLE" || line == "SATISFIABLE") {
      out.status = SolveStatus::satisfiable;
      out.model.assign(var_count + 1, false);
      verdict = true;
    } else if (line == "UNSAT" || line == "s UNSATISFIABLE" || line == "UNSATISFIABLE") {
      out.status = SolveStatus::unsatisfiable;
      verdict = true;
    } else if (verdict && out.satisfiable() && !line.empty() && line[0] != 'c') {
      std::istringstream ls(line[0] == 'v' ? line.substr(1) : line);
      long long code;
      while (ls >> code) {
        if (code == 0) break;
        const auto id = static_cast<std::size_t>(code < 0 ? -code : code);
        if (id < out.model.size()) out.model[id] = code > 0;
      }
    }
  }
  if (!verdict) throw std::runtime_error("external solver produced no verdict");
  return out;
}

std::unique_ptr<SatBackend> make_backend(const std::string& spec) {
  if (spec.empty() || spec == "embedded") return std::make_unique<CdclSolver>();
  constexpr std::string_view prefix = "external:";
  if (spec.rfind(prefix, 0) == 0) return std::make_unique<ExternalSolver>(spec.substr(prefix.size()));
  throw std::invalid_argument("unknown backend '" + spec + "'");
}

BackboneResult backbone(SatBackend& solver, std::span<const PropVar> candidates,
                        const BackboneOptions& options) {
  BackboneResult result;
  ++result.sat_calls;
  const SolveOutcome first = solver.solve();
  if (first.status == SolveStatus::interrupted) throw Interrupted("backbone: deadline reached");
  if (!first.satisfiable()) throw Unsatisfiable("formula is unsatisfiable");

  auto value_in = [](const SolveOutcome& o, PropVar v) {
    return v.id < o.model.size() && o.model[v.id];
  };

  // 0 undecided, 1 fixed, 2 free
  std::vector<std::uint8_t> state(candidates.size(), 0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (state[i] != 0) continue;
    const PropVar v = candidates[i];
    const bool seen_value = value_in(first, v);
    const Lit flipped{v, seen_value};  // v assumed at the opposite value
    ++result.sat_calls;
    const SolveOutcome other = solver.solve_under(std::span<const Lit>(&flipped, 1));
    if (other.status == SolveStatus::interrupted) throw Interrupted("backbone: deadline reached");
    if (!other.satisfiable()) {
      state[i] = 1;
      const Lit unit = ~flipped;
      if (options.commit_units) solver.add_clause(std::span<const Lit>(&unit, 1));
      continue;
    }
    state[i] = 2;
    if (options.model_filtering) {
      for (std::size_t k = i + 1; k < candidates.size(); ++k) {
        if (state[k] == 0 && value_in(other, candidates[k]) != value_in(first, candidates[k])) state[k] = 2;
      }
    }
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (state[i] == 1) {
      result.fixed.push_back(Lit{candidates[i], !value_in(first, candidates[i])});
    } else {
      result.free.push_back(candidates[i]);
    }
  }
  return result;
}

}  // namespace causat
