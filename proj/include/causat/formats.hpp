#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "causat/encoder.hpp"
#include "causat/graph.hpp"
#include "causat/solution.hpp"

namespace causat {

/// Malformed text input; the message starts with "line N: ".
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& reason);
  int line() const { return line_; }

 private:
  int line_;
};

// Graphs:
//   nodes: a b c
//   edge a -> b
//   edge a <-> c
// Lines starting with '#' and blank lines are ignored everywhere.
MixedGraph parse_graph(std::string_view text);
std::string print_graph(const MixedGraph& g);

// Relations: "sep x y | c1 c2 || j1 j2" or "con ...", '-' for an empty set.
// An optional "nodes:" line fixes the universe; otherwise `names` must.
struct RelationSet {
  std::vector<std::string> names;
  std::vector<Relation> relations;
};
RelationSet parse_relations(std::string_view text, const std::optional<std::vector<std::string>>& names = std::nullopt);
std::string print_relation(const std::vector<std::string>& names, const Relation& r);
std::string print_relations(const std::vector<std::string>& names, const std::vector<Relation>& relations);

// Knowledge:
//   know edge x -> y present|absent
//   know edge x <-> y present|absent
//   know ancestral x y present|absent
//   know path x y [via a b] [len <= L] present|absent
//   assume acyclic | assume no-latents
struct Knowledge {
  std::vector<BackgroundConstraint> background;
  Assumptions assumptions;
};
Knowledge parse_knowledge(std::string_view text, const std::vector<std::string>& names);
std::string print_knowledge(const std::vector<std::string>& names, const Knowledge& k);

// Experiments: "experiment J: a b U: c d", '-' for an empty set.
std::vector<Experiment> parse_experiments(std::string_view text, const std::vector<std::string>& names);
std::string print_experiments(const std::vector<std::string>& names, const std::vector<Experiment>& experiments);

/// One line per item: "dir x y <status>", "bidir x y <status>", and with
/// `ancestral` also "anc x y <status>".
std::string print_solution(const std::vector<std::string>& names, const EdgeSolution& s, bool ancestral);

/// Whitespace-separated node names, all distinct.
std::vector<std::string> parse_names(std::string_view text);

/// DIMACS with "c" comment lines recording node names, the meaning of every
/// variable and the encoded walk contexts, so that the encoder can be
/// rebuilt for later queries.
void save_formula(const Encoder& enc, const std::vector<std::string>& names, std::ostream& out);
struct SavedFormula {
  std::vector<std::string> names;
  Encoder encoder;
};
SavedFormula load_formula(std::istream& in);

std::string read_text_file(const std::string& path);

}  // namespace causat
