#include "causat/formats.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace causat {

ParseError::ParseError(int line, const std::string& reason)
    : std::runtime_error("line " + std::to_string(line) + ": " + reason), line_(line) {}

namespace {

constexpr std::string_view kSymbols[] = {"<->", "->", "||", "|", "<="};

std::vector<std::string> split_tokens(std::string_view line) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      flush();
      ++i;
      continue;
    }
    bool symbol = false;
    for (std::string_view s : kSymbols) {
      if (line.substr(i, s.size()) == s) {
        flush();
        out.emplace_back(s);
        i += s.size();
        symbol = true;
        break;
      }
    }
    if (!symbol) current += line[i++];
  }
  flush();
  return out;
}

struct Line {
  int number;
  std::vector<std::string> tokens;
};

// Non-blank, non-comment lines, tokenized.
std::vector<Line> lines_of(std::string_view text) {
  std::vector<Line> out;
  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    std::string_view raw = text.substr(start, end - start);
    const std::size_t first = raw.find_first_not_of(" \t\r");
    if (first != std::string_view::npos && raw[first] != '#') out.push_back({number, split_tokens(raw)});
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

class NameIndex {
 public:
  NameIndex(const std::vector<std::string>& names, int line) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (!index_.emplace(names[i], static_cast<int>(i)).second) {
        throw ParseError(line, "duplicate node name '" + names[i] + "'");
      }
    }
  }
  int at(const std::string& name, int line) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ParseError(line, "unknown node '" + name + "'");
    return it->second;
  }

 private:
  std::unordered_map<std::string, int> index_;
};

std::vector<std::string> header_names(const Line& l) {
  std::vector<std::string> names(l.tokens.begin() + 1, l.tokens.end());
  if (names.empty()) throw ParseError(l.number, "empty node list");
  if (names.size() > static_cast<std::size_t>(kMaxNodes)) throw ParseError(l.number, "too many nodes");
  for (const auto& n : names) {
    if (n == "-" || n.find_first_of("|:#") != std::string::npos) {
      throw ParseError(l.number, "invalid node name '" + n + "'");
    }
  }
  return names;
}

// Reads a node set from tokens [pos, end) up to a token in `stops`.
NodeSet read_set(const Line& l, std::size_t& pos, const NameIndex& names, std::initializer_list<std::string_view> stops) {
  NodeSet out;
  auto stopped = [&] {
    return pos >= l.tokens.size() || std::find(stops.begin(), stops.end(), l.tokens[pos]) != stops.end();
  };
  if (!stopped() && l.tokens[pos] == "-") {
    ++pos;
    if (!stopped()) throw ParseError(l.number, "'-' must stand alone");
    return out;
  }
  while (!stopped()) {
    const int v = names.at(l.tokens[pos], l.number);
    if (out.contains(v)) throw ParseError(l.number, "node '" + l.tokens[pos] + "' listed twice");
    out = out.with(v);
    ++pos;
  }
  return out;
}

std::string set_text(const std::vector<std::string>& names, NodeSet s) {
  if (s.empty()) return "-";
  std::string out;
  for (int v : s) {
    if (!out.empty()) out += ' ';
    out += names.at(v);
  }
  return out;
}

Status status_word(const Line& l, const std::string& word) {
  if (word == "present") return Status::present;
  if (word == "absent") return Status::absent;
  throw ParseError(l.number, "expected present or absent, got '" + word + "'");
}

}  // namespace

std::vector<std::string> parse_names(std::string_view text) {
  Line l{1, split_tokens(text)};
  l.tokens.insert(l.tokens.begin(), "nodes:");
  auto names = header_names(l);
  NameIndex check(names, 1);
  return names;
}

// Graphs -----------------------------------------------------------------------

MixedGraph parse_graph(std::string_view text) {
  std::optional<MixedGraph> g;
  std::optional<NameIndex> index;
  for (const Line& l : lines_of(text)) {
    const auto& t = l.tokens;
    if (t[0] == "nodes:") {
      if (g) throw ParseError(l.number, "second nodes line");
      auto names = header_names(l);
      index.emplace(names, l.number);
      g.emplace(std::move(names));
    } else if (t[0] == "edge") {
      if (!g) throw ParseError(l.number, "edge before nodes line");
      if (t.size() != 4 || (t[2] != "->" && t[2] != "<->")) {
        throw ParseError(l.number, "expected 'edge a -> b' or 'edge a <-> b'");
      }
      const int a = index->at(t[1], l.number);
      const int b = index->at(t[3], l.number);
      if (a == b) throw ParseError(l.number, "self-loops are not allowed");
      if (t[2] == "->") {
        g->add_directed(a, b);
      } else {
        g->add_bidirected(a, b);
      }
    } else {
      throw ParseError(l.number, "unexpected '" + t[0] + "'");
    }
  }
  if (!g) throw ParseError(1, "missing nodes line");
  return *g;
}

std::string print_graph(const MixedGraph& g) {
  std::string out = "nodes:";
  for (const auto& n : g.names()) out += " " + n;
  out += '\n';
  for (int a = 0; a < g.size(); ++a) {
    for (int b : g.children(a)) out += "edge " + g.name(a) + " -> " + g.name(b) + "\n";
  }
  for (int a = 0; a < g.size(); ++a) {
    for (int b : g.spouses(a)) {
      if (a < b) out += "edge " + g.name(a) + " <-> " + g.name(b) + "\n";
    }
  }
  return out;
}

// Relations ----------------------------------------------------------------------

RelationSet parse_relations(std::string_view text, const std::optional<std::vector<std::string>>& names) {
  RelationSet out;
  std::optional<NameIndex> index;
  if (names) {
    out.names = *names;
    index.emplace(out.names, 0);
  }
  bool header_seen = false;
  for (const Line& l : lines_of(text)) {
    const auto& t = l.tokens;
    if (t[0] == "nodes:") {
      if (header_seen) throw ParseError(l.number, "second nodes line");
      header_seen = true;
      auto listed = header_names(l);
      if (names) {
        auto a = listed, b = *names;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b) throw ParseError(l.number, "nodes line disagrees with the given node names");
        continue;
      }
      if (!out.relations.empty()) throw ParseError(l.number, "nodes line after relations");
      out.names = std::move(listed);
      index.emplace(out.names, l.number);
      continue;
    }
    if (t[0] != "sep" && t[0] != "con") throw ParseError(l.number, "expected sep or con, got '" + t[0] + "'");
    if (!index) throw ParseError(l.number, "node universe not specified (add a nodes: line or pass names)");
    if (t.size() < 3) throw ParseError(l.number, "expected two endpoints");
    Relation r;
    r.connected = t[0] == "con";
    r.spec.x = index->at(t[1], l.number);
    r.spec.y = index->at(t[2], l.number);
    std::size_t pos = 3;
    if (pos < t.size()) {
      if (t[pos] != "|") throw ParseError(l.number, "expected '|'");
      ++pos;
      r.spec.conditioning = read_set(l, pos, *index, {"||"});
      if (pos < t.size()) {
        ++pos;  // "||"
        r.spec.intervention = read_set(l, pos, *index, {});
      }
    }
    if (r.spec.x == r.spec.y) throw ParseError(l.number, "endpoints must differ");
    if (r.spec.conditioning.contains(r.spec.x) || r.spec.conditioning.contains(r.spec.y)) {
      throw ParseError(l.number, "conditioning set contains an endpoint");
    }
    out.relations.push_back(r);
  }
  if (!index) throw ParseError(1, "node universe not specified");
  return out;
}

std::string print_relation(const std::vector<std::string>& names, const Relation& r) {
  return std::string(r.connected ? "con " : "sep ") + names.at(r.spec.x) + " " + names.at(r.spec.y) + " | " +
         set_text(names, r.spec.conditioning) + " || " + set_text(names, r.spec.intervention);
}

std::string print_relations(const std::vector<std::string>& names, const std::vector<Relation>& relations) {
  std::string out = "nodes:";
  for (const auto& n : names) out += " " + n;
  out += '\n';
  for (const Relation& r : relations) out += print_relation(names, r) + "\n";
  return out;
}

// Knowledge ----------------------------------------------------------------------

Knowledge parse_knowledge(std::string_view text, const std::vector<std::string>& names) {
  using Kind = BackgroundConstraint::Kind;
  const NameIndex index(names, 0);
  Knowledge out;
  for (const Line& l : lines_of(text)) {
    const auto& t = l.tokens;
    if (t[0] == "assume") {
      if (t.size() != 2) throw ParseError(l.number, "expected 'assume acyclic' or 'assume no-latents'");
      if (t[1] == "acyclic") {
        out.assumptions.acyclic = true;
      } else if (t[1] == "no-latents") {
        out.assumptions.no_latents = true;
      } else {
        throw ParseError(l.number, "unknown assumption '" + t[1] + "'");
      }
      continue;
    }
    if (t[0] != "know" || t.size() < 2) throw ParseError(l.number, "expected know or assume");
    BackgroundConstraint k;
    const bool present = status_word(l, t.back()) == Status::present;
    if (t[1] == "edge") {
      if (t.size() != 6 || (t[3] != "->" && t[3] != "<->")) {
        throw ParseError(l.number, "expected 'know edge a -> b present|absent'");
      }
      k.kind = present ? Kind::edge_present : Kind::edge_absent;
      k.x = index.at(t[2], l.number);
      k.y = index.at(t[4], l.number);
      k.bidirected = t[3] == "<->";
    } else if (t[1] == "ancestral") {
      if (t.size() != 5) throw ParseError(l.number, "expected 'know ancestral a b present|absent'");
      k.kind = present ? Kind::ancestral_present : Kind::ancestral_absent;
      k.x = index.at(t[2], l.number);
      k.y = index.at(t[3], l.number);
    } else if (t[1] == "path") {
      if (t.size() < 5) throw ParseError(l.number, "expected 'know path a b [via ...] [len <= L] present|absent'");
      k.kind = present ? Kind::path_present : Kind::path_absent;
      k.x = index.at(t[2], l.number);
      k.y = index.at(t[3], l.number);
      std::size_t pos = 4;
      const std::size_t last = t.size() - 1;
      if (pos < last && t[pos] == "via") {
        ++pos;
        while (pos < last && t[pos] != "len") k.waypoints.push_back(index.at(t[pos++], l.number));
        if (k.waypoints.empty()) throw ParseError(l.number, "empty waypoint list");
      }
      if (pos < last && t[pos] == "len") {
        if (pos + 3 != last || t[pos + 1] != "<=") throw ParseError(l.number, "expected 'len <= L'");
        int bound = 0;
        const std::string& num = t[pos + 2];
        const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), bound);
        if (ec != std::errc() || ptr != num.data() + num.size() || bound < 1) {
          throw ParseError(l.number, "bad length '" + num + "'");
        }
        k.max_length = bound;
        pos += 3;
      }
      if (pos != last) throw ParseError(l.number, "unexpected '" + t[pos] + "'");
    } else {
      throw ParseError(l.number, "unknown knowledge kind '" + t[1] + "'");
    }
    if (k.x == k.y) throw ParseError(l.number, "endpoints must differ");
    out.background.push_back(std::move(k));
  }
  return out;
}

std::string print_knowledge(const std::vector<std::string>& names, const Knowledge& k) {
  using Kind = BackgroundConstraint::Kind;
  std::string out;
  if (k.assumptions.acyclic) out += "assume acyclic\n";
  if (k.assumptions.no_latents) out += "assume no-latents\n";
  for (const BackgroundConstraint& b : k.background) {
    const bool present = b.kind == Kind::edge_present || b.kind == Kind::ancestral_present ||
                         b.kind == Kind::path_present;
    out += "know ";
    switch (b.kind) {
      case Kind::edge_present:
      case Kind::edge_absent:
        out += "edge " + names.at(b.x) + (b.bidirected ? " <-> " : " -> ") + names.at(b.y);
        break;
      case Kind::ancestral_present:
      case Kind::ancestral_absent:
        out += "ancestral " + names.at(b.x) + " " + names.at(b.y);
        break;
      case Kind::path_present:
      case Kind::path_absent:
        out += "path " + names.at(b.x) + " " + names.at(b.y);
        if (!b.waypoints.empty()) {
          out += " via";
          for (int w : b.waypoints) out += " " + names.at(w);
        }
        if (b.max_length) out += " len <= " + std::to_string(*b.max_length);
        break;
    }
    out += present ? " present\n" : " absent\n";
  }
  return out;
}

// Experiments ------------------------------------------------------------------

std::vector<Experiment> parse_experiments(std::string_view text, const std::vector<std::string>& names) {
  const NameIndex index(names, 0);
  std::vector<Experiment> out;
  for (const Line& l : lines_of(text)) {
    const auto& t = l.tokens;
    if (t[0] != "experiment" || t.size() < 2 || t[1] != "J:") {
      throw ParseError(l.number, "expected 'experiment J: ... U: ...'");
    }
    std::size_t pos = 2;
    Experiment e;
    e.intervened = read_set(l, pos, index, {"U:"});
    if (pos >= t.size()) throw ParseError(l.number, "missing 'U:'");
    ++pos;
    const NodeSet observed = read_set(l, pos, index, {});
    if (!(observed & e.intervened).empty()) throw ParseError(l.number, "a node is both intervened and observed");
    e.nodes = observed | e.intervened;
    out.push_back(e);
  }
  return out;
}

std::string print_experiments(const std::vector<std::string>& names, const std::vector<Experiment>& experiments) {
  std::string out;
  for (const Experiment& e : experiments) {
    out += "experiment J: " + set_text(names, e.intervened) + " U: " + set_text(names, e.passive()) + "\n";
  }
  return out;
}

std::string print_solution(const std::vector<std::string>& names, const EdgeSolution& s, bool ancestral) {
  std::string out;
  const int n = s.node_count();
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a != b) out += "dir " + names.at(a) + " " + names.at(b) + " " + std::string(to_string(s.directed(a, b))) + "\n";
    }
  }
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      out += "bidir " + names.at(a) + " " + names.at(b) + " " + std::string(to_string(s.bidirected(a, b))) + "\n";
    }
  }
  if (ancestral) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a != b) out += "anc " + names.at(a) + " " + names.at(b) + " " + std::string(to_string(s.ancestral(a, b))) + "\n";
      }
    }
  }
  return out;
}

// Saved formulas -----------------------------------------------------------------

namespace {

constexpr std::string_view kFormulaMagic = "c causat-formula 1";

}  // namespace

void save_formula(const Encoder& enc, const std::vector<std::string>& names, std::ostream& out) {
  const VarTable& table = enc.table();
  out << kFormulaMagic << '\n' << "c nodes";
  for (const auto& n : names) out << ' ' << n;
  out << '\n';
  for (std::uint32_t id = 1; id <= table.size(); ++id) {
    const VarKey& k = table.key(PropVar{id});
    out << "c var " << id << ' ';
    switch (k.role) {
      case VarRole::directed:
        out << "dir " << int{k.x} << ' ' << int{k.y};
        break;
      case VarRole::bidirected:
        out << "bidir " << int{k.x} << ' ' << int{k.y};
        break;
      case VarRole::relation:
        out << "rel " << int{k.x} << ' ' << int{k.y} << ' ' << k.conditioning.bits() << ' ' << k.intervention.bits();
        break;
      case VarRole::path:
        out << "path " << int{k.x} << ' ' << int{k.y} << ' ' << k.length << ' ' << static_cast<int>(k.from_mark) << ' '
            << static_cast<int>(k.to_mark) << ' ' << k.conditioning.bits() << ' ' << k.intervention.bits();
        break;
      case VarRole::conjunction:
      case VarRole::disjunction:
        out << (k.role == VarRole::conjunction ? "and" : "or");
        for (Lit l : table.definition(PropVar{id})) out << ' ' << l.dimacs();
        break;
    }
    out << '\n';
  }
  for (const auto& r : enc.context_records()) {
    out << "c ctx " << r.conditioning.bits() << ' ' << r.intervention.bits() << ' ' << r.target << ' ' << r.length
        << '\n';
  }
  write_dimacs(enc.formula(), out);
}

SavedFormula load_formula(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::istringstream lines(text);
  std::string line;
  int number = 0;
  if (!std::getline(lines, line) || (++number, line != kFormulaMagic)) {
    throw ParseError(1, "not a saved causat formula");
  }
  std::vector<std::string> names;
  VarTable table;
  std::vector<Encoder::ContextRecord> records;
  while (std::getline(lines, line)) {
    ++number;
    if (line.rfind("c ", 0) != 0) break;
    std::istringstream ls(line.substr(2));
    std::string word;
    ls >> word;
    if (word == "nodes") {
      std::string n;
      while (ls >> n) names.push_back(n);
    } else if (word == "var") {
      std::uint32_t id = 0;
      std::string role;
      ls >> id >> role;
      VarKey key;
      std::vector<Lit> def;
      int x = 0, y = 0;
      std::uint32_t c = 0, j = 0;
      if (role == "dir") {
        ls >> x >> y;
        key = VarKey::directed(x, y);
      } else if (role == "bidir") {
        ls >> x >> y;
        key = VarKey::bidirected(x, y);
      } else if (role == "rel") {
        ls >> x >> y >> c >> j;
        key = VarKey::relation(TestSpec{x, y, NodeSet(c), NodeSet(j)});
      } else if (role == "path") {
        int len = 0, fm = 0, tm = 0;
        ls >> x >> y >> len >> fm >> tm >> c >> j;
        key = VarKey::path(x, y, len, static_cast<Mark>(fm), static_cast<Mark>(tm), NodeSet(c), NodeSet(j));
      } else if (role == "and" || role == "or") {
        key.role = role == "and" ? VarRole::conjunction : VarRole::disjunction;
        std::int32_t code;
        while (ls >> code) def.push_back(Lit::from_dimacs(code));
      } else {
        throw ParseError(number, "unknown variable role '" + role + "'");
      }
      if (ls.fail() && !ls.eof()) throw ParseError(number, "malformed variable line");
      try {
        table.restore(PropVar{id}, key, def);
      } catch (const std::exception& e) {
        throw ParseError(number, e.what());
      }
    } else if (word == "ctx") {
      std::uint32_t c = 0, j = 0;
      Encoder::ContextRecord r;
      if (!(ls >> c >> j >> r.target >> r.length)) throw ParseError(number, "malformed context line");
      r.conditioning = NodeSet(c);
      r.intervention = NodeSet(j);
      records.push_back(r);
    }
  }
  if (names.empty()) throw ParseError(2, "saved formula lists no nodes");
  std::istringstream body(text);
  CnfFormula f;
  try {
    f = read_dimacs(body);
  } catch (const std::exception& e) {
    throw ParseError(number, e.what());
  }
  const int n = static_cast<int>(names.size());
  return SavedFormula{names, Encoder::restore(n, std::move(table), std::move(f), records)};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace causat
