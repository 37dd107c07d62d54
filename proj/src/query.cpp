#include <cctype>
#include <string>

#include "causat/discovery.hpp"

namespace causat {

namespace {

struct Token {
  enum class Type { name, symbol, end };
  Type type = Type::end;
  std::string text;
  std::size_t pos = 0;
};

std::vector<Token> tokenize(std::string_view s) {
  static constexpr std::string_view kSymbols[] = {"<->", "->", "<-", "||", "<=", "(", ")", ",", "|", "&", "!", "-"};
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (std::isalnum(c) || c == '_' || c == '.') {
      const std::size_t start = i;
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' || s[i] == '.')) ++i;
      out.push_back({Token::Type::name, std::string(s.substr(start, i - start)), start});
      continue;
    }
    bool matched = false;
    for (std::string_view sym : kSymbols) {
      if (s.substr(i, sym.size()) == sym) {
        out.push_back({Token::Type::symbol, std::string(sym), i});
        i += sym.size();
        matched = true;
        break;
      }
    }
    if (!matched) throw std::invalid_argument("unexpected character '" + std::string(1, s[i]) + "' at " +
                                              std::to_string(i));
  }
  out.push_back({Token::Type::end, "", s.size()});
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& names) : tokens_(tokenize(text)), names_(names) {}

  Query parse() {
    Query q = parse_or();
    if (peek().type != Token::Type::end) fail("unexpected '" + peek().text + "'");
    return q;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)]; }
  bool is(std::string_view sym, std::size_t ahead = 0) const {
    return peek(ahead).type == Token::Type::symbol && peek(ahead).text == sym;
  }
  bool accept(std::string_view sym) {
    if (!is(sym)) return false;
    ++pos_;
    return true;
  }
  void expect(std::string_view sym) {
    if (!accept(sym)) fail("expected '" + std::string(sym) + "'");
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw std::invalid_argument("query: " + why + " at position " + std::to_string(peek().pos));
  }

  int node() {
    if (peek().type != Token::Type::name) fail("expected a node name");
    const std::string& name = peek().text;
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) {
        ++pos_;
        return static_cast<int>(i);
      }
    }
    fail("unknown node '" + name + "'");
  }

  bool keyword(std::string_view word) const { return peek().type == Token::Type::name && peek().text == word; }

  // Names up to '||' or ')'; a lone '-' is the empty set.
  NodeSet node_list() {
    NodeSet out;
    if (accept("-")) return out;
    while (!is("||") && !is(")")) out = out.with(node());
    return out;
  }

  Query parse_or() {
    Query first = parse_and();
    if (!is("|")) return first;
    Query q;
    q.kind = Query::Kind::disjunction;
    q.operands.push_back(std::move(first));
    while (accept("|")) q.operands.push_back(parse_and());
    return q;
  }

  Query parse_and() {
    Query first = parse_unary();
    if (!is("&")) return first;
    Query q;
    q.kind = Query::Kind::conjunction;
    q.operands.push_back(std::move(first));
    while (accept("&")) q.operands.push_back(parse_unary());
    return q;
  }

  Query parse_unary() {
    if (accept("!")) {
      Query q;
      q.kind = Query::Kind::negation;
      q.operands.push_back(parse_unary());
      return q;
    }
    if (accept("(")) {
      Query q = parse_or();
      expect(")");
      return q;
    }
    return parse_atom();
  }

  // a->b, a<-b or a<->b; returns (kind, from, to).
  std::pair<Query::Kind, std::pair<int, int>> edge() {
    const int a = node();
    Query::Kind kind = Query::Kind::directed;
    bool reversed = false;
    if (accept("<-")) {
      reversed = true;
    } else if (accept("<->")) {
      kind = Query::Kind::bidirected;
    } else if (!accept("->")) {
      fail("expected an edge arrow");
    }
    const int b = node();
    if (a == b) fail("an edge needs two distinct nodes");
    return {kind, reversed ? std::pair(b, a) : std::pair(a, b)};
  }

  Query parse_atom() {
    Query q;
    if (keyword("true") || keyword("false")) {
      q.kind = Query::Kind::constant;
      q.value = peek().text == "true";
      ++pos_;
      return q;
    }
    if (is("(", 1) && peek().type == Token::Type::name) {
      const std::string fn = peek().text;
      ++pos_;
      expect("(");
      if (fn == "anc") {
        q.kind = Query::Kind::ancestral;
        q.x = node();
        accept(",");
        q.y = node();
      } else if (fn == "con" || fn == "sep") {
        q.kind = Query::Kind::connected;
        q.spec.x = node();
        accept(",");
        q.spec.y = node();
        if (accept("|")) q.spec.conditioning = node_list();
        if (accept("||")) q.spec.intervention = node_list();
        if (q.spec.x == q.spec.y || q.spec.conditioning.contains(q.spec.x) || q.spec.conditioning.contains(q.spec.y)) {
          fail("malformed test");
        }
        if (fn == "sep") {
          Query neg;
          neg.kind = Query::Kind::negation;
          neg.operands.push_back(std::move(q));
          expect(")");
          return neg;
        }
      } else if (fn == "path") {
        q.kind = Query::Kind::walk;
        const int from = node();
        accept(",");
        const int to = node();
        q.stops.push_back(from);
        if (keyword("via")) {
          ++pos_;
          while (peek().type == Token::Type::name && !keyword("len")) q.stops.push_back(node());
        }
        q.stops.push_back(to);
        if (keyword("len")) {
          ++pos_;
          expect("<=");
          if (peek().type != Token::Type::name) fail("expected a length");
          try {
            q.max_length = std::stoi(peek().text);
          } catch (const std::exception&) {
            fail("expected a length");
          }
          ++pos_;
        }
      } else if (fn == "exactly") {
        q.kind = Query::Kind::exactly;
        while (!is(")")) {
          auto [kind, ends] = edge();
          (kind == Query::Kind::directed ? q.directed_edges : q.bidirected_edges).push_back(ends);
          if (!accept(",")) break;
        }
      } else {
        fail("unknown function '" + fn + "'");
      }
      expect(")");
      return q;
    }
    auto [kind, ends] = edge();
    q.kind = kind;
    q.x = ends.first;
    q.y = ends.second;
    return q;
  }

  std::vector<Token> tokens_;
  const std::vector<std::string>& names_;
  std::size_t pos_ = 0;
};

}  // namespace

Query parse_query(std::string_view text, const std::vector<std::string>& names) {
  return Parser(text, names).parse();
}

}  // namespace causat
