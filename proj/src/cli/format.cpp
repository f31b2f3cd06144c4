#include <array>
#include <charconv>
#include <optional>
#include <set>

#include "maidkit/cli.hpp"

namespace maidkit::cli {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : MaidError(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

struct Token {
  std::string text;
  std::size_t line;
  std::size_t column;
};

bool is_punct(char c) { return c == '{' || c == '}' || c == ';'; }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t i = 0;
  auto advance = [&] {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
    ++i;
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance();
    } else if (is_space(c)) {
      advance();
    } else if (is_punct(c)) {
      tokens.push_back({std::string(1, c), line, column});
      advance();
    } else {
      Token tok{"", line, column};
      while (i < text.size() && !is_space(text[i]) && !is_punct(text[i]) &&
             text[i] != '#') {
        tok.text.push_back(text[i]);
        advance();
      }
      tokens.push_back(std::move(tok));
    }
  }
  tokens.push_back({"", line, column});  // end marker
  return tokens;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  Maid parse() {
    while (!at_end()) statement();
    return Maid(std::move(agents_), std::move(nodes_));
  }

 private:
  bool at_end() const { return pos_ + 1 == tokens_.size(); }
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() {
    const Token& t = tokens_[pos_];
    if (!at_end()) ++pos_;
    return t;
  }

  [[noreturn]] void fail(const Token& at, const std::string& message) const {
    throw ParseError(at.line, at.column, message);
  }

  static std::string describe(const Token& t) {
    return t.text.empty() ? "end of input" : "'" + t.text + "'";
  }

  void expect(std::string_view punct) {
    const Token& t = next();
    if (t.text != punct) {
      fail(t, "expected '" + std::string(punct) + "', found " + describe(t));
    }
  }

  const Token& ident(std::string_view what) {
    const Token& t = next();
    if (t.text.empty() || is_punct(t.text[0])) {
      fail(t, "expected " + std::string(what) + ", found " + describe(t));
    }
    return t;
  }

  void statement() {
    const Token& head = next();
    if (head.text == "agent") {
      agents_.insert(ident("agent name").text);
      expect(";");
      return;
    }
    Node node;
    if (head.text == "chance") {
      node.kind = NodeKind::Chance;
    } else if (head.text == "decision") {
      node.kind = NodeKind::Decision;
    } else if (head.text == "utility") {
      node.kind = NodeKind::Utility;
    } else {
      fail(head, "expected 'agent', 'chance', 'decision' or 'utility', found " +
                     describe(head));
    }
    const Token& name = ident("node id");
    if (!ids_.insert(name.text).second) {
      fail(name, "duplicate node id '" + name.text + "'");
    }
    node.id = name.text;
    expect("{");
    std::set<std::string> seen;
    while (peek().text != "}") {
      const Token& clause = next();
      if (clause.text.empty()) fail(clause, "unterminated block for '" + node.id + "'");
      if (!seen.insert(clause.text).second) {
        fail(clause, "repeated '" + clause.text + "' clause in '" + node.id + "'");
      }
      if (clause.text == "agent") {
        node.owner = ident("agent name").text;
        expect(";");
      } else if (clause.text == "domain") {
        node.domain = words();
        if (node.domain.empty()) fail(clause, "empty domain for '" + node.id + "'");
      } else if (clause.text == "parents") {
        node.parents = words();
      } else if (clause.text == "cpt") {
        node.cpt = numbers(clause, node.id);
      } else if (clause.text == "table") {
        node.table = numbers(clause, node.id);
      } else {
        fail(clause, "unknown clause " + describe(clause));
      }
    }
    expect("}");
    nodes_.push_back(std::move(node));
  }

  // Words up to and including the terminating ';'.
  std::vector<std::string> words() {
    std::vector<std::string> out;
    while (peek().text != ";") out.push_back(ident("identifier or ';'").text);
    expect(";");
    return out;
  }

  std::vector<double> numbers(const Token& clause, const std::string& id) {
    std::vector<double> out;
    while (peek().text != ";") {
      const Token& t = ident("number or ';'");
      double value = 0.0;
      const char* first = t.text.data();
      const char* last = first + t.text.size();
      if (*first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || ptr != last) fail(t, "invalid number '" + t.text + "'");
      out.push_back(value);
    }
    expect(";");
    if (out.empty()) fail(clause, "empty '" + clause.text + "' for '" + id + "'");
    return out;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::set<AgentId> agents_;
  std::vector<Node> nodes_;
  std::set<std::string> ids_;
};

std::string format_number(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

}  // namespace

Maid parse(std::string_view text) { return Parser(text).parse(); }

std::string render(const Maid& maid) {
  std::string out;
  for (const AgentId& agent : maid.agents()) out += "agent " + agent + ";\n";
  for (const Node& node : maid.nodes()) {
    out += "\n";
    out += node.kind == NodeKind::Chance     ? "chance "
           : node.kind == NodeKind::Decision ? "decision "
                                             : "utility ";
    out += node.id + " {\n";
    if (!node.owner.empty()) out += "  agent " + node.owner + ";\n";
    auto list = [&out](std::string_view key, const auto& items, auto fmt) {
      out += "  ";
      out += key;
      for (const auto& item : items) out += " " + fmt(item);
      out += ";\n";
    };
    auto same = [](const std::string& s) { return s; };
    if (!node.domain.empty()) list("domain", node.domain, same);
    if (!node.parents.empty()) list("parents", node.parents, same);
    if (node.cpt) list("cpt", *node.cpt, format_number);
    if (node.table) list("table", *node.table, format_number);
    out += "}\n";
  }
  return out;
}

}  // namespace maidkit::cli
