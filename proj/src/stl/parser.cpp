#include "stlcbot/stl/parser.hpp"

#include <cctype>
#include <cstdlib>
#include <string>
#include <vector>

namespace stlcbot::stl {

ParseError::ParseError(const std::string& what, int line, int column)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Formula parse() {
    Formula f = parse_or();
    skip_ws();
    if (pos_ < text_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { fail_at(what, pos_); }

  [[noreturn]] void fail_at(const std::string& what, std::size_t at) const {
    int line = 1;
    int col = 1;
    for (std::size_t k = 0; k < at && k < text_.size(); ++k) {
      if (text_[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(what, line, col);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  std::string peek_word() {
    skip_ws();
    std::size_t end = pos_;
    while (end < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) ++end;
    return std::string(text_.substr(pos_, end - pos_));
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    std::size_t end = pos_;
    auto digit = [&](std::size_t k) { return k < text_.size() && std::isdigit(static_cast<unsigned char>(text_[k])); };
    if (end < text_.size() && (text_[end] == '-' || text_[end] == '+')) ++end;
    while (digit(end)) ++end;
    if (end < text_.size() && text_[end] == '.') {
      ++end;
      while (digit(end)) ++end;
    }
    if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < text_.size() && (text_[e] == '-' || text_[e] == '+')) ++e;
      if (digit(e)) {
        end = e;
        while (digit(end)) ++end;
      }
    }
    const std::string tok(text_.substr(start, end - start));
    if (tok.empty() || tok == "-" || tok == "+" || tok == "." ) fail("expected a number");
    char* stop = nullptr;
    const double v = std::strtod(tok.c_str(), &stop);
    if (stop != tok.c_str() + tok.size()) fail_at("malformed number '" + tok + "'", start);
    pos_ = end;
    return v;
  }

  int index() {
    skip_ws();
    const std::size_t start = pos_;
    const double v = number();
    if (v < 0 || v != static_cast<double>(static_cast<int>(v))) fail_at("expected a robot index", start);
    return static_cast<int>(v);
  }

  Interval interval() {
    const std::size_t start = (skip_ws(), pos_);
    expect('[');
    const double a = number();
    expect(',');
    const double b = number();
    expect(']');
    if (a < 0) fail_at("malformed interval: a must be >= 0", start);
    if (a > b) fail_at("malformed interval: a > b", start);
    return {a, b};
  }

  Formula parse_or() {
    Formula f = parse_and();
    while (accept('|')) f = Formula::disjunction(f, parse_and());
    return f;
  }

  Formula parse_and() {
    Formula f = parse_until();
    while (accept('&')) f = Formula::conjunction(f, parse_until());
    return f;
  }

  Formula parse_until() {
    Formula f = parse_unary();
    if (peek('U')) {
      ++pos_;
      const Interval iv = interval();
      Formula rhs = parse_unary();
      return Formula::until(iv, f, rhs);
    }
    return f;
  }

  Formula parse_unary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of formula");
    if (accept('!')) return Formula::negation(parse_unary());
    if (accept('(')) {
      Formula f = parse_or();
      expect(')');
      return f;
    }
    const std::size_t start = pos_;
    const std::string word = peek_word();
    if (word == "G" || word == "F") {
      pos_ += 1;
      const Interval iv = interval();
      Formula body = parse_unary();
      return word == "G" ? Formula::always(iv, body) : Formula::eventually(iv, body);
    }
    if (word == "true") {
      pos_ += word.size();
      return Formula::truth();
    }
    if (word == "agent") {
      pos_ += word.size();
      expect('(');
      const int i = index();
      expect(')');
      expect(':');
      Formula body = parse_unary();
      if (body.has_agent_atoms()) fail_at("agent atoms cannot be nested", start);
      return Formula::agent(i, body);
    }
    if (word.empty()) fail("expected a formula");
    return atom(word, start);
  }

  Formula atom(const std::string& word, std::size_t start) {
    pos_ += word.size();
    std::vector<double> args;
    expect('(');
    const std::size_t args_at = pos_;
    args.push_back(number());
    while (accept(',')) args.push_back(number());
    expect(')');
    auto arity = [&](std::size_t n) {
      if (args.size() != n) fail_at(word + " expects " + std::to_string(n) + " arguments", args_at);
    };
    auto robot = [&](double v) {
      if (v < 0 || v != static_cast<double>(static_cast<int>(v))) fail_at("expected a robot index", args_at);
      return static_cast<int>(v);
    };
    const char cmp = word == "goal" ? '<' : '>';
    skip_ws();
    if (!accept(cmp)) fail(std::string("expected '") + cmp + "' after " + word + "(...)");
    const double c = number();
    Predicate p;
    if (word == "dist") {
      arity(3);
      p = Predicate::dist_to_point(robot(args[0]), {args[1], args[2]}, c);
    } else if (word == "distbox") {
      arity(5);
      p = Predicate::dist_to_box(robot(args[0]), {args[1], args[2]}, {args[3], args[4]}, c);
    } else if (word == "pairdist") {
      arity(2);
      p = Predicate::pairwise(robot(args[0]), robot(args[1]), c);
    } else if (word == "half") {
      arity(3);
      p = Predicate::half_space(robot(args[0]), {args[1], args[2]}, c);
    } else if (word == "goal") {
      if (args.size() == 1) {
        p = Predicate::within_goal(robot(args[0]), c);
      } else {
        arity(3);
        p = Predicate::within_goal(robot(args[0]), {args[1], args[2]}, c);
      }
    } else {
      fail_at("unknown predicate kind '" + word + "'", start);
    }
    try {
      return Formula::atom(p);
    } catch (const std::invalid_argument& e) {
      fail_at(e.what(), start);
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Formula parse_formula(std::string_view text) { return Parser(text).parse(); }

}  // namespace stlcbot::stl
