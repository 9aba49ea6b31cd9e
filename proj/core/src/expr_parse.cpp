#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

#include "quizforge/expr.hpp"
#include "quizforge/numfmt.hpp"

namespace quizforge::expr {
namespace {

constexpr int kMaxDepth = 200;

enum class Tok { Number, String, Ident, Op, End };

struct Token {
  Tok type = Tok::End;
  std::string text;
  double number = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        lex_number(t);
      } else if (c == '"' || c == '\'') {
        lex_string(t);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '.' || c == '_') {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.' ||
                                      src_[pos_] == '_')) {
          advance();
        }
        t.type = Tok::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else {
        lex_operator(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, line_, col_); }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  void lex_number(Token& t) {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      advance();
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      const std::size_t save = pos_;
      advance();
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
      if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        pos_ = save;
        fail("malformed exponent in number");
      }
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    }
    const auto value = parse_number(src_.substr(start, pos_ - start));
    if (!value) fail("malformed number");
    if (pos_ < src_.size() && src_[pos_] == 'L') advance();  // R integer suffix
    t.type = Tok::Number;
    t.number = *value;
    t.text = std::string(src_.substr(start, pos_ - start));
  }

  void lex_string(Token& t) {
    const char quote = src_[pos_];
    advance();
    std::string out;
    for (;;) {
      if (pos_ >= src_.size()) fail("unterminated string literal");
      char c = src_[pos_];
      if (c == quote) {
        advance();
        break;
      }
      if (c == '\\' && pos_ + 1 < src_.size()) {
        advance();
        c = src_[pos_];
        switch (c) {
          case 'n':
            out.push_back('\n');
            break;
          case 't':
            out.push_back('\t');
            break;
          default:
            out.push_back(c);
        }
        advance();
        continue;
      }
      out.push_back(c);
      advance();
    }
    t.type = Tok::String;
    t.text = std::move(out);
  }

  void lex_operator(Token& t) {
    static const std::vector<std::string_view> ops = {"%/%", "%in%", "%%", "<-", "==", "!=", "<=", ">=", "&&",
                                                      "||",  "**",   "+",  "-",  "*",  "/",  "^",  ":",  "(",
                                                      ")",   "[",    "]",  ",",  "=",  "$",  "<",  ">",  "!",
                                                      "&",   "|"};
    for (std::string_view op : ops) {
      if (src_.substr(pos_, op.size()) == op) {
        if (op == "<-") fail("assignment is not allowed in expressions");
        for (std::size_t i = 0; i < op.size(); ++i) advance();
        t.type = Tok::Op;
        t.text = op == "**" ? "^" : std::string(op);
        return;
      }
    }
    fail(std::string("unexpected character '") + src_[pos_] + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ExprPtr parse() {
    auto e = parse_or();
    if (peek().type != Tok::End) fail("unexpected '" + peek().text + "'");
    return e;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& take() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  bool is_op(std::string_view op, std::size_t k = 0) const {
    return peek(k).type == Tok::Op && peek(k).text == op;
  }

  bool accept(std::string_view op) {
    if (!is_op(op)) return false;
    ++pos_;
    return true;
  }

  void expect(std::string_view op) {
    if (!accept(op)) {
      fail("expected '" + std::string(op) + "'" +
           (peek().type == Tok::End ? std::string(" before end of input") : " but found '" + peek().text + "'"));
    }
  }

  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, peek().line, peek().column); }

  struct DepthGuard {
    explicit DepthGuard(Parser& p) : p(p) {
      if (++p.depth_ > kMaxDepth) p.fail("expression nested too deeply");
    }
    ~DepthGuard() { --p.depth_; }
    Parser& p;
  };

  static std::shared_ptr<Node> make(Node::Kind kind, const Token& at) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->line = at.line;
    n->column = at.column;
    return n;
  }

  ExprPtr binary(const Token& at, std::string op, ExprPtr lhs, ExprPtr rhs) {
    auto n = make(Node::Kind::Binary, at);
    n->text = std::move(op);
    n->children = {std::move(lhs), std::move(rhs)};
    return n;
  }

  ExprPtr parse_or() {
    DepthGuard g(*this);
    auto lhs = parse_and();
    while (is_op("||") || is_op("|")) {
      const Token op = take();
      lhs = binary(op, op.text, lhs, parse_and());
    }
    return lhs;
  }

  ExprPtr parse_and() {
    auto lhs = parse_not();
    while (is_op("&&") || is_op("&")) {
      const Token op = take();
      lhs = binary(op, op.text, lhs, parse_not());
    }
    return lhs;
  }

  ExprPtr parse_not() {
    DepthGuard g(*this);
    if (is_op("!")) {
      const Token op = take();
      auto n = make(Node::Kind::Unary, op);
      n->text = "!";
      n->children = {parse_not()};
      return n;
    }
    return parse_comparison();
  }

  ExprPtr parse_comparison() {
    auto lhs = parse_additive();
    for (std::string_view op : {"==", "!=", "<=", ">=", "<", ">"}) {
      if (is_op(op)) {
        const Token t = take();
        auto rhs = parse_additive();
        for (std::string_view again : {"==", "!=", "<=", ">=", "<", ">"}) {
          if (is_op(again)) fail("comparisons cannot be chained");
        }
        return binary(t, t.text, lhs, rhs);
      }
    }
    return lhs;
  }

  ExprPtr parse_additive() {
    auto lhs = parse_multiplicative();
    while (is_op("+") || is_op("-")) {
      const Token op = take();
      lhs = binary(op, op.text, lhs, parse_multiplicative());
    }
    return lhs;
  }

  ExprPtr parse_multiplicative() {
    auto lhs = parse_special();
    while (is_op("*") || is_op("/")) {
      const Token op = take();
      lhs = binary(op, op.text, lhs, parse_special());
    }
    return lhs;
  }

  ExprPtr parse_special() {
    auto lhs = parse_range();
    while (is_op("%%") || is_op("%/%") || is_op("%in%")) {
      const Token op = take();
      lhs = binary(op, op.text, lhs, parse_range());
    }
    return lhs;
  }

  ExprPtr parse_range() {
    auto lhs = parse_unary();
    while (is_op(":")) {
      const Token op = take();
      lhs = binary(op, ":", lhs, parse_unary());
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    DepthGuard g(*this);
    if (is_op("-") || is_op("+")) {
      const Token op = take();
      auto n = make(Node::Kind::Unary, op);
      n->text = op.text;
      n->children = {parse_unary()};
      return n;
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    auto base = parse_postfix();
    if (is_op("^")) {
      const Token op = take();
      return binary(op, "^", base, parse_unary());
    }
    return base;
  }

  ExprPtr parse_postfix() {
    auto e = parse_primary();
    for (;;) {
      if (is_op("(")) {
        if (e->kind != Node::Kind::Identifier) fail("only named functions can be called");
        const Token open = take();
        auto call = make(Node::Kind::Call, open);
        call->line = e->line;
        call->column = e->column;
        call->text = e->text;
        if (!is_op(")")) {
          do {
            if (peek().type == Tok::Ident && is_op("=", 1)) {
              call->arg_names.push_back(take().text);
              take();
            } else {
              call->arg_names.emplace_back();
            }
            call->children.push_back(parse_or());
          } while (accept(","));
        }
        expect(")");
        e = call;
      } else if (is_op("[")) {
        const Token open = take();
        auto idx = make(Node::Kind::Index, open);
        idx->children = {e, parse_or()};
        expect("]");
        e = idx;
      } else if (is_op("$")) {
        const Token dollar = take();
        if (peek().type != Tok::Ident && peek().type != Tok::String) fail("expected a column name after '$'");
        auto mem = make(Node::Kind::Member, dollar);
        mem->text = take().text;
        mem->children = {e};
        e = mem;
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_primary() {
    DepthGuard g(*this);
    const Token& t = peek();
    switch (t.type) {
      case Tok::Number: {
        auto n = make(Node::Kind::Number, t);
        n->number = t.number;
        n->text = t.text;
        take();
        return n;
      }
      case Tok::String: {
        auto n = make(Node::Kind::String, t);
        n->text = t.text;
        take();
        return n;
      }
      case Tok::Ident: {
        if (t.text == "TRUE" || t.text == "FALSE" || t.text == "T" || t.text == "F") {
          auto n = make(Node::Kind::Bool, t);
          n->number = (t.text == "TRUE" || t.text == "T") ? 1 : 0;
          n->text = t.text;
          take();
          return n;
        }
        if (t.text == "if") return parse_if();
        if (t.text == "else") fail("'else' without 'if'");
        if (t.text == "function") fail("function definitions are not supported");
        auto n = make(Node::Kind::Identifier, t);
        n->text = t.text;
        take();
        return n;
      }
      case Tok::Op:
        if (t.text == "(") {
          take();
          auto inner = parse_or();
          expect(")");
          return inner;
        }
        fail("unexpected '" + t.text + "'");
      case Tok::End:
        fail("unexpected end of input");
    }
    fail("unexpected token");
  }

  ExprPtr parse_if() {
    const Token kw = take();
    expect("(");
    auto cond = parse_or();
    expect(")");
    auto then_branch = parse_or();
    if (!(peek().type == Tok::Ident && peek().text == "else")) {
      fail("'if' expression needs an 'else' branch");
    }
    take();
    auto else_branch = parse_or();
    auto n = make(Node::Kind::Conditional, kw);
    n->children = {cond, then_branch, else_branch};
    return n;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

SyntaxError::SyntaxError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

ExprPtr parse_expr(std::string_view source) {
  Lexer lexer(source);
  Parser parser(lexer.run());
  return parser.parse();
}

std::string to_sexpr(const Node& node) {
  switch (node.kind) {
    case Node::Kind::Number:
      return format_number(node.number);
    case Node::Kind::String:
      return "\"" + node.text + "\"";
    case Node::Kind::Bool:
      return node.number != 0 ? "TRUE" : "FALSE";
    case Node::Kind::Identifier:
      return node.text;
    case Node::Kind::Unary:
      return "(" + node.text + " " + to_sexpr(*node.children[0]) + ")";
    case Node::Kind::Binary:
      return "(" + node.text + " " + to_sexpr(*node.children[0]) + " " + to_sexpr(*node.children[1]) + ")";
    case Node::Kind::Call: {
      std::string out = "(" + node.text;
      for (std::size_t i = 0; i < node.children.size(); ++i) {
        out += " ";
        if (!node.arg_names[i].empty()) out += node.arg_names[i] + "=";
        out += to_sexpr(*node.children[i]);
      }
      return out + ")";
    }
    case Node::Kind::Index:
      return "([ " + to_sexpr(*node.children[0]) + " " + to_sexpr(*node.children[1]) + ")";
    case Node::Kind::Member:
      return "($ " + to_sexpr(*node.children[0]) + " " + node.text + ")";
    case Node::Kind::Conditional:
      return "(if " + to_sexpr(*node.children[0]) + " " + to_sexpr(*node.children[1]) + " " +
             to_sexpr(*node.children[2]) + ")";
  }
  return {};
}

}  // namespace quizforge::expr
