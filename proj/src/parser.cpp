#include "krepair/error.hpp"
#include "krepair/logic.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace krepair {

namespace {

enum class Tk {
  ident,
  number,
  quoted,
  lparen,
  rparen,
  comma,
  dot,
  bang,
  amp,
  bar,
  arrow,
  iff,
  eq,
  neq,
  le,
  ge,
  end,
};

struct Token {
  Tk kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

class Lexer {
 public:
  Lexer(std::string_view text, SourcePosition origin) : text_(text), line_(origin.line), column_(origin.column) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      std::size_t line = line_;
      std::size_t col = column_;
      if (pos_ >= text_.size()) {
        out.push_back({Tk::end, "", line, col});
        return out;
      }
      char c = text_[pos_];
      auto single = [&](Tk k) {
        advance();
        out.push_back({k, std::string(1, c), line, col});
      };
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                                       text_[pos_] == '\'')) {
          advance();
        }
        out.push_back({Tk::ident, std::string(text_.substr(start, pos_ - start)), line, col});
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '-' && pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
        std::size_t start = pos_;
        advance();
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
        out.push_back({Tk::number, std::string(text_.substr(start, pos_ - start)), line, col});
      } else if (c == '"') {
        advance();
        std::string value;
        while (pos_ < text_.size() && text_[pos_] != '"') {
          if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) advance();
          value += text_[pos_];
          advance();
        }
        if (pos_ >= text_.size()) throw ParseError("unterminated quoted string", line, col);
        advance();
        out.push_back({Tk::quoted, std::move(value), line, col});
      } else if (c == '(') {
        single(Tk::lparen);
      } else if (c == ')') {
        single(Tk::rparen);
      } else if (c == ',') {
        single(Tk::comma);
      } else if (c == '.') {
        single(Tk::dot);
      } else if (c == '&') {
        single(Tk::amp);
      } else if (c == '|') {
        single(Tk::bar);
      } else if (c == '=') {
        single(Tk::eq);
      } else if (c == '!') {
        if (peek(1) == '=') {
          advance(2);
          out.push_back({Tk::neq, "!=", line, col});
        } else {
          single(Tk::bang);
        }
      } else if (c == '-' && peek(1) == '>') {
        advance(2);
        out.push_back({Tk::arrow, "->", line, col});
      } else if (c == '<' && peek(1) == '-' && peek(2) == '>') {
        advance(3);
        out.push_back({Tk::iff, "<->", line, col});
      } else if (c == '<' && peek(1) == '=') {
        advance(2);
        out.push_back({Tk::le, "<=", line, col});
      } else if (c == '>' && peek(1) == '=') {
        advance(2);
        out.push_back({Tk::ge, ">=", line, col});
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
      }
    }
  }

 private:
  char peek(std::size_t k) const { return pos_ + k < text_.size() ? text_[pos_ + k] : '\0'; }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n; ++i) {
      if (text_[pos_] == '\n') {
        ++line_;
        column_ = 1;
      } else {
        ++column_;
      }
      ++pos_;
    }
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) advance();
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_;
  std::size_t column_;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, const Schema* schema) : toks_(std::move(tokens)), schema_(schema) {}

  Formula parse() {
    Formula f = parse_iff();
    if (cur().kind != Tk::end) fail("unexpected '" + cur().text + "'");
    return f;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& ahead(std::size_t k) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  Token take() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = cur();
    throw ParseError(t.kind == Tk::end ? msg + " (at end of input)" : msg, t.line, t.column);
  }

  void expect(Tk kind, const char* what) {
    if (cur().kind != kind) fail(std::string("expected ") + what);
    take();
  }

  static Formula positioned(Formula f, const Token& t) {
    f.line = t.line;
    f.column = t.column;
    return f;
  }

  Formula parse_iff() {
    Formula left = parse_implication();
    while (cur().kind == Tk::iff) {
      Token op = take();
      left = positioned(Formula::equivalence(std::move(left), parse_implication()), op);
    }
    return left;
  }

  Formula parse_implication() {
    Formula left = parse_or();
    if (cur().kind == Tk::arrow) {
      Token op = take();
      return positioned(Formula::implication(std::move(left), parse_implication()), op);
    }
    return left;
  }

  Formula parse_or() {
    Formula left = parse_and();
    while (cur().kind == Tk::bar) {
      Token op = take();
      left = positioned(Formula::disjunction(std::move(left), parse_and()), op);
    }
    return left;
  }

  Formula parse_and() {
    Formula left = parse_unary();
    while (cur().kind == Tk::amp) {
      Token op = take();
      left = positioned(Formula::conjunction(std::move(left), parse_unary()), op);
    }
    return left;
  }

  bool is_constant_name(const std::string& name) const { return schema_ && schema_->find_constant(name); }

  bool starts_variable(const Token& t) const {
    return t.kind == Tk::ident && std::islower(static_cast<unsigned char>(t.text[0])) && t.text != "true" &&
           t.text != "false" && t.text != "forall" && t.text != "exists" && !is_constant_name(t.text);
  }

  Formula parse_unary() {
    const Token& t = cur();
    if (t.kind == Tk::bang) {
      Token op = take();
      return positioned(Formula::negation(parse_unary()), op);
    }
    if (t.kind == Tk::ident && (t.text == "forall" || t.text == "exists")) return parse_quantifier();
    return parse_primary();
  }

  Formula parse_quantifier() {
    Token q = take();
    bool universal = q.text == "forall";
    std::optional<Connective> counting;
    long long k = 0;
    if (!universal && (cur().kind == Tk::le || cur().kind == Tk::ge)) {
      counting = take().kind == Tk::le ? Connective::at_most : Connective::at_least;
      if (cur().kind != Tk::number || cur().text[0] == '-') fail("expected a non-negative counting bound");
      try {
        k = std::stoll(take().text);
      } catch (const std::out_of_range&) {
        fail("counting bound out of range");
      }
    }
    std::vector<Token> vars;
    while (starts_variable(cur())) {
      Tk next = ahead(1).kind;
      if (next == Tk::eq || next == Tk::neq) break;
      if (next == Tk::lparen && schema_ && schema_->find_relation(cur().text)) break;
      vars.push_back(take());
    }
    if (vars.empty()) fail("expected a variable after '" + q.text + "'");
    if (counting && vars.size() != 1) fail("counting quantifiers bind exactly one variable");
    Formula body;
    if (cur().kind == Tk::dot) {
      take();
      body = parse_iff();
    } else {
      body = parse_unary();
    }
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
      if (counting) {
        body = *counting == Connective::at_most ? Formula::at_most(k, it->text, std::move(body))
                                                : Formula::at_least(k, it->text, std::move(body));
      } else {
        body = universal ? Formula::forall(it->text, std::move(body)) : Formula::exists(it->text, std::move(body));
      }
      body = positioned(std::move(body), it == vars.rend() - 1 ? q : *it);
    }
    return body;
  }

  Term parse_term() {
    Token t = cur();
    switch (t.kind) {
      case Tk::number:
        take();
        return Term::literal(t.text);
      case Tk::quoted:
        take();
        return Term::literal(t.text);
      case Tk::ident:
        if (t.text == "forall" || t.text == "exists" || t.text == "true" || t.text == "false") {
          fail("expected a term");
        }
        take();
        if (is_constant_name(t.text)) return Term::constant(t.text);
        if (std::islower(static_cast<unsigned char>(t.text[0]))) return Term::var(t.text);
        return Term::literal(t.text);
      default: fail("expected a term");
    }
  }

  Formula parse_primary() {
    Token t = cur();
    if (t.kind == Tk::lparen) {
      take();
      Formula inner = parse_iff();
      expect(Tk::rparen, "')'");
      return inner;
    }
    if (t.kind == Tk::ident && t.text == "true") {
      take();
      return positioned(Formula::truth(), t);
    }
    if (t.kind == Tk::ident && t.text == "false") {
      take();
      return positioned(Formula::falsity(), t);
    }
    if (t.kind == Tk::ident && ahead(1).kind == Tk::lparen) return parse_atom();
    Term left = parse_term();
    Tk op = cur().kind;
    if (op != Tk::eq && op != Tk::neq) fail("expected '=' or '!='");
    take();
    Term right = parse_term();
    return positioned(op == Tk::eq ? Formula::equal(std::move(left), std::move(right))
                                   : Formula::not_equal(std::move(left), std::move(right)),
                      t);
  }

  Formula parse_atom() {
    Token name = take();
    take();
    std::vector<Term> args;
    if (cur().kind != Tk::rparen) {
      args.push_back(parse_term());
      while (cur().kind == Tk::comma) {
        take();
        args.push_back(parse_term());
      }
    }
    expect(Tk::rparen, "',' or ')'");
    if (schema_) {
      auto rel = schema_->find_relation(name.text);
      if (!rel) throw ParseError("unknown relation '" + name.text + "'", name.line, name.column);
      if (schema_->arity(*rel) != args.size()) {
        throw ParseError("relation '" + name.text + "' has arity " + std::to_string(schema_->arity(*rel)) + ", got " +
                             std::to_string(args.size()),
                         name.line, name.column);
      }
    }
    return positioned(Formula::atom(name.text, std::move(args)), name);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Schema* schema_;
};

}  // namespace

Formula parse_formula(std::string_view text, const Schema* schema, SourcePosition origin) {
  return Parser(Lexer(text, origin).run(), schema).parse();
}

}  // namespace krepair
