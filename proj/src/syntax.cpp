#include "tanflow/syntax.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <system_error>

#include "tanflow/errors.hpp"

namespace tanflow {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

constexpr std::array<std::string_view, 5> kTwoCharSymbols = {"->", ">=", "<=", "==", "!="};
constexpr std::string_view kOneCharSymbols = "+-*/^()[]{},:;=<>|";

}  // namespace

std::vector<Token> tokenize(std::string_view text, int line, int first_column) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto column = [&](std::size_t pos) { return static_cast<int>(pos) + first_column; };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      ++i;
      continue;
    }
    Token tok;
    tok.line = line;
    tok.column = column(i);
    if (is_ident_start(c)) {
      std::size_t j = i + 1;
      while (j < text.size() &&
             (is_ident_char(text[j]) || (text[j] == '.' && j + 1 < text.size() && is_ident_start(text[j + 1])))) {
        ++j;
      }
      tok.kind = Token::Kind::Identifier;
      tok.text = std::string(text.substr(i, j - i));
      i = j;
    } else if (is_digit(c) || (c == '.' && i + 1 < text.size() && is_digit(text[i + 1]))) {
      std::size_t j = i;
      while (j < text.size() && is_digit(text[j])) ++j;
      if (j < text.size() && text[j] == '.') {
        ++j;
        while (j < text.size() && is_digit(text[j])) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && is_digit(text[k])) {
          j = k;
          while (j < text.size() && is_digit(text[j])) ++j;
        }
      }
      tok.kind = Token::Kind::Number;
      tok.text = std::string(text.substr(i, j - i));
      const auto res = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), tok.number);
      if (res.ec != std::errc() || res.ptr != tok.text.data() + tok.text.size()) {
        throw ParseError("malformed number '" + tok.text + "'", line, tok.column);
      }
      i = j;
    } else {
      tok.kind = Token::Kind::Symbol;
      bool matched = false;
      for (std::string_view sym : kTwoCharSymbols) {
        if (text.substr(i, 2) == sym) {
          tok.text = std::string(sym);
          i += 2;
          matched = true;
          break;
        }
      }
      if (!matched) {
        if (kOneCharSymbols.find(c) == std::string_view::npos) {
          throw ParseError(std::string("unexpected character '") + c + "'", line, tok.column);
        }
        tok.text = std::string(1, c);
        ++i;
      }
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = Token::Kind::End;
  end.line = line;
  end.column = column(text.size());
  out.push_back(end);
  return out;
}

TokenStream::TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty() || tokens_.back().kind != Token::Kind::End) {
    Token end;
    end.kind = Token::Kind::End;
    if (!tokens_.empty()) {
      end.line = tokens_.back().line;
      end.column = tokens_.back().column + static_cast<int>(tokens_.back().text.size());
    }
    tokens_.push_back(end);
  }
}

const Token& TokenStream::peek(std::size_t ahead) const {
  return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
}

const Token& TokenStream::next() {
  const Token& t = tokens_[pos_];
  if (pos_ + 1 < tokens_.size()) ++pos_;
  return t;
}

bool TokenStream::peek_symbol(std::string_view s, std::size_t ahead) const {
  const Token& t = peek(ahead);
  return t.kind == Token::Kind::Symbol && t.text == s;
}

bool TokenStream::peek_identifier(std::string_view s) const {
  return peek().kind == Token::Kind::Identifier && peek().text == s;
}

bool TokenStream::accept_symbol(std::string_view s) {
  if (!peek_symbol(s)) return false;
  next();
  return true;
}

void TokenStream::expect_symbol(std::string_view s) {
  if (!accept_symbol(s)) {
    fail("expected '" + std::string(s) + "'");
  }
}

std::string TokenStream::expect_identifier() {
  if (peek().kind != Token::Kind::Identifier) fail("expected a name");
  return next().text;
}

double TokenStream::expect_number() {
  double sign = 1.0;
  if (accept_symbol("-")) sign = -1.0;
  if (peek().kind == Token::Kind::Identifier && (peek().text == "inf")) {
    next();
    return sign * HUGE_VAL;
  }
  if (peek().kind != Token::Kind::Number) fail("expected a number");
  return sign * next().number;
}

void TokenStream::fail(const std::string& message) const {
  const Token& t = peek();
  const std::string found = t.kind == Token::Kind::End ? "end of line" : "'" + t.text + "'";
  throw ParseError(message + ", found " + found, t.line, t.column);
}

// --------------------------------------------------------------------------
// Expression parser
// --------------------------------------------------------------------------

namespace {

class ExprParser {
 public:
  ExprParser(TokenStream& tokens, int arity) : ts_(tokens), arity_(arity) {}

  Expr expression() {
    Expr lhs = term();
    while (true) {
      if (ts_.accept_symbol("+")) {
        lhs = lhs + term();
      } else if (ts_.accept_symbol("-")) {
        lhs = lhs - term();
      } else {
        return lhs;
      }
    }
  }

 private:
  Expr term() {
    Expr lhs = unary();
    while (true) {
      if (ts_.accept_symbol("*")) {
        lhs = lhs * unary();
      } else if (ts_.accept_symbol("/")) {
        lhs = lhs / unary();
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (ts_.accept_symbol("-")) return -unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!ts_.accept_symbol("^")) return base;
    const bool negative = ts_.accept_symbol("-");
    const Token& t = ts_.peek();
    if (t.kind != Token::Kind::Number || t.number != std::floor(t.number) || std::abs(t.number) > 64) {
      ts_.fail("expected an integer exponent");
    }
    const int e = static_cast<int>(ts_.next().number);
    return pow(base, negative ? -e : e);
  }

  Expr primary() {
    const Token& t = ts_.peek();
    switch (t.kind) {
      case Token::Kind::Number:
        return Expr(ts_.next().number);
      case Token::Kind::Identifier:
        return identifier();
      case Token::Kind::Symbol:
        if (ts_.accept_symbol("(")) {
          Expr inner = expression();
          ts_.expect_symbol(")");
          return inner;
        }
        break;
      case Token::Kind::End:
        break;
    }
    ts_.fail("expected an operand");
  }

  Expr identifier() {
    const Token tok = ts_.next();
    const std::string& name = tok.text;
    if (ts_.peek_symbol("(")) {
      ts_.next();
      Expr arg = expression();
      ts_.expect_symbol(")");
      if (name == "sin") return sin(arg);
      if (name == "cos") return cos(arg);
      if (name == "exp") return exp(arg);
      if (name == "log") return log(arg);
      if (name == "sqrt") return sqrt(arg);
      if (name == "flat") return flat(arg);
      throw ParseError("unknown function '" + name + "'", tok.line, tok.column);
    }
    if (name.size() > 1 && name[0] == 'x' && std::all_of(name.begin() + 1, name.end(), is_digit)) {
      int k = 0;
      std::from_chars(name.data() + 1, name.data() + name.size(), k);
      if (k < 1 || k > arity_) {
        throw UndefinedVariable("variable '" + name + "' outside x1..x" + std::to_string(arity_), tok.line,
                                tok.column);
      }
      return Expr::var(k - 1);
    }
    throw UndefinedVariable("undefined name '" + name + "'", tok.line, tok.column);
  }

  TokenStream& ts_;
  int arity_;
};

// Precedence levels used by the printer.
constexpr int kSum = 1;
constexpr int kProduct = 2;
constexpr int kUnary = 3;
constexpr int kPower = 4;
constexpr int kAtom = 5;

int precedence(const Expr& e) {
  switch (e.op()) {
    case Expr::Op::Const:
      return std::signbit(e.constant_value()) ? kUnary : kAtom;
    case Expr::Op::Add:
    case Expr::Op::Sub:
      return kSum;
    case Expr::Op::Mul:
    case Expr::Op::Div:
      return kProduct;
    case Expr::Op::Neg:
      return kUnary;
    case Expr::Op::Pow:
      return kPower;
    default:
      return kAtom;
  }
}

void print(const Expr& e, std::string& out);

void print_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  print(e, out);
  if (wrap) out += ')';
}

void print(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Expr::Op::Const:
      out += format_number(e.constant_value());
      return;
    case Expr::Op::Var:
      out += 'x';
      out += std::to_string(e.var_index() + 1);
      return;
    case Expr::Op::Add:
    case Expr::Op::Sub:
    case Expr::Op::Mul:
    case Expr::Op::Div: {
      const int p = precedence(e);
      const Expr& lhs = e.args()[0];
      const Expr& rhs = e.args()[1];
      print_wrapped(lhs, precedence(lhs) < p, out);
      switch (e.op()) {
        case Expr::Op::Add:
          out += '+';
          break;
        case Expr::Op::Sub:
          out += '-';
          break;
        case Expr::Op::Mul:
          out += '*';
          break;
        default:
          out += '/';
          break;
      }
      print_wrapped(rhs, precedence(rhs) <= p || precedence(rhs) == kUnary, out);
      return;
    }
    case Expr::Op::Neg:
      out += '-';
      print_wrapped(e.args()[0], precedence(e.args()[0]) < kUnary, out);
      return;
    case Expr::Op::Pow:
      print_wrapped(e.args()[0], precedence(e.args()[0]) < kAtom, out);
      out += '^';
      out += std::to_string(e.exponent());
      return;
    case Expr::Op::Call: {
      out += e.function()->name();
      out += '(';
      bool first = true;
      for (const Expr& a : e.args()) {
        if (!first) out += ", ";
        first = false;
        print(a, out);
      }
      out += ')';
      return;
    }
    default:
      out += function_name(e.op());
      out += '(';
      print(e.args()[0], out);
      out += ')';
      return;
  }
}

}  // namespace

Expr parse_expression(TokenStream& tokens, int arity) { return ExprParser(tokens, arity).expression(); }

Expr parse_expression(std::string_view text, int arity) {
  TokenStream ts(tokenize(text));
  Expr e = parse_expression(ts, arity);
  if (!ts.at_end()) ts.fail("unexpected trailing input");
  return e;
}

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace tanflow
