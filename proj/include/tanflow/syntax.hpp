#pragma once

// Text form of expressions: a small infix grammar shared by the corpus reader.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' ['-'] integer)?
//   primary := number | 'x'<k> | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | exp | log | sqrt | flat
//
// The printer emits the minimal parenthesization that reparses to the same
// tree, so print -> parse -> print is byte-identical.

#include <string>
#include <string_view>
#include <vector>

#include "tanflow/expr.hpp"

namespace tanflow {

struct Token {
  enum class Kind { Identifier, Number, Symbol, End };
  Kind kind = Kind::End;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

/// Splits one line of text into tokens. Columns are 1-based and offset by
/// `first_column - 1`. A '#' starts a comment that runs to end of line.
[[nodiscard]] std::vector<Token> tokenize(std::string_view text, int line = 1, int first_column = 1);

/// Cursor over a token vector, used by the expression and corpus parsers.
class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> tokens);

  [[nodiscard]] const Token& peek(std::size_t ahead = 0) const;
  const Token& next();
  [[nodiscard]] bool at_end() const { return peek().kind == Token::Kind::End; }
  [[nodiscard]] bool peek_symbol(std::string_view s, std::size_t ahead = 0) const;
  [[nodiscard]] bool peek_identifier(std::string_view s) const;
  bool accept_symbol(std::string_view s);
  void expect_symbol(std::string_view s);
  std::string expect_identifier();
  double expect_number();
  [[noreturn]] void fail(const std::string& message) const;

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

/// Parses one expression from the stream; variables above `arity` are rejected.
[[nodiscard]] Expr parse_expression(TokenStream& tokens, int arity);

/// Parses a complete string as an expression in x1..x_arity.
[[nodiscard]] Expr parse_expression(std::string_view text, int arity);

/// Canonical text of an expression.
[[nodiscard]] std::string to_string(const Expr& e);

/// Shortest round-trip decimal form of a double.
[[nodiscard]] std::string format_number(double v);

}  // namespace tanflow
