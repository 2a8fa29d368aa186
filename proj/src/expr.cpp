#include "expr.h"

#include <cstdlib>
#include <string>

#include "magicsim/angle.h"
#include "magicsim/errors.h"

namespace magicsim::detail {

namespace {

class ExpressionParser {
 public:
  ExpressionParser(const std::vector<Token>& tokens, std::size_t& pos, std::span<const double> params)
      : tokens_(tokens), pos_(pos), params_(params) {}

  double expression() {
    double value = term();
    while (is_symbol("+") || is_symbol("-")) {
      const bool plus = peek().text == "+";
      ++pos_;
      const double rhs = term();
      value = plus ? value + rhs : value - rhs;
    }
    return value;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  bool is_symbol(const char* s) const {
    return peek().type == TokenType::symbol && peek().text == s;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().line, peek().column);
  }

  double term() {
    double value = unary();
    while (is_symbol("*") || is_symbol("/")) {
      const bool mul = peek().text == "*";
      ++pos_;
      const double rhs = unary();
      if (!mul && rhs == 0.0) {
        fail("division by zero in angle expression");
      }
      value = mul ? value * rhs : value / rhs;
    }
    return value;
  }

  double unary() {
    if (is_symbol("-")) {
      ++pos_;
      return -unary();
    }
    if (is_symbol("+")) {
      ++pos_;
      return unary();
    }
    return primary();
  }

  double primary() {
    const Token& tok = peek();
    switch (tok.type) {
      case TokenType::integer:
      case TokenType::real: {
        ++pos_;
        return std::strtod(tok.text.c_str(), nullptr);
      }
      case TokenType::identifier: {
        if (tok.text == "pi") {
          ++pos_;
          return kPi;
        }
        if (tok.text.size() >= 2 && tok.text[0] == 'p' &&
            tok.text.find_first_not_of("0123456789", 1) == std::string::npos) {
          const auto index = std::stoul(tok.text.substr(1));
          if (index >= params_.size()) {
            fail("parameter " + tok.text + " not supplied (gate has " +
                 std::to_string(params_.size()) + " parameters)");
          }
          ++pos_;
          return params_[index];
        }
        fail("unknown identifier '" + tok.text + "' in angle expression");
      }
      case TokenType::symbol:
        if (tok.text == "(") {
          ++pos_;
          const double value = expression();
          if (!is_symbol(")")) {
            fail("expected ')' in angle expression");
          }
          ++pos_;
          return value;
        }
        break;
      default:
        break;
    }
    fail(tok.type == TokenType::end ? "unexpected end of angle expression"
                                    : "unexpected '" + tok.text + "' in angle expression");
  }

  const std::vector<Token>& tokens_;
  std::size_t& pos_;
  std::span<const double> params_;
};

}  // namespace

double parse_expression(const std::vector<Token>& tokens, std::size_t& pos,
                        std::span<const double> params) {
  return ExpressionParser(tokens, pos, params).expression();
}

}  // namespace magicsim::detail
