#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace magicsim::detail {

enum class TokenType { identifier, integer, real, string, symbol, end };

struct Token {
  TokenType type = TokenType::end;
  std::string text;
  int line = 1;
  int column = 1;
};

// Splits OpenQASM 2.0 source (or a standalone angle expression) into tokens.
// Line comments (//) are dropped. Throws ParseError on stray characters.
std::vector<Token> tokenize(std::string_view source);

}  // namespace magicsim::detail
