#include "lexer.h"

#include <cctype>

#include "magicsim/errors.h"

namespace magicsim::detail {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };

  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') {
        advance(1);
      }
      continue;
    }

    Token tok;
    tok.line = line;
    tok.column = col;
    const std::size_t start = i;

    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && is_ident_char(src[j])) {
        ++j;
      }
      tok.type = TokenType::identifier;
      tok.text = std::string(src.substr(start, j - start));
      advance(j - i);
    } else if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      std::size_t j = i;
      bool real = false;
      while (j < src.size() && is_digit(src[j])) {
        ++j;
      }
      if (j < src.size() && src[j] == '.') {
        real = true;
        ++j;
        while (j < src.size() && is_digit(src[j])) {
          ++j;
        }
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) {
          ++k;
        }
        if (k < src.size() && is_digit(src[k])) {
          real = true;
          j = k;
          while (j < src.size() && is_digit(src[j])) {
            ++j;
          }
        }
      }
      tok.type = real ? TokenType::real : TokenType::integer;
      tok.text = std::string(src.substr(start, j - start));
      advance(j - i);
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"' && src[j] != '\n') {
        ++j;
      }
      if (j >= src.size() || src[j] != '"') {
        throw ParseError("unterminated string literal", line, col);
      }
      tok.type = TokenType::string;
      tok.text = std::string(src.substr(i + 1, j - i - 1));
      advance(j + 1 - i);
    } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      tok.type = TokenType::symbol;
      tok.text = "->";
      advance(2);
    } else if (c == '=' && i + 1 < src.size() && src[i + 1] == '=') {
      tok.type = TokenType::symbol;
      tok.text = "==";
      advance(2);
    } else if (std::string_view(";,[](){}+-*/^").find(c) != std::string_view::npos) {
      tok.type = TokenType::symbol;
      tok.text = std::string(1, c);
      advance(1);
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back(std::move(tok));
  }

  Token end;
  end.type = TokenType::end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

}  // namespace magicsim::detail
