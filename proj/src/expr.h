#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lexer.h"

namespace magicsim::detail {

// Recursive-descent evaluation of an angle expression starting at
// tokens[pos]; leaves pos on the first token after the expression.
// Grammar: numbers, pi, p0..pN (gate parameters), + - * /, unary minus,
// parentheses.
double parse_expression(const std::vector<Token>& tokens, std::size_t& pos,
                        std::span<const double> params);

}  // namespace magicsim::detail
