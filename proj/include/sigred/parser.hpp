#pragma once

#include <string_view>

#include "sigred/chart.hpp"
#include "sigred/expr.hpp"

namespace sigred {

/// Parses an expression in the ASCII grammar
///
///   expr     := term (('+'|'-') term)*
///   term     := ('+'|'-')* factor (('*'|'/') unary)*   (a leading sign negates the product)
///   unary    := ('+'|'-') unary | factor
///   factor   := atom ('^' exponent)?
///   exponent := signed_int ('/' int)? | '(' signed_int ('/' int)? ')'
///   atom     := number | ident["'"] | '(' expr ')' | ('exp'|'log') '(' expr ')'
///
/// Numbers are integers or decimals (read as exact rationals). Every
/// identifier must be declared in `chart`.
Expr parse(std::string_view text, const Chart& chart);

} // namespace sigred
