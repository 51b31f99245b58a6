#pragma once

// Text grammar (UTF-8):
//   kinds   Prop | @k | K -> K
//   types   a | #a | A -> B (right assoc) | forall a[:K]. A | \a:K. A | A B (left assoc)
//   terms   x | \x. M | M N | /\a[:K]. M | M [A] | star | seq(M, N) | gen(A)
//           | ver(A, M) | nu #a[:K]. M | (M : A)
//   comments: -- to end of line
//
// Constructs illegal at the requested level are rejected with LevelError.

#include <string>
#include <variant>

#include "rlz/syntax.hpp"

namespace rlz {

struct ParseError : std::runtime_error {
  size_t position;
  std::string expected;
  ParseError(size_t pos, const std::string& what)
      : std::runtime_error("parse error at offset " + std::to_string(pos) + ": " + what),
        position(pos),
        expected(what) {}
};

KindPtr parse_kind(const std::string& text, Level lv);
TypePtr parse_type(const std::string& text, Level lv);
MetatermPtr parse_term(const std::string& text, Level lv);

enum class Sort { KindSort, TypeSort, TermSort };
using Ast = std::variant<KindPtr, TypePtr, MetatermPtr>;
Ast parse(const std::string& text, Sort sort, Level lv);

}  // namespace rlz
