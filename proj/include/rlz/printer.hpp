#pragma once

// Pretty printer. parse(print(x)) is alpha-equivalent to x. Binder hints are
// renamed on the fly when they would capture a free name in scope.

#include <string>

#include "rlz/syntax.hpp"

namespace rlz {

std::string print(const KindPtr& k);
std::string print(const TypePtr& t);
std::string print(const MetatermPtr& m);

}  // namespace rlz
