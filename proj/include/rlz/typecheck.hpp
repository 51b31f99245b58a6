#pragma once

// Kinding for FOmega types, environment well-formedness, and bidirectional
// type checking producing re-validatable derivations for all three levels.
//
// Terms are Curry-style; checking is made algorithmic by a bidirectional
// discipline plus the surface-only annotation form (t : A), which switches
// an application head into checking mode. Annotations never appear in the
// subjects recorded on derivations.

#include <memory>
#include <string>
#include <vector>

#include "rlz/syntax.hpp"

namespace rlz {

struct UnboundName : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct KindMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The unique kind K with ctx |- a : K. Arrow and quantifier bodies must land
// in Prop. Throws UnboundName / KindMismatch.
KindPtr kind_of(const KindCtx& ctx, const TypePtr& a);

// True iff every assigned type has kind Prop under ctx (trivially true at
// ST/F for syntactically valid environments).
bool env_well_formed(Level lv, const KindCtx& ctx, const TypeEnv& env);

// Predicate |-wk on metaterms at FOmega: every embedded gen/ver type is a
// proposition and every type application argument is well-kinded.
bool well_kinded(const KindCtx& ctx, const MetatermPtr& m);

struct TypingDerivation;
using TypingDerivationPtr = std::shared_ptr<const TypingDerivation>;

struct TypingDerivation {
  enum class Rule { Var, AbsIntro, AppElim, AllIntro, AllElim, Conv };

  Rule rule;
  Level level;
  KindCtx ctx;
  TypeEnv env;
  MetatermPtr term;  // pure subject, locally closed
  TypePtr type;
  std::vector<TypingDerivationPtr> premises;

  // Side conditions.
  std::string binder_name;  // AbsIntro: variable; AllIntro: type variable not free in env
  KindPtr binder_kind;      // AllIntro / AllElim
  TypePtr elim_arg;         // AllElim: instantiation type
};

std::string rule_name(TypingDerivation::Rule r);

struct CheckFail {
  std::string path;  // subject path of the first violated rule, e.g. "body.fun"
  std::string reason;
};

struct CheckResult {
  TypingDerivationPtr derivation;  // null on failure
  std::optional<CheckFail> fail;

  bool ok() const { return derivation != nullptr; }
};

struct SynthResult {
  TypePtr type;
  TypingDerivationPtr derivation;
  std::optional<CheckFail> fail;

  bool ok() const { return derivation != nullptr; }
};

CheckResult check(Level lv, const KindCtx& ctx, const TypeEnv& env, const MetatermPtr& t,
                  const TypePtr& a);
SynthResult synth(Level lv, const KindCtx& ctx, const TypeEnv& env, const MetatermPtr& t);

// Node-by-node re-validation, independent of the search performed by check.
bool validate(const TypingDerivationPtr& d);
bool validate(const TypingDerivationPtr& d, std::string* why);

}  // namespace rlz
