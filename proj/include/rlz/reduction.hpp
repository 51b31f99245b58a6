#pragma once

// The rewrite semantics: the rule tables for the three metacalculi, weak-head
// and full strategies with fuel and traces, ST definitional expansion of
// verifiers/generators, and complete developments for confluence testing.
//
// Weak-head contexts:  W ::= [] | W M | W A | seq(W, M) | ver(A, W) | nu #a. W
// (ST omits the type-application and nu forms.)
//
// When several weak-head redexes exist at F/FOmega the engine contracts the
// outermost one: the root is tried before descending into the unique
// weak-head child.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "rlz/syntax.hpp"

namespace rlz {

enum class RuleTag {
  Beta,
  TyBeta,
  GuardStar,
  VerifEig,
  GenImp,
  VerifImp,
  GenAll,
  VerifAll,
  FreshDrop,
  StExpand,  // elaboration only, never fired by the engine
};

std::string rule_tag_name(RuleTag r);

enum class PathStep : uint8_t { Fun, Arg, Cond, Next, Body };
using Path = std::vector<PathStep>;
std::string path_to_string(const Path& p);

struct Step {
  RuleTag rule;
  Path pos;
  MetatermPtr before;  // whole term before the step
  MetatermPtr after;   // whole term after the step
};

enum class Outcome { Normal, StarReached, FuelExhausted };
std::string outcome_name(Outcome o);

struct Trace {
  Level level;
  std::vector<Step> steps;   // empty when recording is off
  size_t step_count = 0;     // always maintained
  Outcome outcome = Outcome::Normal;
  MetatermPtr initial;
  MetatermPtr final_term;
};

enum class Strategy { WeakHead, LeftmostOutermost, Random };
std::string strategy_name(Strategy s);

// A reduction session owns the fresh-eigenvariable supply and, at FOmega,
// the kinds of free names (for the rule 2 side condition).
struct ReduceSession {
  Level level = Level::ST;
  KindCtx ctx;
  NameSupply supply;
  bool record_steps = true;
  // When nonzero, a run stops with FuelExhausted once the current term grows
  // past this many nodes (defends against size-exploding divergent terms).
  size_t size_limit = 0;
};

// ST definitional expansion: gen/ver at compound types become their core
// forms; pure subterms are untouched. Throws LevelError on quantifiers.
MetatermPtr expand_st(const MetatermPtr& surface);
MetatermPtr expand_st_gen(const TypePtr& a);
MetatermPtr expand_st_verif(const TypePtr& a, const MetatermPtr& m);

// One weak-head step, if any rule applies inside a weak-head context.
std::optional<Step> wh_step(ReduceSession& session, const MetatermPtr& m);

// All redex positions under arbitrary-context closure, in deterministic
// pre-order. Never consumes fresh names.
std::vector<std::pair<Path, RuleTag>> enumerate_redexes(const ReduceSession& session,
                                                        const MetatermPtr& m);
// Weak-head positions only (for the determinism and subcommutativity suites).
std::vector<std::pair<Path, RuleTag>> enumerate_wh_redexes(const ReduceSession& session,
                                                           const MetatermPtr& m);

// Contract the redex with the given rule at the given position.
// Throws std::invalid_argument when no such redex exists.
Step apply_at(ReduceSession& session, const MetatermPtr& m, const Path& pos, RuleTag rule);

// Re-check that a recorded step is exactly the contraction it claims to be.
bool revalidate_step(ReduceSession& session, const Step& s);

Trace reduce(ReduceSession& session, const MetatermPtr& m, Strategy strategy, uint64_t fuel,
             uint64_t seed = 0);

// The maximal simultaneous reduct (level F): contracts every redex present
// in m without contracting created redexes.
MetatermPtr complete_development(Level lv, const MetatermPtr& m);

}  // namespace rlz
