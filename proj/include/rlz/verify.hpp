#pragma once

// The realizability driver: generative substitutions, running verifiers
// against candidate realizers, the correctness self-test, and the
// universality property as an executable check.

#include "rlz/reduction.hpp"
#include "rlz/syntax.hpp"

namespace rlz {

struct Verdict {
  enum class Kind { Realized, Stuck, FuelExhausted };
  Kind kind;
  Trace trace;
  MetatermPtr final_term;

  bool realized() const { return kind == Kind::Realized; }
};

std::string verdict_name(Verdict::Kind k);

struct KindError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PreconditionViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// x:A in env maps to the generator for A (expanded at ST); everything else
// maps to itself.
TermSubst gen_subst(Level lv, const TypeEnv& env);

// What to do with free type variables in the inputs: the soundness theorems
// require none; they may be closed by fresh eigenvariables on request.
enum class FreeTvarPolicy { Reject, AutoClose, Keep };

struct VerifyOptions {
  uint64_t fuel = 1000000;
  FreeTvarPolicy tvars = FreeTvarPolicy::Reject;
  bool record_steps = true;
  size_t size_limit = 0;  // see ReduceSession::size_limit
};

// Builds ver(a, m{gen_subst(env)}) (expanded at ST), runs weak-head
// reduction, and classifies the outcome.
Verdict realizes(Level lv, const KindCtx& ctx, const TypeEnv& env, const TypePtr& a,
                 const MetatermPtr& m, const VerifyOptions& opts = {});

// Runs realizes on the generator for `a` itself with an empty environment;
// the correctness lemma promises Realized for every tvar-free proposition.
Verdict correctness_check(Level lv, const KindCtx& ctx, const TypePtr& a,
                          const VerifyOptions& opts = {});

struct UniversalityResult {
  enum class Kind { Confirmed, CounterexampleCandidate, Inconclusive };
  Kind kind;
  MetatermPtr stuck_term;  // for CounterexampleCandidate
  uint64_t fuel_used = 0;
};

// Checks the universality lemma on one instance: given env || sigma
// (compatibility) and m{gen_subst(env)} ->> star, the run of m{sigma} must
// also reach star. A counterexample would falsify the lemma.
UniversalityResult universality_check(Level lv, const TypeEnv& env, const TermSubst& sigma,
                                      const MetatermPtr& m, const VerifyOptions& opts = {});

}  // namespace rlz
