#pragma once

// Seed-deterministic random generators: well-typed judgments (fuels the
// soundness and extraction suites), arbitrary well-formed metaterms (fuels
// the rewriting suites), pure closed terms (consistency), and star-convergent
// terms (standardization). Identical configs produce identical output.

#include <functional>
#include <random>

#include "rlz/syntax.hpp"

namespace rlz {

struct GenConfig {
  uint64_t seed = 0;
  int max_depth = 4;
  Level level = Level::ST;
  int env_size = 2;
  uint64_t fuel = 1000000;
};

struct GenerationExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TypedJudgment {
  KindCtx ctx;
  TypeEnv env;
  MetatermPtr term;
  TypePtr type;
};

// A derivable judgment built top-down from the level's typing rules; the
// output always passes check(). Variables the construction needs are added
// to the returned environment.
TypedJudgment gen_typed_term(const GenConfig& cfg);

// Arbitrary well-formed (well-kinded at FOmega) metaterm over a small
// ambient kind context, possibly impure.
MetatermPtr gen_metaterm(const GenConfig& cfg);
MetatermPtr gen_metaterm(const GenConfig& cfg, KindCtx& ctx_out);

// Pure closed lambda term (consistency suite).
MetatermPtr gen_pure_closed(const GenConfig& cfg);

// A term built so that it reduces to star (standardization suites).
MetatermPtr gen_star_convergent(const GenConfig& cfg);

// A closed type (no free type variables) over a small ambient kind context,
// of kind Prop (correctness sweep).
TypePtr gen_closed_type(const GenConfig& cfg, KindCtx& ctx_out);

// Greedy shrinker: repeatedly replaces subterms by star or a free variable
// while `still_failing` keeps returning true.
MetatermPtr shrink_metaterm(const MetatermPtr& m,
                            const std::function<bool(const MetatermPtr&)>& still_failing);

}  // namespace rlz
