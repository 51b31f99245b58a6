#pragma once

// The computational content of the completeness theorems: proof size, input
// matching, and reconstruction of a typing derivation from a good realizer.
//
// extract follows the completeness proof: peel the type's arrow/quantifier
// prefix by applying fresh variables and eigenvariables, normalize, require a
// variable-headed neutral, match the spine against the head's declared type,
// recursively extract every term argument (re-verifying it against its
// matched type), and assemble the derivation. The returned subject is the
// beta-normal form of the input; the eta-long reconstruction built internally
// is reported as metadata.

#include <variant>

#include "rlz/syntax.hpp"
#include "rlz/typecheck.hpp"
#include "rlz/verify.hpp"

namespace rlz {

struct TermInput {
  MetatermPtr term;
};
struct TypeInput {
  TypePtr type;
};
using Input = std::variant<TermInput, TypeInput>;
using InputSeq = std::vector<Input>;

struct MatchResult {
  std::vector<TypePtr> arg_types;  // same length as the matched input sequence
  TypePtr residual;
};

// The input-matching relation: the empty sequence matches with residual a,
// a term input consumes an arrow, a type input consumes a quantifier by
// substitution. Deterministic; absence of a result encodes mismatch.
std::optional<MatchResult> match_inputs(Level lv, const TypePtr& a, const InputSeq& inputs);

// Spine decomposition of a term into head and inputs (head is not an
// application).
std::pair<MetatermPtr, InputSeq> decompose_spine(const MetatermPtr& m);

struct NotPure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotNormal : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotRealizer : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ExtractionFuelExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// A state the completeness proof rules out; reaching it signals an engine bug.
struct InternalContradiction : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Beta-normal per the level's normal-form grammar (pseudo-redex heads are
// normal at F and FOmega).
bool is_normal_form(Level lv, const MetatermPtr& m);

// Leftmost-outermost beta-reduction of a pure metaterm to normal form.
MetatermPtr beta_normalize(Level lv, const KindCtx& ctx, const MetatermPtr& m, uint64_t fuel);

// The proof-size measure on normal terms: variable-headed spines whose head
// matches the inputs contribute min(|A|, |A'|) plus argument sizes; matching
// abstractions recurse; everything else contributes 0.
int proof_size(Level lv, const KindCtx& ctx, const TypeEnv& env, const MetatermPtr& nf,
               const TypePtr& a);

struct ExtractResult {
  MetatermPtr normal_form;
  TypingDerivationPtr derivation;
  int size = 0;
  MetatermPtr eta_long;  // the reconstruction the proof types before transport
  uint64_t fuel_used = 0;
};

ExtractResult extract(Level lv, const KindCtx& ctx, const TypeEnv& env, const TypePtr& a,
                      const MetatermPtr& m, uint64_t fuel);

}  // namespace rlz
