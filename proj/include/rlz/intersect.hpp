#pragma once

// The non-idempotent intersection type system for the level-F metacalculus:
// derivation data, checker, size measure, constructive weighted substitution,
// weak-head subject reduction, subject expansion, and the derive-from-trace
// builder that machine-checks the standardization argument.
//
// Derivation sizes count every rule instance except Lmulti. Weak-head subject
// reduction strictly decreases the size; folding subject expansion backwards
// over any star-reaching trace types its initial term.

#include <memory>
#include <vector>

#include "rlz/reduction.hpp"
#include "rlz/syntax.hpp"

namespace rlz {

struct LinType;
using LinTypePtr = std::shared_ptr<const LinType>;
// A finite multiset of linear types, kept sorted by a fixed total order.
using LinMulti = std::vector<LinTypePtr>;

struct LinType {
  enum class Tag { Star, Gen, Arrow, ForAll };
  Tag tag;
  std::string eig;  // Gen: generator type for this eigenvariable
  LinMulti dom;     // Arrow
  LinTypePtr cod;   // Arrow
  TypePtr arg;      // ForAll: the instantiating level-F type
  LinTypePtr body;  // ForAll
};

LinTypePtr lt_star();
LinTypePtr lt_gen(std::string eig);
LinTypePtr lt_arrow(LinMulti dom, LinTypePtr cod);
LinTypePtr lt_forall(TypePtr arg, LinTypePtr body);

int lin_cmp(const LinTypePtr& a, const LinTypePtr& b);
bool lin_eq(const LinTypePtr& a, const LinTypePtr& b);
LinMulti multi_sorted(LinMulti m);
LinMulti multi_sum(const LinMulti& a, const LinMulti& b);
bool multi_eq(const LinMulti& a, const LinMulti& b);
std::string lin_show(const LinTypePtr& t);
std::string multi_show(const LinMulti& m);

// Finite-support map from variables to linear multitypes.
class LinEnv {
 public:
  LinEnv() = default;

  const LinMulti& lookup(const std::string& x) const;  // empty when absent
  LinEnv with(const std::string& x, LinMulti m) const;
  LinEnv without(const std::string& x) const;
  LinEnv sum(const LinEnv& other) const;
  bool operator==(const LinEnv& other) const;
  const std::map<std::string, LinMulti>& entries() const { return entries_; }

 private:
  std::map<std::string, LinMulti> entries_;  // no empty multitypes stored
};

enum class LinRule {
  Lvar,
  Llam,
  Lapp,
  Llamt,
  Lappt,
  LStarIntro,
  LGuard,
  LNu,
  LVerEig,
  LVerImp,
  LVerAll,
  LGenEig,
  LGenImp,
  LGenAll,
  Lmulti,
};

std::string lin_rule_name(LinRule r);

struct LinDeriv;
using LinDerivPtr = std::shared_ptr<const LinDeriv>;

struct LinDeriv {
  LinRule rule;
  LinEnv env;
  MetatermPtr subject;  // locally closed
  LinTypePtr type;      // unary judgments
  LinMulti multi;       // Lmulti judgments
  bool is_multi = false;
  std::vector<LinDerivPtr> premises;
  // Name opening the binder in the premise subject (Llam: term variable;
  // LNu: eigenvariable).
  std::string opened;
};

struct InvalidDerivation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotWeakHead : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SubjectMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidTrace : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool check_lderiv(const LinDerivPtr& d, std::string* why = nullptr);

// Node count excluding Lmulti instances. Throws InvalidDerivation when the
// derivation does not check.
size_t lderiv_size(const LinDerivPtr& d);
size_t lderiv_size_unchecked(const LinDerivPtr& d);

// Constructive weighted substitution: from phi :: (E, x:M |- M : T) and
// psi :: (F |- N : M) with x not free in N, a derivation of
// (E + F |- M[x:=N] : T) whose size is size(phi) - |M| + size(psi).
LinDerivPtr subst_lderiv(const LinDerivPtr& phi, const std::string& x, const LinDerivPtr& psi);

// Weak-head subject reduction along a recorded step; the result has the same
// environment and linear type and a strictly smaller size.
LinDerivPtr wh_step_lderiv(const LinDerivPtr& d, const Step& step);

// Subject expansion along any (full-context) step whose reduct is d's
// subject.
LinDerivPtr expand_lderiv(const LinDerivPtr& d, const Step& step);

// Fold expand_lderiv backwards over a star-reaching level-F trace, yielding
// a derivation of |- initial : star.
LinDerivPtr derive_from_trace(const Trace& trace);

}  // namespace rlz
