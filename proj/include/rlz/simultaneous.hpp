#pragma once

// Simultaneous reduction for the level-F metacalculus, as explicit derivation
// trees. A derivation witnesses src => dst (one parallel step). The diamond
// suite lifts a single reduction step to a derivation, constructs the
// triangle witness dst => complete_development(src), and re-validates the
// result node by node; the validator is independent of the construction.

#include <memory>
#include <vector>

#include "rlz/reduction.hpp"
#include "rlz/syntax.hpp"

namespace rlz {

enum class StoRule {
  SVar,
  SStar,
  SLam,
  SApp1,
  SApp2,
  STLam,
  STApp1,
  STApp2,
  SGuard1,
  SGuard2,
  SGenRefl,
  SGenImp,
  SGenAll,
  SVCong,
  SVEig,
  SVImp,
  SVAll,
  SFresh1,
  SFresh2,
};

std::string sto_rule_name(StoRule r);

struct StoDeriv;
using StoDerivPtr = std::shared_ptr<const StoDeriv>;

struct StoDeriv {
  StoRule rule;
  MetatermPtr src, dst;
  std::vector<StoDerivPtr> prems;
  // Name used to open binder bodies in the premises (SLam, SApp2: term
  // variable; STLam, STApp2: type variable; SFresh1: eigenvariable).
  std::string opened;
};

// src => src, by the congruence/reflexivity rules.
StoDerivPtr sto_refl(const MetatermPtr& m);

// Lift a single reduction step to a parallel-step derivation.
StoDerivPtr sto_lift_step(const Step& step);

// Given a valid derivation d : m => m1, the triangle witness
// m1 => complete_development(m).
StoDerivPtr sto_triangle(const StoDerivPtr& d);

// Substitution lemmas, constructive: from d : M => M' and dn : N => N',
// a derivation M[x:=N] => M'[x:=N'].
StoDerivPtr sto_subst(const StoDerivPtr& d, const std::string& x, const StoDerivPtr& dn);
// From d : M => M', a derivation M[a:=A] => M'[a:=A].
StoDerivPtr sto_subst_tvar(const StoDerivPtr& d, const std::string& a, const TypePtr& ty);

bool sto_validate(const StoDerivPtr& d, std::string* why = nullptr);

}  // namespace rlz
