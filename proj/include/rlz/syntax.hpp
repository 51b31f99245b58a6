#pragma once

// Core syntax: kinds, types and metaterms for the three calculus levels,
// with a locally nameless representation. Bound variables are de Bruijn
// indices in three separate namespaces (term variables, type variables,
// eigenvariables); free variables are names. Binder nodes carry a display
// hint that is ignored by equality.
//
// Invariant: every Kind/Type/Metaterm held outside a traversal is locally
// closed. Binder bodies are only inspected through open_* helpers.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace rlz {

enum class Level { ST, F, FOmega };

std::string level_name(Level lv);
std::optional<Level> level_from_name(const std::string& s);

// ---------------------------------------------------------------------------
// Kinds

struct Kind;
using KindPtr = std::shared_ptr<const Kind>;

struct Kind {
  enum class Tag { Prop, Base, Arrow };
  Tag tag;
  std::string name;   // Base
  KindPtr dom, cod;   // Arrow
};

KindPtr kind_prop();
KindPtr kind_base(std::string name);
KindPtr kind_arrow(KindPtr dom, KindPtr cod);
bool kind_eq(const KindPtr& a, const KindPtr& b);
bool is_prop(const KindPtr& k);

// ---------------------------------------------------------------------------
// Types

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
  enum class Tag {
    TVar,    // free type variable
    TBound,  // type variable bound by ForAll/TLam or a metaterm TyLam
    Eig,     // free eigenvariable
    EBound,  // eigenvariable bound by a metaterm Fresh binder
    Arrow,
    ForAll,  // binds a type variable
    TLam,    // binds a type variable (FOmega only)
    TApp,
  };
  Tag tag;
  std::string name;  // TVar, Eig
  int idx = 0;       // TBound, EBound
  TypePtr a, b;      // Arrow: dom/cod; TApp: fun/arg
  // ForAll, TLam
  std::string hint;
  KindPtr kind;  // Prop when implicit
  TypePtr body;
};

TypePtr t_var(std::string name);
TypePtr t_bound(int idx);
TypePtr t_eig(std::string name);
TypePtr t_ebound(int idx);
TypePtr t_arrow(TypePtr dom, TypePtr cod);
TypePtr t_forall(std::string hint, KindPtr kind, TypePtr body);
TypePtr t_tlam(std::string hint, KindPtr kind, TypePtr body);
TypePtr t_tapp(TypePtr fun, TypePtr arg);

bool type_eq(const TypePtr& a, const TypePtr& b);

// ---------------------------------------------------------------------------
// Metaterms

struct Metaterm;
using MetatermPtr = std::shared_ptr<const Metaterm>;

struct Metaterm {
  enum class Tag {
    Var,    // free term variable
    BVar,   // term variable bound by Lam
    Lam,
    App,
    TyLam,  // binds a type variable
    TyApp,
    Star,
    Guard,  // seq(cond, next)
    Gen,
    Verif,
    Fresh,  // nu, binds an eigenvariable
    Anno,   // surface-only type annotation (t : A); never reaches reduction
  };
  Tag tag;
  std::string name;        // Var
  int idx = 0;             // BVar
  std::string hint;        // Lam, TyLam, Fresh
  KindPtr kind;            // TyLam, Fresh (Prop when implicit)
  MetatermPtr body;        // Lam, TyLam, Fresh
  MetatermPtr fun, arg;    // App; Guard uses fun=cond, arg=next
  TypePtr ty;              // TyApp (argument), Gen, Verif, Anno
  MetatermPtr sub;         // TyApp (function), Verif (argument), Anno (term)
};

MetatermPtr m_var(std::string name);
MetatermPtr m_bvar(int idx);
MetatermPtr m_lam(std::string hint, MetatermPtr body);
MetatermPtr m_app(MetatermPtr fun, MetatermPtr arg);
MetatermPtr m_tylam(std::string hint, KindPtr kind, MetatermPtr body);
MetatermPtr m_tyapp(MetatermPtr fun, TypePtr arg);
MetatermPtr m_star();
MetatermPtr m_guard(MetatermPtr cond, MetatermPtr next);
MetatermPtr m_gen(TypePtr ty);
MetatermPtr m_verif(TypePtr ty, MetatermPtr arg);
MetatermPtr m_fresh(std::string hint, KindPtr kind, MetatermPtr body);
MetatermPtr m_anno(MetatermPtr term, TypePtr ty);

bool term_eq(const MetatermPtr& a, const MetatermPtr& b);

// ---------------------------------------------------------------------------
// Free names

struct FreeNames {
  std::set<std::string> term_vars;
  std::set<std::string> type_vars;
  std::set<std::string> eig_vars;
};

FreeNames free_names(const TypePtr& t);
FreeNames free_names(const MetatermPtr& m);

// ---------------------------------------------------------------------------
// Opening and closing binders.
//
// open_* instantiates the outermost bound index of the given namespace with
// a locally closed replacement; close_* abstracts a free name back into an
// outermost index. All other indices are untouched.

TypePtr open_tvar(const TypePtr& body, const TypePtr& repl);
TypePtr close_tvar(const TypePtr& t, const std::string& name);
TypePtr open_eig_in_type(const TypePtr& body, const std::string& eig_name);
TypePtr close_eig_in_type(const TypePtr& t, const std::string& eig_name);

MetatermPtr open_term(const MetatermPtr& body, const MetatermPtr& repl);
MetatermPtr close_term(const MetatermPtr& m, const std::string& name);
MetatermPtr open_tvar_in_term(const MetatermPtr& body, const TypePtr& repl);
MetatermPtr close_tvar_in_term(const MetatermPtr& m, const std::string& name);
MetatermPtr open_eig_in_term(const MetatermPtr& body, const std::string& eig_name);
MetatermPtr close_eig_in_term(const MetatermPtr& m, const std::string& eig_name);

// True iff the body under one binder of the given namespace never uses it.
bool term_binder_unused(const MetatermPtr& body);
bool tvar_binder_unused_in_term(const MetatermPtr& body);
bool eig_binder_unused_in_term(const MetatermPtr& body);
bool tvar_binder_unused_in_type(const TypePtr& body);

// ---------------------------------------------------------------------------
// Capture-avoiding substitution of free names

struct SortError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using TermSubst = std::map<std::string, MetatermPtr>;
using TypeSubst = std::map<std::string, TypePtr>;

MetatermPtr subst_term(const MetatermPtr& m, const TermSubst& s);
TypePtr subst_tvar(const TypePtr& t, const TypeSubst& s);
MetatermPtr subst_tvar_in_term(const MetatermPtr& m, const TypeSubst& s);
// Renaming of free eigenvariables (internal; eigenvariables are constants
// for ordinary substitution).
TypePtr subst_eig(const TypePtr& t, const TypeSubst& s);
MetatermPtr subst_eig_in_term(const MetatermPtr& m, const TypeSubst& s);

// ---------------------------------------------------------------------------
// Predicates, normalization and equivalence

bool is_pure(const MetatermPtr& m);
bool has_annotations(const MetatermPtr& m);
MetatermPtr erase_annotations(const MetatermPtr& m);

struct LevelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Throws LevelError when the AST uses a construct illegal at the level.
void require_level_ok(Level lv, const TypePtr& t);
void require_level_ok(Level lv, const MetatermPtr& m);
bool level_ok(Level lv, const MetatermPtr& m);

// Full beta-normalization at the type level. Types are simply kinded, so
// this terminates on well-kinded inputs; a step limit guards the rest.
TypePtr normalize_type(const TypePtr& t);

// Canonical representative of the tau-equivalence class: at FOmega all
// embedded types are beta-normalized, at ST/F the term is returned as is.
MetatermPtr canonicalize(Level lv, const MetatermPtr& m);
TypePtr canonicalize_type(Level lv, const TypePtr& t);

// Alpha-equivalence at ST/F, tau-equivalence at FOmega.
bool equiv(Level lv, const MetatermPtr& lhs, const MetatermPtr& rhs);
bool equiv_type(Level lv, const TypePtr& lhs, const TypePtr& rhs);

int type_size(const TypePtr& t);  // |a| = 1, |A->B| = 1+|A|+|B|, |forall a.B| = 1+|B|

// ---------------------------------------------------------------------------
// Environments

// Ordered map from term variables to types.
class TypeEnv {
 public:
  TypeEnv() = default;

  bool contains(const std::string& x) const;
  std::optional<TypePtr> lookup(const std::string& x) const;
  // Throws std::invalid_argument when x is already bound.
  TypeEnv extended(const std::string& x, TypePtr a) const;
  TypeEnv without(const std::string& x) const;

  const std::vector<std::pair<std::string, TypePtr>>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  size_t size() const { return entries_.size(); }

 private:
  std::vector<std::pair<std::string, TypePtr>> entries_;
};

// Kinds of free type variables and eigenvariables (the global assignment).
class KindCtx {
 public:
  KindCtx() = default;

  std::optional<KindPtr> tvar_kind(const std::string& a) const;
  std::optional<KindPtr> eig_kind(const std::string& a) const;
  KindCtx with_tvar(const std::string& a, KindPtr k) const;
  KindCtx with_eig(const std::string& a, KindPtr k) const;

  const std::map<std::string, KindPtr>& tvars() const { return tvars_; }
  const std::map<std::string, KindPtr>& eigs() const { return eigs_; }

 private:
  std::map<std::string, KindPtr> tvars_;
  std::map<std::string, KindPtr> eigs_;
};

// Deterministic fresh-name supply: #g0, #g1, ... for eigenvariables,
// x0, x1, ... for term variables, a0, a1, ... for type variables,
// skipping names in the avoid set.
class NameSupply {
 public:
  std::string fresh_eig(const std::set<std::string>& avoid);
  std::string fresh_term(const std::set<std::string>& avoid);
  std::string fresh_tvar(const std::set<std::string>& avoid);

 private:
  int eig_ = 0, term_ = 0, tvar_ = 0;
};

}  // namespace rlz
