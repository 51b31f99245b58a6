#include "rlz/syntax.hpp"

#include <algorithm>
#include <cassert>

namespace rlz {

std::string level_name(Level lv) {
  switch (lv) {
    case Level::ST: return "st";
    case Level::F: return "f";
    case Level::FOmega: return "fw";
  }
  return "?";
}

std::optional<Level> level_from_name(const std::string& s) {
  if (s == "st") return Level::ST;
  if (s == "f") return Level::F;
  if (s == "fw" || s == "fomega") return Level::FOmega;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Builders

KindPtr kind_prop() {
  static const KindPtr p = std::make_shared<Kind>(Kind{Kind::Tag::Prop, "", nullptr, nullptr});
  return p;
}
KindPtr kind_base(std::string name) {
  return std::make_shared<Kind>(Kind{Kind::Tag::Base, std::move(name), nullptr, nullptr});
}
KindPtr kind_arrow(KindPtr dom, KindPtr cod) {
  return std::make_shared<Kind>(Kind{Kind::Tag::Arrow, "", std::move(dom), std::move(cod)});
}

bool kind_eq(const KindPtr& a, const KindPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->tag != b->tag) return false;
  switch (a->tag) {
    case Kind::Tag::Prop: return true;
    case Kind::Tag::Base: return a->name == b->name;
    case Kind::Tag::Arrow: return kind_eq(a->dom, b->dom) && kind_eq(a->cod, b->cod);
  }
  return false;
}

bool is_prop(const KindPtr& k) { return k && k->tag == Kind::Tag::Prop; }

static TypePtr mk_type(Type t) { return std::make_shared<Type>(std::move(t)); }

TypePtr t_var(std::string name) {
  Type t{}; t.tag = Type::Tag::TVar; t.name = std::move(name); return mk_type(std::move(t));
}
TypePtr t_bound(int idx) {
  Type t{}; t.tag = Type::Tag::TBound; t.idx = idx; return mk_type(std::move(t));
}
TypePtr t_eig(std::string name) {
  Type t{}; t.tag = Type::Tag::Eig; t.name = std::move(name); return mk_type(std::move(t));
}
TypePtr t_ebound(int idx) {
  Type t{}; t.tag = Type::Tag::EBound; t.idx = idx; return mk_type(std::move(t));
}
TypePtr t_arrow(TypePtr dom, TypePtr cod) {
  Type t{}; t.tag = Type::Tag::Arrow; t.a = std::move(dom); t.b = std::move(cod);
  return mk_type(std::move(t));
}
TypePtr t_forall(std::string hint, KindPtr kind, TypePtr body) {
  Type t{}; t.tag = Type::Tag::ForAll; t.hint = std::move(hint);
  t.kind = kind ? std::move(kind) : kind_prop(); t.body = std::move(body);
  return mk_type(std::move(t));
}
TypePtr t_tlam(std::string hint, KindPtr kind, TypePtr body) {
  Type t{}; t.tag = Type::Tag::TLam; t.hint = std::move(hint);
  t.kind = kind ? std::move(kind) : kind_prop(); t.body = std::move(body);
  return mk_type(std::move(t));
}
TypePtr t_tapp(TypePtr fun, TypePtr arg) {
  Type t{}; t.tag = Type::Tag::TApp; t.a = std::move(fun); t.b = std::move(arg);
  return mk_type(std::move(t));
}

bool type_eq(const TypePtr& a, const TypePtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->tag != b->tag) return false;
  switch (a->tag) {
    case Type::Tag::TVar:
    case Type::Tag::Eig: return a->name == b->name;
    case Type::Tag::TBound:
    case Type::Tag::EBound: return a->idx == b->idx;
    case Type::Tag::Arrow:
    case Type::Tag::TApp: return type_eq(a->a, b->a) && type_eq(a->b, b->b);
    case Type::Tag::ForAll:
    case Type::Tag::TLam:
      return kind_eq(a->kind, b->kind) && type_eq(a->body, b->body);
  }
  return false;
}

static MetatermPtr mk_term(Metaterm m) { return std::make_shared<Metaterm>(std::move(m)); }

MetatermPtr m_var(std::string name) {
  Metaterm m{}; m.tag = Metaterm::Tag::Var; m.name = std::move(name); return mk_term(std::move(m));
}
MetatermPtr m_bvar(int idx) {
  Metaterm m{}; m.tag = Metaterm::Tag::BVar; m.idx = idx; return mk_term(std::move(m));
}
MetatermPtr m_lam(std::string hint, MetatermPtr body) {
  Metaterm m{}; m.tag = Metaterm::Tag::Lam; m.hint = std::move(hint); m.body = std::move(body);
  return mk_term(std::move(m));
}
MetatermPtr m_app(MetatermPtr fun, MetatermPtr arg) {
  Metaterm m{}; m.tag = Metaterm::Tag::App; m.fun = std::move(fun); m.arg = std::move(arg);
  return mk_term(std::move(m));
}
MetatermPtr m_tylam(std::string hint, KindPtr kind, MetatermPtr body) {
  Metaterm m{}; m.tag = Metaterm::Tag::TyLam; m.hint = std::move(hint);
  m.kind = kind ? std::move(kind) : kind_prop(); m.body = std::move(body);
  return mk_term(std::move(m));
}
MetatermPtr m_tyapp(MetatermPtr fun, TypePtr arg) {
  Metaterm m{}; m.tag = Metaterm::Tag::TyApp; m.sub = std::move(fun); m.ty = std::move(arg);
  return mk_term(std::move(m));
}
MetatermPtr m_star() {
  static const MetatermPtr s = [] {
    Metaterm m{}; m.tag = Metaterm::Tag::Star; return mk_term(std::move(m));
  }();
  return s;
}
MetatermPtr m_guard(MetatermPtr cond, MetatermPtr next) {
  Metaterm m{}; m.tag = Metaterm::Tag::Guard; m.fun = std::move(cond); m.arg = std::move(next);
  return mk_term(std::move(m));
}
MetatermPtr m_gen(TypePtr ty) {
  Metaterm m{}; m.tag = Metaterm::Tag::Gen; m.ty = std::move(ty); return mk_term(std::move(m));
}
MetatermPtr m_verif(TypePtr ty, MetatermPtr arg) {
  Metaterm m{}; m.tag = Metaterm::Tag::Verif; m.ty = std::move(ty); m.sub = std::move(arg);
  return mk_term(std::move(m));
}
MetatermPtr m_fresh(std::string hint, KindPtr kind, MetatermPtr body) {
  Metaterm m{}; m.tag = Metaterm::Tag::Fresh; m.hint = std::move(hint);
  m.kind = kind ? std::move(kind) : kind_prop(); m.body = std::move(body);
  return mk_term(std::move(m));
}
MetatermPtr m_anno(MetatermPtr term, TypePtr ty) {
  Metaterm m{}; m.tag = Metaterm::Tag::Anno; m.sub = std::move(term); m.ty = std::move(ty);
  return mk_term(std::move(m));
}

bool term_eq(const MetatermPtr& a, const MetatermPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->tag != b->tag) return false;
  switch (a->tag) {
    case Metaterm::Tag::Var: return a->name == b->name;
    case Metaterm::Tag::BVar: return a->idx == b->idx;
    case Metaterm::Tag::Star: return true;
    case Metaterm::Tag::Lam: return term_eq(a->body, b->body);
    case Metaterm::Tag::App:
    case Metaterm::Tag::Guard: return term_eq(a->fun, b->fun) && term_eq(a->arg, b->arg);
    case Metaterm::Tag::TyLam:
    case Metaterm::Tag::Fresh:
      return kind_eq(a->kind, b->kind) && term_eq(a->body, b->body);
    case Metaterm::Tag::TyApp: return term_eq(a->sub, b->sub) && type_eq(a->ty, b->ty);
    case Metaterm::Tag::Gen: return type_eq(a->ty, b->ty);
    case Metaterm::Tag::Verif: return type_eq(a->ty, b->ty) && term_eq(a->sub, b->sub);
    case Metaterm::Tag::Anno: return term_eq(a->sub, b->sub) && type_eq(a->ty, b->ty);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Free names

static void collect_type(const TypePtr& t, FreeNames& out) {
  switch (t->tag) {
    case Type::Tag::TVar: out.type_vars.insert(t->name); break;
    case Type::Tag::Eig: out.eig_vars.insert(t->name); break;
    case Type::Tag::TBound:
    case Type::Tag::EBound: break;
    case Type::Tag::Arrow:
    case Type::Tag::TApp:
      collect_type(t->a, out);
      collect_type(t->b, out);
      break;
    case Type::Tag::ForAll:
    case Type::Tag::TLam: collect_type(t->body, out); break;
  }
}

static void collect_term(const MetatermPtr& m, FreeNames& out) {
  switch (m->tag) {
    case Metaterm::Tag::Var: out.term_vars.insert(m->name); break;
    case Metaterm::Tag::BVar:
    case Metaterm::Tag::Star: break;
    case Metaterm::Tag::Lam:
    case Metaterm::Tag::TyLam:
    case Metaterm::Tag::Fresh: collect_term(m->body, out); break;
    case Metaterm::Tag::App:
    case Metaterm::Tag::Guard:
      collect_term(m->fun, out);
      collect_term(m->arg, out);
      break;
    case Metaterm::Tag::TyApp:
      collect_term(m->sub, out);
      collect_type(m->ty, out);
      break;
    case Metaterm::Tag::Gen: collect_type(m->ty, out); break;
    case Metaterm::Tag::Verif:
    case Metaterm::Tag::Anno:
      collect_type(m->ty, out);
      collect_term(m->sub, out);
      break;
  }
}

FreeNames free_names(const TypePtr& t) {
  FreeNames out;
  collect_type(t, out);
  return out;
}
FreeNames free_names(const MetatermPtr& m) {
  FreeNames out;
  collect_term(m, out);
  return out;
}

// ---------------------------------------------------------------------------
// Generic traversal for open/close/substitution.
//
// Each operation is parameterized by three callbacks applied at variable
// occurrences. Depth counters track how many binders of each namespace we
// crossed. The callbacks receive the node and the relevant depth and either
// return a replacement (locally closed at its own level; it is used as is)
// or null to keep the node.

namespace {

struct TypeVisitor {
  // (node, tvar_depth) and (node, eig_depth)
  std::function<TypePtr(const Type&, int)> on_tvarish;  // TVar and TBound nodes
  std::function<TypePtr(const Type&, int)> on_eigish;   // Eig and EBound nodes
};

TypePtr walk_type(const TypePtr& t, const TypeVisitor& v, int td, int ed) {
  switch (t->tag) {
    case Type::Tag::TVar:
    case Type::Tag::TBound: {
      if (v.on_tvarish) {
        if (TypePtr r = v.on_tvarish(*t, td)) return r;
      }
      return t;
    }
    case Type::Tag::Eig:
    case Type::Tag::EBound: {
      if (v.on_eigish) {
        if (TypePtr r = v.on_eigish(*t, ed)) return r;
      }
      return t;
    }
    case Type::Tag::Arrow: {
      TypePtr a = walk_type(t->a, v, td, ed);
      TypePtr b = walk_type(t->b, v, td, ed);
      if (a == t->a && b == t->b) return t;
      return t_arrow(a, b);
    }
    case Type::Tag::TApp: {
      TypePtr a = walk_type(t->a, v, td, ed);
      TypePtr b = walk_type(t->b, v, td, ed);
      if (a == t->a && b == t->b) return t;
      return t_tapp(a, b);
    }
    case Type::Tag::ForAll: {
      TypePtr body = walk_type(t->body, v, td + 1, ed);
      if (body == t->body) return t;
      return t_forall(t->hint, t->kind, body);
    }
    case Type::Tag::TLam: {
      TypePtr body = walk_type(t->body, v, td + 1, ed);
      if (body == t->body) return t;
      return t_tlam(t->hint, t->kind, body);
    }
  }
  return t;
}

struct TermVisitor {
  std::function<MetatermPtr(const Metaterm&, int)> on_varish;  // Var and BVar nodes
  TypeVisitor type_visitor;
  bool has_type_visitor = false;
};

// A replacement term inserted under binders is locally closed, so indices
// inside it never need shifting; same for replacement types.
MetatermPtr walk_term(const MetatermPtr& m, const TermVisitor& v, int vd, int td, int ed) {
  auto wt = [&](const TypePtr& t) {
    return v.has_type_visitor ? walk_type(t, v.type_visitor, td, ed) : t;
  };
  switch (m->tag) {
    case Metaterm::Tag::Var:
    case Metaterm::Tag::BVar: {
      if (v.on_varish) {
        if (MetatermPtr r = v.on_varish(*m, vd)) return r;
      }
      return m;
    }
    case Metaterm::Tag::Star: return m;
    case Metaterm::Tag::Lam: {
      MetatermPtr body = walk_term(m->body, v, vd + 1, td, ed);
      if (body == m->body) return m;
      return m_lam(m->hint, body);
    }
    case Metaterm::Tag::TyLam: {
      MetatermPtr body = walk_term(m->body, v, vd, td + 1, ed);
      if (body == m->body) return m;
      return m_tylam(m->hint, m->kind, body);
    }
    case Metaterm::Tag::Fresh: {
      MetatermPtr body = walk_term(m->body, v, vd, td, ed + 1);
      if (body == m->body) return m;
      return m_fresh(m->hint, m->kind, body);
    }
    case Metaterm::Tag::App: {
      MetatermPtr f = walk_term(m->fun, v, vd, td, ed);
      MetatermPtr a = walk_term(m->arg, v, vd, td, ed);
      if (f == m->fun && a == m->arg) return m;
      return m_app(f, a);
    }
    case Metaterm::Tag::Guard: {
      MetatermPtr c = walk_term(m->fun, v, vd, td, ed);
      MetatermPtr n = walk_term(m->arg, v, vd, td, ed);
      if (c == m->fun && n == m->arg) return m;
      return m_guard(c, n);
    }
    case Metaterm::Tag::TyApp: {
      MetatermPtr f = walk_term(m->sub, v, vd, td, ed);
      TypePtr t = wt(m->ty);
      if (f == m->sub && t == m->ty) return m;
      return m_tyapp(f, t);
    }
    case Metaterm::Tag::Gen: {
      TypePtr t = wt(m->ty);
      if (t == m->ty) return m;
      return m_gen(t);
    }
    case Metaterm::Tag::Verif: {
      TypePtr t = wt(m->ty);
      MetatermPtr a = walk_term(m->sub, v, vd, td, ed);
      if (t == m->ty && a == m->sub) return m;
      return m_verif(t, a);
    }
    case Metaterm::Tag::Anno: {
      MetatermPtr a = walk_term(m->sub, v, vd, td, ed);
      TypePtr t = wt(m->ty);
      if (t == m->ty && a == m->sub) return m;
      return m_anno(a, t);
    }
  }
  return m;
}

}  // namespace

TypePtr open_tvar(const TypePtr& body, const TypePtr& repl) {
  TypeVisitor v;
  v.on_tvarish = [&](const Type& t, int d) -> TypePtr {
    if (t.tag == Type::Tag::TBound && t.idx == d) return repl;
    return nullptr;
  };
  return walk_type(body, v, 0, 0);
}

TypePtr close_tvar(const TypePtr& t, const std::string& name) {
  TypeVisitor v;
  v.on_tvarish = [&](const Type& ty, int d) -> TypePtr {
    if (ty.tag == Type::Tag::TVar && ty.name == name) return t_bound(d);
    return nullptr;
  };
  return walk_type(t, v, 0, 0);
}

TypePtr open_eig_in_type(const TypePtr& body, const std::string& eig_name) {
  TypeVisitor v;
  v.on_eigish = [&](const Type& t, int d) -> TypePtr {
    if (t.tag == Type::Tag::EBound && t.idx == d) return t_eig(eig_name);
    return nullptr;
  };
  return walk_type(body, v, 0, 0);
}

TypePtr close_eig_in_type(const TypePtr& t, const std::string& eig_name) {
  TypeVisitor v;
  v.on_eigish = [&](const Type& ty, int d) -> TypePtr {
    if (ty.tag == Type::Tag::Eig && ty.name == eig_name) return t_ebound(d);
    return nullptr;
  };
  return walk_type(t, v, 0, 0);
}

MetatermPtr open_term(const MetatermPtr& body, const MetatermPtr& repl) {
  TermVisitor v;
  v.on_varish = [&](const Metaterm& m, int d) -> MetatermPtr {
    if (m.tag == Metaterm::Tag::BVar && m.idx == d) return repl;
    return nullptr;
  };
  return walk_term(body, v, 0, 0, 0);
}

MetatermPtr close_term(const MetatermPtr& m, const std::string& name) {
  TermVisitor v;
  v.on_varish = [&](const Metaterm& t, int d) -> MetatermPtr {
    if (t.tag == Metaterm::Tag::Var && t.name == name) return m_bvar(d);
    return nullptr;
  };
  return walk_term(m, v, 0, 0, 0);
}

MetatermPtr open_tvar_in_term(const MetatermPtr& body, const TypePtr& repl) {
  TermVisitor v;
  v.has_type_visitor = true;
  v.type_visitor.on_tvarish = [&](const Type& t, int d) -> TypePtr {
    if (t.tag == Type::Tag::TBound && t.idx == d) return repl;
    return nullptr;
  };
  return walk_term(body, v, 0, 0, 0);
}

MetatermPtr close_tvar_in_term(const MetatermPtr& m, const std::string& name) {
  TermVisitor v;
  v.has_type_visitor = true;
  v.type_visitor.on_tvarish = [&](const Type& t, int d) -> TypePtr {
    if (t.tag == Type::Tag::TVar && t.name == name) return t_bound(d);
    return nullptr;
  };
  return walk_term(m, v, 0, 0, 0);
}

MetatermPtr open_eig_in_term(const MetatermPtr& body, const std::string& eig_name) {
  TermVisitor v;
  v.has_type_visitor = true;
  v.type_visitor.on_eigish = [&](const Type& t, int d) -> TypePtr {
    if (t.tag == Type::Tag::EBound && t.idx == d) return t_eig(eig_name);
    return nullptr;
  };
  return walk_term(body, v, 0, 0, 0);
}

MetatermPtr close_eig_in_term(const MetatermPtr& m, const std::string& eig_name) {
  TermVisitor v;
  v.has_type_visitor = true;
  v.type_visitor.on_eigish = [&](const Type& t, int d) -> TypePtr {
    if (t.tag == Type::Tag::Eig && t.name == eig_name) return t_ebound(d);
    return nullptr;
  };
  return walk_term(m, v, 0, 0, 0);
}

namespace {

bool term_uses_binder(const MetatermPtr& m, int vd, int td, int ed, int which);
// which: 0 = term bvar, 1 = tvar bound, 2 = eig bound

bool type_uses_binder(const TypePtr& t, int td, int ed, int which) {
  switch (t->tag) {
    case Type::Tag::TVar:
    case Type::Tag::Eig: return false;
    case Type::Tag::TBound: return which == 1 && t->idx == td;
    case Type::Tag::EBound: return which == 2 && t->idx == ed;
    case Type::Tag::Arrow:
    case Type::Tag::TApp:
      return type_uses_binder(t->a, td, ed, which) || type_uses_binder(t->b, td, ed, which);
    case Type::Tag::ForAll:
    case Type::Tag::TLam: return type_uses_binder(t->body, td + 1, ed, which);
  }
  return false;
}

bool term_uses_binder(const MetatermPtr& m, int vd, int td, int ed, int which) {
  switch (m->tag) {
    case Metaterm::Tag::Var:
    case Metaterm::Tag::Star: return false;
    case Metaterm::Tag::BVar: return which == 0 && m->idx == vd;
    case Metaterm::Tag::Lam: return term_uses_binder(m->body, vd + 1, td, ed, which);
    case Metaterm::Tag::TyLam: return term_uses_binder(m->body, vd, td + 1, ed, which);
    case Metaterm::Tag::Fresh: return term_uses_binder(m->body, vd, td, ed + 1, which);
    case Metaterm::Tag::App:
    case Metaterm::Tag::Guard:
      return term_uses_binder(m->fun, vd, td, ed, which) ||
             term_uses_binder(m->arg, vd, td, ed, which);
    case Metaterm::Tag::TyApp:
      return term_uses_binder(m->sub, vd, td, ed, which) ||
             type_uses_binder(m->ty, td, ed, which);
    case Metaterm::Tag::Gen: return type_uses_binder(m->ty, td, ed, which);
    case Metaterm::Tag::Verif:
    case Metaterm::Tag::Anno:
      return type_uses_binder(m->ty, td, ed, which) ||
             term_uses_binder(m->sub, vd, td, ed, which);
  }
  return false;
}

}  // namespace

bool term_binder_unused(const MetatermPtr& body) {
  return !term_uses_binder(body, 0, 0, 0, 0);
}
bool tvar_binder_unused_in_term(const MetatermPtr& body) {
  return !term_uses_binder(body, 0, 0, 0, 1);
}
bool eig_binder_unused_in_term(const MetatermPtr& body) {
  return !term_uses_binder(body, 0, 0, 0, 2);
}
bool tvar_binder_unused_in_type(const TypePtr& body) {
  return !type_uses_binder(body, 0, 0, 1);
}

// ---------------------------------------------------------------------------
// Substitution of free names

MetatermPtr subst_term(const MetatermPtr& m, const TermSubst& s) {
  if (s.empty()) return m;
  TermVisitor v;
  v.on_varish = [&](const Metaterm& t, int) -> MetatermPtr {
    if (t.tag == Metaterm::Tag::Var) {
      auto it = s.find(t.name);
      if (it != s.end()) return it->second;
    }
    return nullptr;
  };
  return walk_term(m, v, 0, 0, 0);
}

TypePtr subst_tvar(const TypePtr& t, const TypeSubst& s) {
  if (s.empty()) return t;
  TypeVisitor v;
  v.on_tvarish = [&](const Type& ty, int) -> TypePtr {
    if (ty.tag == Type::Tag::TVar) {
      auto it = s.find(ty.name);
      if (it != s.end()) return it->second;
    }
    return nullptr;
  };
  return walk_type(t, v, 0, 0);
}

MetatermPtr subst_tvar_in_term(const MetatermPtr& m, const TypeSubst& s) {
  if (s.empty()) return m;
  TermVisitor v;
  v.has_type_visitor = true;
  v.type_visitor.on_tvarish = [&](const Type& ty, int) -> TypePtr {
    if (ty.tag == Type::Tag::TVar) {
      auto it = s.find(ty.name);
      if (it != s.end()) return it->second;
    }
    return nullptr;
  };
  return walk_term(m, v, 0, 0, 0);
}

TypePtr subst_eig(const TypePtr& t, const TypeSubst& s) {
  if (s.empty()) return t;
  TypeVisitor v;
  v.on_eigish = [&](const Type& ty, int) -> TypePtr {
    if (ty.tag == Type::Tag::Eig) {
      auto it = s.find(ty.name);
      if (it != s.end()) return it->second;
    }
    return nullptr;
  };
  return walk_type(t, v, 0, 0);
}

MetatermPtr subst_eig_in_term(const MetatermPtr& m, const TypeSubst& s) {
  if (s.empty()) return m;
  TermVisitor v;
  v.has_type_visitor = true;
  v.type_visitor.on_eigish = [&](const Type& ty, int) -> TypePtr {
    if (ty.tag == Type::Tag::Eig) {
      auto it = s.find(ty.name);
      if (it != s.end()) return it->second;
    }
    return nullptr;
  };
  return walk_term(m, v, 0, 0, 0);
}

// ---------------------------------------------------------------------------
// Predicates

bool is_pure(const MetatermPtr& m) {
  switch (m->tag) {
    case Metaterm::Tag::Var:
    case Metaterm::Tag::BVar: return true;
    case Metaterm::Tag::Lam:
    case Metaterm::Tag::TyLam: return is_pure(m->body);
    case Metaterm::Tag::App: return is_pure(m->fun) && is_pure(m->arg);
    case Metaterm::Tag::TyApp: return is_pure(m->sub);
    default: return false;
  }
}

bool has_annotations(const MetatermPtr& m) {
  switch (m->tag) {
    case Metaterm::Tag::Anno: return true;
    case Metaterm::Tag::Lam:
    case Metaterm::Tag::TyLam:
    case Metaterm::Tag::Fresh: return has_annotations(m->body);
    case Metaterm::Tag::App:
    case Metaterm::Tag::Guard: return has_annotations(m->fun) || has_annotations(m->arg);
    case Metaterm::Tag::TyApp:
    case Metaterm::Tag::Verif: return has_annotations(m->sub);
    default: return false;
  }
}

MetatermPtr erase_annotations(const MetatermPtr& m) {
  switch (m->tag) {
    case Metaterm::Tag::Anno: return erase_annotations(m->sub);
    case Metaterm::Tag::Lam: {
      auto b = erase_annotations(m->body);
      return b == m->body ? m : m_lam(m->hint, b);
    }
    case Metaterm::Tag::TyLam: {
      auto b = erase_annotations(m->body);
      return b == m->body ? m : m_tylam(m->hint, m->kind, b);
    }
    case Metaterm::Tag::Fresh: {
      auto b = erase_annotations(m->body);
      return b == m->body ? m : m_fresh(m->hint, m->kind, b);
    }
    case Metaterm::Tag::App: {
      auto f = erase_annotations(m->fun), a = erase_annotations(m->arg);
      return f == m->fun && a == m->arg ? m : m_app(f, a);
    }
    case Metaterm::Tag::Guard: {
      auto f = erase_annotations(m->fun), a = erase_annotations(m->arg);
      return f == m->fun && a == m->arg ? m : m_guard(f, a);
    }
    case Metaterm::Tag::TyApp: {
      auto f = erase_annotations(m->sub);
      return f == m->sub ? m : m_tyapp(f, m->ty);
    }
    case Metaterm::Tag::Verif: {
      auto a = erase_annotations(m->sub);
      return a == m->sub ? m : m_verif(m->ty, a);
    }
    default: return m;
  }
}

// ---------------------------------------------------------------------------
// Level checks

void require_level_ok(Level lv, const TypePtr& t) {
  switch (t->tag) {
    case Type::Tag::TVar:
      if (lv == Level::ST) throw LevelError("type variables are not part of the ST level");
      return;
    case Type::Tag::TBound:
    case Type::Tag::Eig:
    case Type::Tag::EBound: return;
    case Type::Tag::Arrow:
      require_level_ok(lv, t->a);
      require_level_ok(lv, t->b);
      return;
    case Type::Tag::ForAll:
      if (lv == Level::ST) throw LevelError("forall is not part of the ST level");
      if (lv == Level::F && !is_prop(t->kind))
        throw LevelError("non-Prop quantifier kinds require level fw");
      require_level_ok(lv, t->body);
      return;
    case Type::Tag::TLam:
      if (lv != Level::FOmega) throw LevelError("type-level lambda requires level fw");
      require_level_ok(lv, t->body);
      return;
    case Type::Tag::TApp:
      if (lv != Level::FOmega) throw LevelError("type application requires level fw");
      require_level_ok(lv, t->a);
      require_level_ok(lv, t->b);
      return;
  }
}

void require_level_ok(Level lv, const MetatermPtr& m) {
  switch (m->tag) {
    case Metaterm::Tag::Var:
    case Metaterm::Tag::BVar:
    case Metaterm::Tag::Star: return;
    case Metaterm::Tag::Lam: require_level_ok(lv, m->body); return;
    case Metaterm::Tag::TyLam:
      if (lv == Level::ST) throw LevelError("type abstraction is not part of the ST level");
      if (lv == Level::F && !is_prop(m->kind))
        throw LevelError("non-Prop binder kinds require level fw");
      require_level_ok(lv, m->body);
      return;
    case Metaterm::Tag::Fresh:
      if (lv == Level::ST) throw LevelError("nu binders are not part of the ST level");
      if (lv == Level::F && !is_prop(m->kind))
        throw LevelError("non-Prop binder kinds require level fw");
      require_level_ok(lv, m->body);
      return;
    case Metaterm::Tag::App:
    case Metaterm::Tag::Guard:
      require_level_ok(lv, m->fun);
      require_level_ok(lv, m->arg);
      return;
    case Metaterm::Tag::TyApp:
      if (lv == Level::ST) throw LevelError("type application is not part of the ST level");
      require_level_ok(lv, m->sub);
      require_level_ok(lv, m->ty);
      return;
    case Metaterm::Tag::Gen: require_level_ok(lv, m->ty); return;
    case Metaterm::Tag::Verif:
    case Metaterm::Tag::Anno:
      require_level_ok(lv, m->ty);
      require_level_ok(lv, m->sub);
      return;
  }
}

bool level_ok(Level lv, const MetatermPtr& m) {
  try {
    require_level_ok(lv, m);
    return true;
  } catch (const LevelError&) {
    return false;
  }
}

// ---------------------------------------------------------------------------
// Type normalization (beta at the type level, normal order)

namespace {

// Substitute the outermost TBound with repl, used for type-level beta.
TypePtr normalize_type_rec(const TypePtr& t, int budget, int& used) {
  if (++used > budget) throw std::runtime_error("type normalization budget exceeded");
  switch (t->tag) {
    case Type::Tag::TVar:
    case Type::Tag::TBound:
    case Type::Tag::Eig:
    case Type::Tag::EBound: return t;
    case Type::Tag::Arrow: {
      TypePtr a = normalize_type_rec(t->a, budget, used);
      TypePtr b = normalize_type_rec(t->b, budget, used);
      return (a == t->a && b == t->b) ? t : t_arrow(a, b);
    }
    case Type::Tag::ForAll: {
      TypePtr body = normalize_type_rec(t->body, budget, used);
      return body == t->body ? t : t_forall(t->hint, t->kind, body);
    }
    case Type::Tag::TLam: {
      TypePtr body = normalize_type_rec(t->body, budget, used);
      return body == t->body ? t : t_tlam(t->hint, t->kind, body);
    }
    case Type::Tag::TApp: {
      TypePtr f = normalize_type_rec(t->a, budget, used);
      if (f->tag == Type::Tag::TLam) {
        TypePtr contracted = open_tvar(f->body, t->b);
        return normalize_type_rec(contracted, budget, used);
      }
      TypePtr b = normalize_type_rec(t->b, budget, used);
      return (f == t->a && b == t->b) ? t : t_tapp(f, b);
    }
  }
  return t;
}

}  // namespace

TypePtr normalize_type(const TypePtr& t) {
  int used = 0;
  return normalize_type_rec(t, 1000000, used);
}

TypePtr canonicalize_type(Level lv, const TypePtr& t) {
  return lv == Level::FOmega ? normalize_type(t) : t;
}

MetatermPtr canonicalize(Level lv, const MetatermPtr& m) {
  if (lv != Level::FOmega) return m;
  TermVisitor v;
  v.has_type_visitor = true;
  // Types are normalized wholesale at embedding points rather than through
  // the node visitor, so do a structural rewrite here instead.
  switch (m->tag) {
    case Metaterm::Tag::Var:
    case Metaterm::Tag::BVar:
    case Metaterm::Tag::Star: return m;
    case Metaterm::Tag::Lam: {
      auto b = canonicalize(lv, m->body);
      return b == m->body ? m : m_lam(m->hint, b);
    }
    case Metaterm::Tag::TyLam: {
      auto b = canonicalize(lv, m->body);
      return b == m->body ? m : m_tylam(m->hint, m->kind, b);
    }
    case Metaterm::Tag::Fresh: {
      auto b = canonicalize(lv, m->body);
      return b == m->body ? m : m_fresh(m->hint, m->kind, b);
    }
    case Metaterm::Tag::App: {
      auto f = canonicalize(lv, m->fun), a = canonicalize(lv, m->arg);
      return f == m->fun && a == m->arg ? m : m_app(f, a);
    }
    case Metaterm::Tag::Guard: {
      auto f = canonicalize(lv, m->fun), a = canonicalize(lv, m->arg);
      return f == m->fun && a == m->arg ? m : m_guard(f, a);
    }
    case Metaterm::Tag::TyApp: {
      auto f = canonicalize(lv, m->sub);
      auto t = normalize_type(m->ty);
      return f == m->sub && t == m->ty ? m : m_tyapp(f, t);
    }
    case Metaterm::Tag::Gen: {
      auto t = normalize_type(m->ty);
      return t == m->ty ? m : m_gen(t);
    }
    case Metaterm::Tag::Verif: {
      auto t = normalize_type(m->ty);
      auto a = canonicalize(lv, m->sub);
      return t == m->ty && a == m->sub ? m : m_verif(t, a);
    }
    case Metaterm::Tag::Anno: {
      auto a = canonicalize(lv, m->sub);
      auto t = normalize_type(m->ty);
      return t == m->ty && a == m->sub ? m : m_anno(a, t);
    }
  }
  return m;
}

bool equiv(Level lv, const MetatermPtr& lhs, const MetatermPtr& rhs) {
  if (lv == Level::FOmega) return term_eq(canonicalize(lv, lhs), canonicalize(lv, rhs));
  return term_eq(lhs, rhs);
}

bool equiv_type(Level lv, const TypePtr& lhs, const TypePtr& rhs) {
  if (lv == Level::FOmega) return type_eq(normalize_type(lhs), normalize_type(rhs));
  return type_eq(lhs, rhs);
}

int type_size(const TypePtr& t) {
  switch (t->tag) {
    case Type::Tag::TVar:
    case Type::Tag::TBound:
    case Type::Tag::Eig:
    case Type::Tag::EBound: return 1;
    case Type::Tag::Arrow:
    case Type::Tag::TApp: return 1 + type_size(t->a) + type_size(t->b);
    case Type::Tag::ForAll:
    case Type::Tag::TLam: return 1 + type_size(t->body);
  }
  return 1;
}

// ---------------------------------------------------------------------------
// Environments

bool TypeEnv::contains(const std::string& x) const {
  return lookup(x).has_value();
}

std::optional<TypePtr> TypeEnv::lookup(const std::string& x) const {
  for (const auto& [n, t] : entries_)
    if (n == x) return t;
  return std::nullopt;
}

TypeEnv TypeEnv::extended(const std::string& x, TypePtr a) const {
  if (contains(x)) throw std::invalid_argument("duplicate variable in environment: " + x);
  TypeEnv out = *this;
  out.entries_.emplace_back(x, std::move(a));
  return out;
}

TypeEnv TypeEnv::without(const std::string& x) const {
  TypeEnv out;
  for (const auto& e : entries_)
    if (e.first != x) out.entries_.push_back(e);
  return out;
}

std::optional<KindPtr> KindCtx::tvar_kind(const std::string& a) const {
  auto it = tvars_.find(a);
  if (it == tvars_.end()) return std::nullopt;
  return it->second;
}
std::optional<KindPtr> KindCtx::eig_kind(const std::string& a) const {
  auto it = eigs_.find(a);
  if (it == eigs_.end()) return std::nullopt;
  return it->second;
}
KindCtx KindCtx::with_tvar(const std::string& a, KindPtr k) const {
  KindCtx out = *this;
  out.tvars_[a] = std::move(k);
  return out;
}
KindCtx KindCtx::with_eig(const std::string& a, KindPtr k) const {
  KindCtx out = *this;
  out.eigs_[a] = std::move(k);
  return out;
}

std::string NameSupply::fresh_eig(const std::set<std::string>& avoid) {
  for (;;) {
    std::string n = "g" + std::to_string(eig_++);
    if (!avoid.count(n)) return n;
  }
}
std::string NameSupply::fresh_term(const std::set<std::string>& avoid) {
  for (;;) {
    std::string n = "x" + std::to_string(term_++);
    if (!avoid.count(n)) return n;
  }
}
std::string NameSupply::fresh_tvar(const std::set<std::string>& avoid) {
  for (;;) {
    std::string n = "a" + std::to_string(tvar_++);
    if (!avoid.count(n)) return n;
  }
}

}  // namespace rlz
