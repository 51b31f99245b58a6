#include "rlz/typecheck.hpp"

#include "rlz/printer.hpp"

namespace rlz {

// ---------------------------------------------------------------------------
// Kinding

KindPtr kind_of(const KindCtx& ctx, const TypePtr& a) {
  switch (a->tag) {
    case Type::Tag::TVar: {
      if (auto k = ctx.tvar_kind(a->name)) return *k;
      throw UnboundName("unbound type variable: " + a->name);
    }
    case Type::Tag::Eig: {
      if (auto k = ctx.eig_kind(a->name)) return *k;
      throw UnboundName("unbound eigenvariable: #" + a->name);
    }
    case Type::Tag::TBound:
    case Type::Tag::EBound:
      throw KindMismatch("kind_of applied to a non locally closed type");
    case Type::Tag::Arrow: {
      if (!is_prop(kind_of(ctx, a->a)))
        throw KindMismatch("arrow domain is not a proposition: " + print(a->a));
      if (!is_prop(kind_of(ctx, a->b)))
        throw KindMismatch("arrow codomain is not a proposition: " + print(a->b));
      return kind_prop();
    }
    case Type::Tag::ForAll: {
      // Open with a name unused in the context.
      std::string fresh = a->hint.empty() ? "a" : a->hint;
      while (ctx.tvar_kind(fresh)) fresh += '\'';
      KindPtr body = kind_of(ctx.with_tvar(fresh, a->kind), open_tvar(a->body, t_var(fresh)));
      if (!is_prop(body))
        throw KindMismatch("quantifier body is not a proposition: " + print(a->body));
      return kind_prop();
    }
    case Type::Tag::TLam: {
      std::string fresh = a->hint.empty() ? "a" : a->hint;
      while (ctx.tvar_kind(fresh)) fresh += '\'';
      KindPtr body = kind_of(ctx.with_tvar(fresh, a->kind), open_tvar(a->body, t_var(fresh)));
      return kind_arrow(a->kind, body);
    }
    case Type::Tag::TApp: {
      KindPtr f = kind_of(ctx, a->a);
      if (f->tag != Kind::Tag::Arrow)
        throw KindMismatch("applying a type of non-arrow kind: " + print(a->a));
      KindPtr arg = kind_of(ctx, a->b);
      if (!kind_eq(f->dom, arg))
        throw KindMismatch("kind mismatch in type application: " + print(a));
      return f->cod;
    }
  }
  throw KindMismatch("unreachable");
}

bool env_well_formed(Level lv, const KindCtx& ctx, const TypeEnv& env) {
  if (lv != Level::FOmega) {
    for (const auto& [x, t] : env.entries()) {
      (void)x;
      require_level_ok(lv, t);
    }
    return true;
  }
  for (const auto& [x, t] : env.entries()) {
    (void)x;
    if (!is_prop(kind_of(ctx, t))) return false;
  }
  return true;
}

namespace {

bool well_kinded_rec(const KindCtx& ctx, const MetatermPtr& m, NameSupply& supply) {
  auto prop_type = [&](const TypePtr& t) {
    try {
      return is_prop(kind_of(ctx, t));
    } catch (const std::runtime_error&) {
      return false;
    }
  };
  switch (m->tag) {
    case Metaterm::Tag::Var:
    case Metaterm::Tag::BVar:
    case Metaterm::Tag::Star: return true;
    case Metaterm::Tag::Lam: return well_kinded_rec(ctx, m->body, supply);
    case Metaterm::Tag::TyLam: {
      std::set<std::string> avoid;
      for (const auto& [n, k] : ctx.tvars()) {
        (void)k;
        avoid.insert(n);
      }
      std::string a = supply.fresh_tvar(avoid);
      return well_kinded_rec(ctx.with_tvar(a, m->kind), open_tvar_in_term(m->body, t_var(a)),
                             supply);
    }
    case Metaterm::Tag::Fresh: {
      std::set<std::string> avoid;
      for (const auto& [n, k] : ctx.eigs()) {
        (void)k;
        avoid.insert(n);
      }
      std::string a = supply.fresh_eig(avoid);
      return well_kinded_rec(ctx.with_eig(a, m->kind), open_eig_in_term(m->body, a), supply);
    }
    case Metaterm::Tag::App:
    case Metaterm::Tag::Guard:
      return well_kinded_rec(ctx, m->fun, supply) && well_kinded_rec(ctx, m->arg, supply);
    case Metaterm::Tag::TyApp: {
      try {
        kind_of(ctx, m->ty);
      } catch (const std::runtime_error&) {
        return false;
      }
      return well_kinded_rec(ctx, m->sub, supply);
    }
    case Metaterm::Tag::Gen: return prop_type(m->ty);
    case Metaterm::Tag::Verif:
      return prop_type(m->ty) && well_kinded_rec(ctx, m->sub, supply);
    case Metaterm::Tag::Anno:
      return prop_type(m->ty) && well_kinded_rec(ctx, m->sub, supply);
  }
  return false;
}

}  // namespace

bool well_kinded(const KindCtx& ctx, const MetatermPtr& m) {
  NameSupply supply;
  return well_kinded_rec(ctx, m, supply);
}

// ---------------------------------------------------------------------------
// Bidirectional checking

std::string rule_name(TypingDerivation::Rule r) {
  switch (r) {
    case TypingDerivation::Rule::Var: return "Var";
    case TypingDerivation::Rule::AbsIntro: return "AbsIntro";
    case TypingDerivation::Rule::AppElim: return "AppElim";
    case TypingDerivation::Rule::AllIntro: return "AllIntro";
    case TypingDerivation::Rule::AllElim: return "AllElim";
    case TypingDerivation::Rule::Conv: return "Conv";
  }
  return "?";
}

namespace {

using TD = TypingDerivation;
using TDPtr = TypingDerivationPtr;

TDPtr mk(TD d) { return std::make_shared<TD>(std::move(d)); }

struct Checker {
  Level lv;

  std::string join(const std::string& a, const std::string& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    return a + "." + b;
  }

  CheckResult fail(const std::string& path, const std::string& reason) {
    return CheckResult{nullptr, CheckFail{path, reason}};
  }
  SynthResult sfail(const std::string& path, const std::string& reason) {
    return SynthResult{nullptr, nullptr, CheckFail{path, reason}};
  }

  // At FOmega, expose the head constructor of a type up to beta; the Conv
  // wrapper is added by the caller when the exposed type differs.
  TypePtr expose(const TypePtr& a) { return lv == Level::FOmega ? normalize_type(a) : a; }

  bool types_equal(const TypePtr& a, const TypePtr& b) { return equiv_type(lv, a, b); }

  TDPtr conv_wrap(const KindCtx& ctx, const TypeEnv& env, TDPtr inner, const TypePtr& target) {
    if (type_eq(inner->type, target)) return inner;
    TD node;
    node.rule = TD::Rule::Conv;
    node.level = lv;
    node.ctx = ctx;
    node.env = env;
    node.term = inner->term;
    node.type = target;
    node.premises = {std::move(inner)};
    return mk(std::move(node));
  }

  std::set<std::string> names_in_scope(const TypeEnv& env) {
    std::set<std::string> out;
    for (const auto& [x, t] : env.entries()) {
      (void)t;
      out.insert(x);
    }
    return out;
  }

  std::set<std::string> tvars_in_scope(const KindCtx& ctx, const TypeEnv& env) {
    std::set<std::string> out;
    for (const auto& [a, k] : ctx.tvars()) {
      (void)k;
      out.insert(a);
    }
    for (const auto& [x, t] : env.entries()) {
      (void)x;
      auto fn = free_names(t);
      out.insert(fn.type_vars.begin(), fn.type_vars.end());
    }
    return out;
  }

  CheckResult check(const KindCtx& ctx, const TypeEnv& env, const MetatermPtr& t,
                    const TypePtr& a, const std::string& path) {
    switch (t->tag) {
      case Metaterm::Tag::Lam: {
        TypePtr exposed = expose(a);
        if (exposed->tag != Type::Tag::Arrow)
          return fail(path, "abstraction checked against non-arrow type " + print(a));
        std::set<std::string> avoid = names_in_scope(env);
        auto fn = free_names(t->body);
        avoid.insert(fn.term_vars.begin(), fn.term_vars.end());
        std::string x = t->hint.empty() ? "x" : t->hint;
        while (avoid.count(x)) x += '\'';
        CheckResult body = check(ctx, env.extended(x, exposed->a),
                                 open_term(t->body, m_var(x)), exposed->b, join(path, "body"));
        if (!body.ok()) return body;
        TD node;
        node.rule = TD::Rule::AbsIntro;
        node.level = lv;
        node.ctx = ctx;
        node.env = env;
        node.term = erase_annotations(t);
        node.type = exposed;
        node.binder_name = x;
        node.premises = {body.derivation};
        return CheckResult{conv_wrap(ctx, env, mk(std::move(node)), a), std::nullopt};
      }
      case Metaterm::Tag::TyLam: {
        TypePtr exposed = expose(a);
        if (exposed->tag != Type::Tag::ForAll)
          return fail(path, "type abstraction checked against non-quantified type " + print(a));
        if (lv == Level::FOmega && !kind_eq(t->kind, exposed->kind))
          return fail(path, "binder kind does not match quantifier kind");
        std::set<std::string> avoid = tvars_in_scope(ctx, env);
        auto fn = free_names(t->body);
        avoid.insert(fn.type_vars.begin(), fn.type_vars.end());
        auto fa = free_names(exposed->body);
        avoid.insert(fa.type_vars.begin(), fa.type_vars.end());
        std::string b = t->hint.empty() ? "a" : t->hint;
        while (avoid.count(b)) b += '\'';
        CheckResult body = check(ctx.with_tvar(b, exposed->kind), env,
                                 open_tvar_in_term(t->body, t_var(b)),
                                 open_tvar(exposed->body, t_var(b)), join(path, "body"));
        if (!body.ok()) return body;
        TD node;
        node.rule = TD::Rule::AllIntro;
        node.level = lv;
        node.ctx = ctx;
        node.env = env;
        node.term = erase_annotations(t);
        node.type = exposed;
        node.binder_name = b;
        node.binder_kind = exposed->kind;
        node.premises = {body.derivation};
        return CheckResult{conv_wrap(ctx, env, mk(std::move(node)), a), std::nullopt};
      }
      case Metaterm::Tag::Var:
      case Metaterm::Tag::App:
      case Metaterm::Tag::TyApp:
      case Metaterm::Tag::Anno: {
        SynthResult s = synth(ctx, env, t, path);
        if (!s.ok()) return CheckResult{nullptr, s.fail};
        if (!types_equal(s.type, a))
          return fail(path, "synthesized type " + print(s.type) + " does not match " + print(a));
        return CheckResult{conv_wrap(ctx, env, s.derivation, a), std::nullopt};
      }
      default:
        return fail(path, "subject is not a pure term");
    }
  }

  SynthResult synth(const KindCtx& ctx, const TypeEnv& env, const MetatermPtr& t,
                    const std::string& path) {
    switch (t->tag) {
      case Metaterm::Tag::Var: {
        auto ty = env.lookup(t->name);
        if (!ty) return sfail(path, "unbound variable: " + t->name);
        TD node;
        node.rule = TD::Rule::Var;
        node.level = lv;
        node.ctx = ctx;
        node.env = env;
        node.term = t;
        node.type = *ty;
        return SynthResult{*ty, mk(std::move(node)), std::nullopt};
      }
      case Metaterm::Tag::App: {
        SynthResult f = synth(ctx, env, t->fun, join(path, "fun"));
        if (!f.ok()) return f;
        TypePtr exposed = expose(f.type);
        if (exposed->tag != Type::Tag::Arrow)
          return sfail(path, "applying a term of non-arrow type " + print(f.type));
        TDPtr fd = conv_wrap(ctx, env, f.derivation, exposed);
        CheckResult arg = check(ctx, env, t->arg, exposed->a, join(path, "arg"));
        if (!arg.ok()) return SynthResult{nullptr, nullptr, arg.fail};
        TD node;
        node.rule = TD::Rule::AppElim;
        node.level = lv;
        node.ctx = ctx;
        node.env = env;
        node.term = m_app(fd->term, arg.derivation->term);
        node.type = exposed->b;
        node.premises = {fd, arg.derivation};
        return SynthResult{exposed->b, mk(std::move(node)), std::nullopt};
      }
      case Metaterm::Tag::TyApp: {
        SynthResult f = synth(ctx, env, t->sub, join(path, "fun"));
        if (!f.ok()) return f;
        TypePtr exposed = expose(f.type);
        if (exposed->tag != Type::Tag::ForAll)
          return sfail(path, "type-applying a term of non-quantified type " + print(f.type));
        if (lv == Level::FOmega) {
          try {
            KindPtr k = kind_of(ctx, t->ty);
            if (!kind_eq(k, exposed->kind))
              return sfail(path, "type argument kind mismatch in " + print(t));
          } catch (const std::runtime_error& e) {
            return sfail(path, e.what());
          }
        }
        TDPtr fd = conv_wrap(ctx, env, f.derivation, exposed);
        TypePtr res = open_tvar(exposed->body, t->ty);
        TD node;
        node.rule = TD::Rule::AllElim;
        node.level = lv;
        node.ctx = ctx;
        node.env = env;
        node.term = m_tyapp(fd->term, t->ty);
        node.type = res;
        node.elim_arg = t->ty;
        node.binder_kind = exposed->kind;
        node.premises = {fd};
        return SynthResult{res, mk(std::move(node)), std::nullopt};
      }
      case Metaterm::Tag::Anno: {
        if (lv == Level::FOmega) {
          try {
            if (!is_prop(kind_of(ctx, t->ty)))
              return sfail(path, "annotation is not a proposition: " + print(t->ty));
          } catch (const std::runtime_error& e) {
            return sfail(path, e.what());
          }
        }
        CheckResult inner = check(ctx, env, t->sub, t->ty, path);
        if (!inner.ok()) return SynthResult{nullptr, nullptr, inner.fail};
        return SynthResult{t->ty, inner.derivation, std::nullopt};
      }
      case Metaterm::Tag::Lam:
      case Metaterm::Tag::TyLam:
        return sfail(path, "unannotated abstraction head is not synthesizable");
      default:
        return sfail(path, "subject is not a pure term");
    }
  }
};

}  // namespace

CheckResult check(Level lv, const KindCtx& ctx, const TypeEnv& env, const MetatermPtr& t,
                  const TypePtr& a) {
  Checker c{lv};
  return c.check(ctx, env, t, a, "");
}

SynthResult synth(Level lv, const KindCtx& ctx, const TypeEnv& env, const MetatermPtr& t) {
  Checker c{lv};
  return c.synth(ctx, env, t, "");
}

// ---------------------------------------------------------------------------
// Re-validation

namespace {

bool env_eq(const TypeEnv& a, const TypeEnv& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); i++) {
    if (a.entries()[i].first != b.entries()[i].first) return false;
    if (!type_eq(a.entries()[i].second, b.entries()[i].second)) return false;
  }
  return true;
}

bool ctx_eq(const KindCtx& a, const KindCtx& b) {
  if (a.tvars().size() != b.tvars().size() || a.eigs().size() != b.eigs().size()) return false;
  for (const auto& [n, k] : a.tvars()) {
    auto it = b.tvars().find(n);
    if (it == b.tvars().end() || !kind_eq(k, it->second)) return false;
  }
  for (const auto& [n, k] : a.eigs()) {
    auto it = b.eigs().find(n);
    if (it == b.eigs().end() || !kind_eq(k, it->second)) return false;
  }
  return true;
}

bool validate_rec(const TypingDerivationPtr& d, std::string* why) {
  auto bad = [&](const std::string& msg) {
    if (why) *why = msg + " [at " + print(d->term) + " : " + print(d->type) + "]";
    return false;
  };
  if (!d) return bad("null derivation");
  if (!is_pure(d->term)) return bad("subject is not pure");
  if (d->level == Level::FOmega) {
    try {
      if (!is_prop(kind_of(d->ctx, d->type))) return bad("conclusion type is not a proposition");
    } catch (const std::runtime_error& e) {
      return bad(std::string("conclusion type ill-kinded: ") + e.what());
    }
  }
  for (const auto& p : d->premises)
    if (!validate_rec(p, why)) return false;

  switch (d->rule) {
    case TD::Rule::Var: {
      if (d->term->tag != Metaterm::Tag::Var || !d->premises.empty()) return bad("Var shape");
      auto ty = d->env.lookup(d->term->name);
      if (!ty || !type_eq(*ty, d->type)) return bad("Var type does not match environment");
      return true;
    }
    case TD::Rule::AbsIntro: {
      if (d->term->tag != Metaterm::Tag::Lam || d->premises.size() != 1)
        return bad("AbsIntro shape");
      if (d->type->tag != Type::Tag::Arrow) return bad("AbsIntro conclusion is not an arrow");
      const auto& p = d->premises[0];
      if (d->env.contains(d->binder_name)) return bad("AbsIntro binder shadows environment");
      if (!env_eq(p->env, d->env.extended(d->binder_name, d->type->a)))
        return bad("AbsIntro premise environment mismatch");
      if (!ctx_eq(p->ctx, d->ctx)) return bad("AbsIntro premise context mismatch");
      if (!term_eq(p->term, open_term(d->term->body, m_var(d->binder_name))))
        return bad("AbsIntro premise subject mismatch");
      if (!type_eq(p->type, d->type->b)) return bad("AbsIntro premise type mismatch");
      return true;
    }
    case TD::Rule::AppElim: {
      if (d->term->tag != Metaterm::Tag::App || d->premises.size() != 2)
        return bad("AppElim shape");
      const auto& f = d->premises[0];
      const auto& a = d->premises[1];
      if (!env_eq(f->env, d->env) || !env_eq(a->env, d->env) || !ctx_eq(f->ctx, d->ctx) ||
          !ctx_eq(a->ctx, d->ctx))
        return bad("AppElim environment mismatch");
      if (!term_eq(f->term, d->term->fun) || !term_eq(a->term, d->term->arg))
        return bad("AppElim premise subjects mismatch");
      if (f->type->tag != Type::Tag::Arrow) return bad("AppElim head is not an arrow");
      if (!type_eq(f->type->a, a->type)) return bad("AppElim argument type mismatch");
      if (!type_eq(f->type->b, d->type)) return bad("AppElim result type mismatch");
      return true;
    }
    case TD::Rule::AllIntro: {
      if (d->term->tag != Metaterm::Tag::TyLam || d->premises.size() != 1)
        return bad("AllIntro shape");
      if (d->type->tag != Type::Tag::ForAll) return bad("AllIntro conclusion is not a forall");
      if (d->level == Level::ST) return bad("AllIntro illegal at ST");
      if (!kind_eq(d->type->kind, d->binder_kind)) return bad("AllIntro kind mismatch");
      if (d->level == Level::FOmega && !kind_eq(d->term->kind, d->type->kind))
        return bad("AllIntro subject binder kind mismatch");
      // a not in fv(env)
      for (const auto& [x, t] : d->env.entries()) {
        (void)x;
        if (free_names(t).type_vars.count(d->binder_name))
          return bad("AllIntro freshness violated: " + d->binder_name + " free in environment");
      }
      if (d->ctx.tvar_kind(d->binder_name))
        return bad("AllIntro binder already bound in kind context");
      const auto& p = d->premises[0];
      if (!env_eq(p->env, d->env)) return bad("AllIntro premise environment mismatch");
      if (!ctx_eq(p->ctx, d->ctx.with_tvar(d->binder_name, d->binder_kind)))
        return bad("AllIntro premise context mismatch");
      if (!term_eq(p->term, open_tvar_in_term(d->term->body, t_var(d->binder_name))))
        return bad("AllIntro premise subject mismatch");
      if (!type_eq(p->type, open_tvar(d->type->body, t_var(d->binder_name))))
        return bad("AllIntro premise type mismatch");
      return true;
    }
    case TD::Rule::AllElim: {
      if (d->term->tag != Metaterm::Tag::TyApp || d->premises.size() != 1)
        return bad("AllElim shape");
      if (d->level == Level::ST) return bad("AllElim illegal at ST");
      const auto& f = d->premises[0];
      if (!env_eq(f->env, d->env) || !ctx_eq(f->ctx, d->ctx))
        return bad("AllElim environment mismatch");
      if (!term_eq(f->term, d->term->sub)) return bad("AllElim premise subject mismatch");
      if (f->type->tag != Type::Tag::ForAll) return bad("AllElim head is not a forall");
      if (!type_eq(d->elim_arg, d->term->ty)) return bad("AllElim recorded argument mismatch");
      if (!kind_eq(d->binder_kind, f->type->kind)) return bad("AllElim kind record mismatch");
      if (d->level == Level::FOmega) {
        try {
          if (!kind_eq(kind_of(d->ctx, d->elim_arg), f->type->kind))
            return bad("AllElim argument kind mismatch");
        } catch (const std::runtime_error& e) {
          return bad(std::string("AllElim argument ill-kinded: ") + e.what());
        }
      }
      if (!type_eq(d->type, open_tvar(f->type->body, d->elim_arg)))
        return bad("AllElim result type mismatch");
      return true;
    }
    case TD::Rule::Conv: {
      if (d->level != Level::FOmega) return bad("Conv only applies at FOmega");
      if (d->premises.size() != 1) return bad("Conv shape");
      const auto& p = d->premises[0];
      if (!env_eq(p->env, d->env) || !ctx_eq(p->ctx, d->ctx))
        return bad("Conv environment mismatch");
      if (!term_eq(p->term, d->term)) return bad("Conv subject mismatch");
      if (!equiv_type(Level::FOmega, p->type, d->type))
        return bad("Conv types are not beta-convertible");
      return true;
    }
  }
  return bad("unknown rule");
}

}  // namespace

bool validate(const TypingDerivationPtr& d, std::string* why) { return validate_rec(d, why); }
bool validate(const TypingDerivationPtr& d) { return validate_rec(d, nullptr); }

}  // namespace rlz
