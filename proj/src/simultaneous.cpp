#include "rlz/simultaneous.hpp"

#include "rlz/printer.hpp"

namespace rlz {

std::string sto_rule_name(StoRule r) {
  switch (r) {
    case StoRule::SVar: return "var";
    case StoRule::SStar: return "success";
    case StoRule::SLam: return "lam";
    case StoRule::SApp1: return "app1";
    case StoRule::SApp2: return "app2";
    case StoRule::STLam: return "tlam";
    case StoRule::STApp1: return "tapp1";
    case StoRule::STApp2: return "tapp2";
    case StoRule::SGuard1: return "guard1";
    case StoRule::SGuard2: return "guard2";
    case StoRule::SGenRefl: return "g-refl";
    case StoRule::SGenImp: return "g-imp";
    case StoRule::SGenAll: return "g-all";
    case StoRule::SVCong: return "v-cong";
    case StoRule::SVEig: return "v-eig";
    case StoRule::SVImp: return "v-imp";
    case StoRule::SVAll: return "v-all";
    case StoRule::SFresh1: return "fresh1";
    case StoRule::SFresh2: return "fresh2";
  }
  return "?";
}

namespace {

StoDerivPtr mk(StoRule rule, MetatermPtr src, MetatermPtr dst, std::vector<StoDerivPtr> prems = {},
               std::string opened = "") {
  return std::make_shared<StoDeriv>(
      StoDeriv{rule, std::move(src), std::move(dst), std::move(prems), std::move(opened)});
}

std::string fresh_for(const char* base, std::initializer_list<const std::set<std::string>*> sets) {
  std::string n = base;
  int i = 0;
  auto used = [&](const std::string& s) {
    for (const auto* set : sets)
      if (set->count(s)) return true;
    return false;
  };
  while (used(n)) n = std::string(base) + std::to_string(i++);
  return n;
}

MetatermPtr gen_imp_rhs(const TypePtr& arrow) {
  return m_lam("x", m_guard(m_verif(arrow->a, m_bvar(0)), m_gen(arrow->b)));
}

MetatermPtr v_all_rhs(const TypePtr& forall, const MetatermPtr& arg_dst, const std::string& g) {
  MetatermPtr body = m_verif(open_tvar(forall->body, t_eig(g)), m_tyapp(arg_dst, t_eig(g)));
  return m_fresh(g, forall->kind, close_eig_in_term(body, g));
}

}  // namespace

StoDerivPtr sto_refl(const MetatermPtr& m) {
  switch (m->tag) {
    case Metaterm::Tag::Var: return mk(StoRule::SVar, m, m);
    case Metaterm::Tag::Star: return mk(StoRule::SStar, m, m);
    case Metaterm::Tag::Gen: return mk(StoRule::SGenRefl, m, m);
    case Metaterm::Tag::Lam: {
      auto fn = free_names(m->body).term_vars;
      std::string x = fresh_for("_r", {&fn});
      auto p = sto_refl(open_term(m->body, m_var(x)));
      return mk(StoRule::SLam, m, m, {p}, x);
    }
    case Metaterm::Tag::TyLam: {
      auto fn = free_names(m->body).type_vars;
      std::string a = fresh_for("_ra", {&fn});
      auto p = sto_refl(open_tvar_in_term(m->body, t_var(a)));
      return mk(StoRule::STLam, m, m, {p}, a);
    }
    case Metaterm::Tag::Fresh: {
      auto fn = free_names(m->body).eig_vars;
      std::string g = fresh_for("_re", {&fn});
      auto p = sto_refl(open_eig_in_term(m->body, g));
      return mk(StoRule::SFresh1, m, m, {p}, g);
    }
    case Metaterm::Tag::App:
      return mk(StoRule::SApp1, m, m, {sto_refl(m->fun), sto_refl(m->arg)});
    case Metaterm::Tag::Guard:
      return mk(StoRule::SGuard1, m, m, {sto_refl(m->fun), sto_refl(m->arg)});
    case Metaterm::Tag::TyApp: return mk(StoRule::STApp1, m, m, {sto_refl(m->sub)});
    case Metaterm::Tag::Verif: return mk(StoRule::SVCong, m, m, {sto_refl(m->sub)});
    default:
      throw std::invalid_argument("no reflexivity derivation for this term form");
  }
}

// ---------------------------------------------------------------------------
// Lifting single steps

namespace {

StoDerivPtr lift_rec(const MetatermPtr& before, const MetatermPtr& after, const Path& pos,
                     size_t i, RuleTag rule) {
  if (i == pos.size()) {
    switch (rule) {
      case RuleTag::Beta: {
        auto fn = free_names(before->fun->body).term_vars;
        auto fa = free_names(before->arg).term_vars;
        std::string x = fresh_for("_l", {&fn, &fa});
        auto p1 = sto_refl(open_term(before->fun->body, m_var(x)));
        auto p2 = sto_refl(before->arg);
        return mk(StoRule::SApp2, before, after, {p1, p2}, x);
      }
      case RuleTag::TyBeta: {
        auto fn = free_names(before->sub->body).type_vars;
        auto ft = free_names(before->ty).type_vars;
        std::string a = fresh_for("_la", {&fn, &ft});
        auto p1 = sto_refl(open_tvar_in_term(before->sub->body, t_var(a)));
        return mk(StoRule::STApp2, before, after, {p1}, a);
      }
      case RuleTag::GuardStar:
        return mk(StoRule::SGuard2, before, after, {sto_refl(before->arg)});
      case RuleTag::VerifEig: return mk(StoRule::SVEig, before, after);
      case RuleTag::VerifImp:
        return mk(StoRule::SVImp, before, after, {sto_refl(before->sub)});
      case RuleTag::VerifAll:
        return mk(StoRule::SVAll, before, after, {sto_refl(before->sub)});
      case RuleTag::GenImp: return mk(StoRule::SGenImp, before, after);
      case RuleTag::GenAll: return mk(StoRule::SGenAll, before, after);
      case RuleTag::FreshDrop:
        return mk(StoRule::SFresh2, before, after, {sto_refl(before->body)});
      case RuleTag::StExpand: break;
    }
    throw std::invalid_argument("cannot lift this rule");
  }
  switch (pos[i]) {
    case PathStep::Fun:
      if (before->tag == Metaterm::Tag::App)
        return mk(StoRule::SApp1, before, after,
                  {lift_rec(before->fun, after->fun, pos, i + 1, rule), sto_refl(before->arg)});
      if (before->tag == Metaterm::Tag::TyApp)
        return mk(StoRule::STApp1, before, after,
                  {lift_rec(before->sub, after->sub, pos, i + 1, rule)});
      break;
    case PathStep::Arg:
      if (before->tag == Metaterm::Tag::App)
        return mk(StoRule::SApp1, before, after,
                  {sto_refl(before->fun), lift_rec(before->arg, after->arg, pos, i + 1, rule)});
      if (before->tag == Metaterm::Tag::Verif)
        return mk(StoRule::SVCong, before, after,
                  {lift_rec(before->sub, after->sub, pos, i + 1, rule)});
      break;
    case PathStep::Cond:
      if (before->tag == Metaterm::Tag::Guard)
        return mk(StoRule::SGuard1, before, after,
                  {lift_rec(before->fun, after->fun, pos, i + 1, rule), sto_refl(before->arg)});
      break;
    case PathStep::Next:
      if (before->tag == Metaterm::Tag::Guard)
        return mk(StoRule::SGuard1, before, after,
                  {sto_refl(before->fun), lift_rec(before->arg, after->arg, pos, i + 1, rule)});
      break;
    case PathStep::Body: {
      if (before->tag == Metaterm::Tag::Lam) {
        auto f1 = free_names(before->body).term_vars;
        auto f2 = free_names(after->body).term_vars;
        std::string x = fresh_for("_l", {&f1, &f2});
        auto p = lift_rec(open_term(before->body, m_var(x)), open_term(after->body, m_var(x)),
                          pos, i + 1, rule);
        return mk(StoRule::SLam, before, after, {p}, x);
      }
      if (before->tag == Metaterm::Tag::TyLam) {
        auto f1 = free_names(before->body).type_vars;
        auto f2 = free_names(after->body).type_vars;
        std::string a = fresh_for("_la", {&f1, &f2});
        auto p = lift_rec(open_tvar_in_term(before->body, t_var(a)),
                          open_tvar_in_term(after->body, t_var(a)), pos, i + 1, rule);
        return mk(StoRule::STLam, before, after, {p}, a);
      }
      if (before->tag == Metaterm::Tag::Fresh) {
        auto f1 = free_names(before->body).eig_vars;
        auto f2 = free_names(after->body).eig_vars;
        std::string g = fresh_for("_le", {&f1, &f2});
        auto p = lift_rec(open_eig_in_term(before->body, g), open_eig_in_term(after->body, g),
                          pos, i + 1, rule);
        return mk(StoRule::SFresh1, before, after, {p}, g);
      }
      break;
    }
  }
  throw std::invalid_argument("step path does not match term shape");
}

}  // namespace

StoDerivPtr sto_lift_step(const Step& step) {
  return lift_rec(step.before, step.after, step.pos, 0, step.rule);
}

// ---------------------------------------------------------------------------
// Substitution lemmas

namespace {

// Rename the opened name of a binder-crossing node when it collides.
StoDerivPtr rename_term_name(const StoDerivPtr& d, const std::string& from,
                             const std::string& to);
StoDerivPtr rename_tvar_name(const StoDerivPtr& d, const std::string& from, const std::string& to);
StoDerivPtr rename_eig_name(const StoDerivPtr& d, const std::string& from, const std::string& to);

template <class FT, class FY>
StoDerivPtr map_deriv(const StoDerivPtr& d, FT&& fterm, FY&& fname) {
  std::vector<StoDerivPtr> prems;
  prems.reserve(d->prems.size());
  for (const auto& p : d->prems) prems.push_back(map_deriv(p, fterm, fname));
  return mk(d->rule, fterm(d->src), fterm(d->dst), std::move(prems), fname(d->opened));
}

StoDerivPtr rename_term_name(const StoDerivPtr& d, const std::string& from,
                             const std::string& to) {
  TermSubst s{{from, m_var(to)}};
  return map_deriv(
      d, [&](const MetatermPtr& m) { return subst_term(m, s); },
      [&](const std::string& n) { return n == from ? to : n; });
}

StoDerivPtr rename_tvar_name(const StoDerivPtr& d, const std::string& from,
                             const std::string& to) {
  TypeSubst s{{from, t_var(to)}};
  return map_deriv(
      d, [&](const MetatermPtr& m) { return subst_tvar_in_term(m, s); },
      [&](const std::string& n) { return n == from ? to : n; });
}

StoDerivPtr rename_eig_name(const StoDerivPtr& d, const std::string& from, const std::string& to) {
  TypeSubst s{{from, t_eig(to)}};
  return map_deriv(
      d, [&](const MetatermPtr& m) { return subst_eig_in_term(m, s); },
      [&](const std::string& n) { return n == from ? to : n; });
}

bool opens_term(StoRule r) { return r == StoRule::SLam || r == StoRule::SApp2; }
bool opens_tvar(StoRule r) { return r == StoRule::STLam || r == StoRule::STApp2; }
bool opens_eig(StoRule r) { return r == StoRule::SFresh1; }

}  // namespace

StoDerivPtr sto_subst(const StoDerivPtr& d, const std::string& x, const StoDerivPtr& dn) {
  if (d->rule == StoRule::SVar) {
    if (d->src->tag == Metaterm::Tag::Var && d->src->name == x) return dn;
    return d;
  }
  StoDerivPtr cur = d;
  FreeNames f1 = free_names(dn->src);
  FreeNames f2 = free_names(dn->dst);
  if (opens_term(cur->rule) &&
      (cur->opened == x || f1.term_vars.count(cur->opened) || f2.term_vars.count(cur->opened))) {
    auto b1 = free_names(cur->src).term_vars;
    auto b2 = free_names(cur->dst).term_vars;
    std::string fresh = fresh_for("_s", {&f1.term_vars, &f2.term_vars, &b1, &b2});
    cur = rename_term_name(cur, cur->opened, fresh);
  }
  if (opens_tvar(cur->rule) &&
      (f1.type_vars.count(cur->opened) || f2.type_vars.count(cur->opened))) {
    auto b1 = free_names(cur->src).type_vars;
    auto b2 = free_names(cur->dst).type_vars;
    std::string fresh = fresh_for("_sa", {&f1.type_vars, &f2.type_vars, &b1, &b2});
    cur = rename_tvar_name(cur, cur->opened, fresh);
  }
  if (opens_eig(cur->rule) &&
      (f1.eig_vars.count(cur->opened) || f2.eig_vars.count(cur->opened))) {
    auto b1 = free_names(cur->src).eig_vars;
    auto b2 = free_names(cur->dst).eig_vars;
    std::string fresh = fresh_for("_se", {&f1.eig_vars, &f2.eig_vars, &b1, &b2});
    cur = rename_eig_name(cur, cur->opened, fresh);
  }
  TermSubst s{{x, dn->src}};
  TermSubst sd{{x, dn->dst}};
  std::vector<StoDerivPtr> prems;
  prems.reserve(cur->prems.size());
  for (const auto& p : cur->prems) prems.push_back(sto_subst(p, x, dn));
  return mk(cur->rule, subst_term(cur->src, s), subst_term(cur->dst, sd), std::move(prems),
            cur->opened);
}

StoDerivPtr sto_subst_tvar(const StoDerivPtr& d, const std::string& a, const TypePtr& ty) {
  StoDerivPtr cur = d;
  FreeNames ft = free_names(ty);
  if (opens_tvar(cur->rule) && (cur->opened == a || ft.type_vars.count(cur->opened))) {
    auto b1 = free_names(cur->src).type_vars;
    auto b2 = free_names(cur->dst).type_vars;
    std::string fresh = fresh_for("_sa", {&ft.type_vars, &b1, &b2});
    cur = rename_tvar_name(cur, cur->opened, fresh);
  }
  if (opens_eig(cur->rule) && ft.eig_vars.count(cur->opened)) {
    auto b1 = free_names(cur->src).eig_vars;
    auto b2 = free_names(cur->dst).eig_vars;
    std::string fresh = fresh_for("_se", {&ft.eig_vars, &b1, &b2});
    cur = rename_eig_name(cur, cur->opened, fresh);
  }
  TypeSubst s{{a, ty}};
  std::vector<StoDerivPtr> prems;
  prems.reserve(cur->prems.size());
  for (const auto& p : cur->prems) prems.push_back(sto_subst_tvar(p, a, ty));
  return mk(cur->rule, subst_tvar_in_term(cur->src, s), subst_tvar_in_term(cur->dst, s),
            std::move(prems), cur->opened);
}

// ---------------------------------------------------------------------------
// Triangle construction

StoDerivPtr sto_triangle(const StoDerivPtr& d) {
  const MetatermPtr& m = d->src;
  MetatermPtr cdm = complete_development(Level::F, m);
  auto out = [&](StoDerivPtr r) { return r; };

  switch (m->tag) {
    case Metaterm::Tag::Var:
    case Metaterm::Tag::Star: return out(sto_refl(m));
    case Metaterm::Tag::Lam: {
      // d must be SLam.
      auto tb = sto_triangle(d->prems[0]);
      return out(mk(StoRule::SLam, d->dst, cdm, {tb}, d->opened));
    }
    case Metaterm::Tag::TyLam: {
      auto tb = sto_triangle(d->prems[0]);
      return out(mk(StoRule::STLam, d->dst, cdm, {tb}, d->opened));
    }
    case Metaterm::Tag::App: {
      if (m->fun->tag == Metaterm::Tag::Lam) {
        if (d->rule == StoRule::SApp2) {
          auto tb = sto_triangle(d->prems[0]);
          auto tn = sto_triangle(d->prems[1]);
          return out(sto_subst(tb, d->opened, tn));
        }
        // SApp1 over an abstraction: the function premise is SLam. Its opened
        // name must also be fresh for the argument side before it becomes the
        // opened name of an SApp2 node.
        StoDerivPtr df = d->prems[0];
        auto tn = sto_triangle(d->prems[1]);
        {
          auto f1 = free_names(d->src).term_vars;
          auto f2 = free_names(d->dst).term_vars;
          auto f3 = free_names(tn->dst).term_vars;
          if (f1.count(df->opened) || f2.count(df->opened) || f3.count(df->opened)) {
            std::string fresh = fresh_for("_s", {&f1, &f2, &f3});
            df = rename_term_name(df, df->opened, fresh);
          }
        }
        auto tb = sto_triangle(df->prems[0]);
        MetatermPtr dst = subst_term(tb->dst, {{df->opened, tn->dst}});
        return out(mk(StoRule::SApp2, d->dst, dst, {tb, tn}, df->opened));
      }
      auto tf = sto_triangle(d->prems[0]);
      auto tn = sto_triangle(d->prems[1]);
      return out(mk(StoRule::SApp1, d->dst, cdm, {tf, tn}));
    }
    case Metaterm::Tag::TyApp: {
      if (m->sub->tag == Metaterm::Tag::TyLam) {
        if (d->rule == StoRule::STApp2) {
          auto tb = sto_triangle(d->prems[0]);
          return out(sto_subst_tvar(tb, d->opened, m->ty));
        }
        StoDerivPtr df = d->prems[0];
        {
          auto f1 = free_names(d->src).type_vars;
          auto f2 = free_names(d->dst).type_vars;
          if (f1.count(df->opened) || f2.count(df->opened)) {
            std::string fresh = fresh_for("_sa", {&f1, &f2});
            df = rename_tvar_name(df, df->opened, fresh);
          }
        }
        auto tb = sto_triangle(df->prems[0]);
        return out(mk(StoRule::STApp2, d->dst,
                      subst_tvar_in_term(tb->dst, {{df->opened, m->ty}}), {tb}, df->opened));
      }
      auto tf = sto_triangle(d->prems[0]);
      return out(mk(StoRule::STApp1, d->dst, cdm, {tf}));
    }
    case Metaterm::Tag::Guard: {
      if (m->fun->tag == Metaterm::Tag::Star) {
        if (d->rule == StoRule::SGuard2) return out(sto_triangle(d->prems[0]));
        // SGuard1; the condition premise relates star to star.
        auto tn = sto_triangle(d->prems[1]);
        return out(mk(StoRule::SGuard2, d->dst, cdm, {tn}));
      }
      auto tc = sto_triangle(d->prems[0]);
      auto tn = sto_triangle(d->prems[1]);
      return out(mk(StoRule::SGuard1, d->dst, cdm, {tc, tn}));
    }
    case Metaterm::Tag::Gen: {
      if (m->ty->tag == Type::Tag::Arrow) {
        if (d->rule == StoRule::SGenImp) return out(sto_refl(d->dst));
        return out(mk(StoRule::SGenImp, d->dst, cdm));
      }
      if (m->ty->tag == Type::Tag::ForAll) {
        if (d->rule == StoRule::SGenAll) return out(sto_refl(d->dst));
        return out(mk(StoRule::SGenAll, d->dst, cdm));
      }
      return out(sto_refl(d->dst));
    }
    case Metaterm::Tag::Verif: {
      const TypePtr& a = m->ty;
      bool eig_redex = a->tag == Type::Tag::Eig && m->sub->tag == Metaterm::Tag::Gen &&
                       type_eq(a, m->sub->ty);
      if (eig_redex) {
        if (d->rule == StoRule::SVEig) return out(sto_refl(m_star()));
        // SVCong over gen(#a) => gen(#a); m1 is the redex itself.
        return out(mk(StoRule::SVEig, d->dst, m_star()));
      }
      if (a->tag == Type::Tag::Arrow) {
        auto tm = sto_triangle(d->prems[0]);
        if (d->rule == StoRule::SVImp) {
          // m1 = ver(B, M' gen(A)); develop inside the created application.
          auto app = mk(StoRule::SApp1, m_app(d->prems[0]->dst, m_gen(a->a)),
                        m_app(tm->dst, m_gen(a->a)), {tm, sto_refl(m_gen(a->a))});
          return out(mk(StoRule::SVCong, d->dst, cdm, {app}));
        }
        return out(mk(StoRule::SVImp, d->dst, cdm, {tm}));
      }
      if (a->tag == Type::Tag::ForAll) {
        auto tm = sto_triangle(d->prems[0]);
        if (d->rule == StoRule::SVAll) {
          // m1 = nu #g. ver(B[g], M' [#g]); congruence under the binder.
          auto f1 = free_names(d->dst->body).eig_vars;
          auto fa = free_names(m).eig_vars;
          std::string g = fresh_for("_te", {&f1, &fa});
          MetatermPtr src_open = open_eig_in_term(d->dst->body, g);
          // src_open = ver(B[#g], M' [#g])
          auto tyapp = mk(StoRule::STApp1, src_open->sub, m_tyapp(tm->dst, t_eig(g)), {tm});
          auto ver = mk(StoRule::SVCong, src_open,
                        m_verif(src_open->ty, m_tyapp(tm->dst, t_eig(g))), {tyapp});
          return out(mk(StoRule::SFresh1, d->dst, cdm, {ver}, g));
        }
        return out(mk(StoRule::SVAll, d->dst, cdm, {tm}));
      }
      // Inert verifier type: congruence only.
      auto tm = sto_triangle(d->prems[0]);
      return out(mk(StoRule::SVCong, d->dst, cdm, {tm}));
    }
    case Metaterm::Tag::Fresh: {
      if (eig_binder_unused_in_term(m->body)) {
        if (d->rule == StoRule::SFresh2) return out(sto_triangle(d->prems[0]));
        // SFresh1 whose premise relates the body to itself-opened; since the
        // binder is unused the opened body is the body.
        auto tb = sto_triangle(d->prems[0]);
        return out(mk(StoRule::SFresh2, d->dst, cdm, {tb}));
      }
      auto tb = sto_triangle(d->prems[0]);
      return out(mk(StoRule::SFresh1, d->dst, cdm, {tb}, d->opened));
    }
    default:
      throw std::invalid_argument("triangle: unsupported term form");
  }
}

// ---------------------------------------------------------------------------
// Validation

namespace {

bool fail(std::string* why, const std::string& msg) {
  if (why) *why = msg;
  return false;
}

}  // namespace

bool sto_validate(const StoDerivPtr& d, std::string* why) {
  if (!d) return fail(why, "null derivation");
  for (const auto& p : d->prems)
    if (!sto_validate(p, why)) return false;
  auto bad = [&](const std::string& msg) {
    return fail(why, sto_rule_name(d->rule) + ": " + msg + " [src " + print(d->src) + " => dst " +
                         print(d->dst) + "]");
  };
  const MetatermPtr& s = d->src;
  const MetatermPtr& t = d->dst;
  switch (d->rule) {
    case StoRule::SVar:
      if (s->tag != Metaterm::Tag::Var || !term_eq(s, t) || !d->prems.empty())
        return bad("shape");
      return true;
    case StoRule::SStar:
      if (s->tag != Metaterm::Tag::Star || !term_eq(s, t) || !d->prems.empty())
        return bad("shape");
      return true;
    case StoRule::SGenRefl:
      if (s->tag != Metaterm::Tag::Gen || !term_eq(s, t) || !d->prems.empty())
        return bad("shape");
      return true;
    case StoRule::SLam: {
      if (s->tag != Metaterm::Tag::Lam || t->tag != Metaterm::Tag::Lam || d->prems.size() != 1)
        return bad("shape");
      if (free_names(s->body).term_vars.count(d->opened) ||
          free_names(t->body).term_vars.count(d->opened))
        return bad("opened name not fresh");
      const auto& p = d->prems[0];
      if (!term_eq(p->src, open_term(s->body, m_var(d->opened))) ||
          !term_eq(p->dst, open_term(t->body, m_var(d->opened))))
        return bad("premise mismatch");
      return true;
    }
    case StoRule::SApp1: {
      if (s->tag != Metaterm::Tag::App || t->tag != Metaterm::Tag::App || d->prems.size() != 2)
        return bad("shape");
      if (!term_eq(d->prems[0]->src, s->fun) || !term_eq(d->prems[0]->dst, t->fun) ||
          !term_eq(d->prems[1]->src, s->arg) || !term_eq(d->prems[1]->dst, t->arg))
        return bad("premise mismatch");
      return true;
    }
    case StoRule::SApp2: {
      if (s->tag != Metaterm::Tag::App || s->fun->tag != Metaterm::Tag::Lam ||
          d->prems.size() != 2)
        return bad("shape");
      auto fs = free_names(s).term_vars;
      if (fs.count(d->opened)) return bad("opened name not fresh");
      const auto& p1 = d->prems[0];
      const auto& p2 = d->prems[1];
      if (!term_eq(p1->src, open_term(s->fun->body, m_var(d->opened))) ||
          !term_eq(p2->src, s->arg))
        return bad("premise source mismatch");
      if (free_names(p2->dst).term_vars.count(d->opened)) return bad("argument captures name");
      if (!term_eq(t, subst_term(p1->dst, {{d->opened, p2->dst}})))
        return bad("destination is not the substituted development");
      return true;
    }
    case StoRule::STLam: {
      if (s->tag != Metaterm::Tag::TyLam || t->tag != Metaterm::Tag::TyLam ||
          d->prems.size() != 1 || !kind_eq(s->kind, t->kind))
        return bad("shape");
      if (free_names(s->body).type_vars.count(d->opened) ||
          free_names(t->body).type_vars.count(d->opened))
        return bad("opened name not fresh");
      const auto& p = d->prems[0];
      if (!term_eq(p->src, open_tvar_in_term(s->body, t_var(d->opened))) ||
          !term_eq(p->dst, open_tvar_in_term(t->body, t_var(d->opened))))
        return bad("premise mismatch");
      return true;
    }
    case StoRule::STApp1: {
      if (s->tag != Metaterm::Tag::TyApp || t->tag != Metaterm::Tag::TyApp ||
          d->prems.size() != 1 || !type_eq(s->ty, t->ty))
        return bad("shape");
      if (!term_eq(d->prems[0]->src, s->sub) || !term_eq(d->prems[0]->dst, t->sub))
        return bad("premise mismatch");
      return true;
    }
    case StoRule::STApp2: {
      if (s->tag != Metaterm::Tag::TyApp || s->sub->tag != Metaterm::Tag::TyLam ||
          d->prems.size() != 1)
        return bad("shape");
      auto fs = free_names(s).type_vars;
      auto ft = free_names(s->ty).type_vars;
      if (fs.count(d->opened) || ft.count(d->opened)) return bad("opened name not fresh");
      const auto& p = d->prems[0];
      if (!term_eq(p->src, open_tvar_in_term(s->sub->body, t_var(d->opened))))
        return bad("premise source mismatch");
      if (!term_eq(t, subst_tvar_in_term(p->dst, {{d->opened, s->ty}})))
        return bad("destination is not the substituted development");
      return true;
    }
    case StoRule::SGuard1: {
      if (s->tag != Metaterm::Tag::Guard || t->tag != Metaterm::Tag::Guard ||
          d->prems.size() != 2)
        return bad("shape");
      if (!term_eq(d->prems[0]->src, s->fun) || !term_eq(d->prems[0]->dst, t->fun) ||
          !term_eq(d->prems[1]->src, s->arg) || !term_eq(d->prems[1]->dst, t->arg))
        return bad("premise mismatch");
      return true;
    }
    case StoRule::SGuard2: {
      if (s->tag != Metaterm::Tag::Guard || s->fun->tag != Metaterm::Tag::Star ||
          d->prems.size() != 1)
        return bad("shape");
      if (!term_eq(d->prems[0]->src, s->arg) || !term_eq(d->prems[0]->dst, t))
        return bad("premise mismatch");
      return true;
    }
    case StoRule::SGenImp: {
      if (s->tag != Metaterm::Tag::Gen || s->ty->tag != Type::Tag::Arrow || !d->prems.empty())
        return bad("shape");
      if (!term_eq(t, gen_imp_rhs(s->ty))) return bad("destination mismatch");
      return true;
    }
    case StoRule::SGenAll: {
      if (s->tag != Metaterm::Tag::Gen || s->ty->tag != Type::Tag::ForAll || !d->prems.empty())
        return bad("shape");
      if (t->tag != Metaterm::Tag::TyLam || !kind_eq(t->kind, s->ty->kind) ||
          t->body->tag != Metaterm::Tag::Gen || !type_eq(t->body->ty, s->ty->body))
        return bad("destination mismatch");
      return true;
    }
    case StoRule::SVCong: {
      if (s->tag != Metaterm::Tag::Verif || t->tag != Metaterm::Tag::Verif ||
          d->prems.size() != 1 || !type_eq(s->ty, t->ty))
        return bad("shape");
      if (!term_eq(d->prems[0]->src, s->sub) || !term_eq(d->prems[0]->dst, t->sub))
        return bad("premise mismatch");
      return true;
    }
    case StoRule::SVEig: {
      if (s->tag != Metaterm::Tag::Verif || s->ty->tag != Type::Tag::Eig ||
          s->sub->tag != Metaterm::Tag::Gen || !type_eq(s->ty, s->sub->ty) || !d->prems.empty())
        return bad("shape");
      if (t->tag != Metaterm::Tag::Star) return bad("destination mismatch");
      return true;
    }
    case StoRule::SVImp: {
      if (s->tag != Metaterm::Tag::Verif || s->ty->tag != Type::Tag::Arrow ||
          d->prems.size() != 1)
        return bad("shape");
      if (!term_eq(d->prems[0]->src, s->sub)) return bad("premise source mismatch");
      if (!term_eq(t, m_verif(s->ty->b, m_app(d->prems[0]->dst, m_gen(s->ty->a)))))
        return bad("destination mismatch");
      return true;
    }
    case StoRule::SVAll: {
      if (s->tag != Metaterm::Tag::Verif || s->ty->tag != Type::Tag::ForAll ||
          d->prems.size() != 1)
        return bad("shape");
      if (!term_eq(d->prems[0]->src, s->sub)) return bad("premise source mismatch");
      auto f1 = free_names(s).eig_vars;
      auto f2 = free_names(d->prems[0]->dst).eig_vars;
      std::string g = fresh_for("_ve", {&f1, &f2});
      if (!term_eq(t, v_all_rhs(s->ty, d->prems[0]->dst, g))) return bad("destination mismatch");
      return true;
    }
    case StoRule::SFresh1: {
      if (s->tag != Metaterm::Tag::Fresh || t->tag != Metaterm::Tag::Fresh ||
          d->prems.size() != 1 || !kind_eq(s->kind, t->kind))
        return bad("shape");
      if (free_names(s->body).eig_vars.count(d->opened) ||
          free_names(t->body).eig_vars.count(d->opened))
        return bad("opened name not fresh");
      if (!term_eq(d->prems[0]->src, open_eig_in_term(s->body, d->opened)) ||
          !term_eq(d->prems[0]->dst, open_eig_in_term(t->body, d->opened)))
        return bad("premise mismatch");
      return true;
    }
    case StoRule::SFresh2: {
      if (s->tag != Metaterm::Tag::Fresh || d->prems.size() != 1) return bad("shape");
      if (!eig_binder_unused_in_term(s->body)) return bad("binder is used");
      if (!term_eq(d->prems[0]->src, s->body) || !term_eq(d->prems[0]->dst, t))
        return bad("premise mismatch");
      return true;
    }
  }
  return bad("unknown rule");
}

}  // namespace rlz
