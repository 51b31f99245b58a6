#include "rlz/reduction.hpp"

#include "rlz/typecheck.hpp"

namespace rlz {

std::string rule_tag_name(RuleTag r) {
  switch (r) {
    case RuleTag::Beta: return "Beta";
    case RuleTag::TyBeta: return "TyBeta";
    case RuleTag::GuardStar: return "GuardStar";
    case RuleTag::VerifEig: return "VerifEig";
    case RuleTag::GenImp: return "GenImp";
    case RuleTag::VerifImp: return "VerifImp";
    case RuleTag::GenAll: return "GenAll";
    case RuleTag::VerifAll: return "VerifAll";
    case RuleTag::FreshDrop: return "FreshDrop";
    case RuleTag::StExpand: return "StExpand";
  }
  return "?";
}

std::string path_to_string(const Path& p) {
  if (p.empty()) return "\xc2\xb7";  // middle dot for the root
  std::string out;
  for (size_t i = 0; i < p.size(); i++) {
    if (i) out += '/';
    switch (p[i]) {
      case PathStep::Fun: out += "fun"; break;
      case PathStep::Arg: out += "arg"; break;
      case PathStep::Cond: out += "cond"; break;
      case PathStep::Next: out += "next"; break;
      case PathStep::Body: out += "body"; break;
    }
  }
  return out;
}

std::string outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Normal: return "normal";
    case Outcome::StarReached: return "star";
    case Outcome::FuelExhausted: return "fuel";
  }
  return "?";
}

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::WeakHead: return "wh";
    case Strategy::LeftmostOutermost: return "lo";
    case Strategy::Random: return "random";
  }
  return "?";
}

namespace {

bool is_eig_spine(const TypePtr& a) {
  if (a->tag == Type::Tag::Eig) return true;
  if (a->tag == Type::Tag::TApp) return is_eig_spine(a->a);
  return false;
}

std::string local_name(const char* base, const std::set<std::string>& avoid) {
  std::string n = base;
  int i = 0;
  while (avoid.count(n)) n = std::string(base) + std::to_string(i++);
  return n;
}

// Does a rewriting rule apply at the root, and which one. `m` may live under
// opened binders, i.e. it is locally closed; `ctx` carries the kinds of the
// opened names at FOmega.
std::optional<RuleTag> root_matches(Level lv, const KindCtx& ctx, const MetatermPtr& m) {
  switch (m->tag) {
    case Metaterm::Tag::App:
      if (m->fun->tag == Metaterm::Tag::Lam) return RuleTag::Beta;
      return std::nullopt;
    case Metaterm::Tag::TyApp: {
      if (lv == Level::ST) return std::nullopt;
      if (m->sub->tag != Metaterm::Tag::TyLam) return std::nullopt;
      if (lv == Level::FOmega) {
        try {
          if (!kind_eq(kind_of(ctx, m->ty), m->sub->kind)) return std::nullopt;
        } catch (const std::runtime_error&) {
          return std::nullopt;
        }
      }
      return RuleTag::TyBeta;
    }
    case Metaterm::Tag::Guard:
      if (m->fun->tag == Metaterm::Tag::Star) return RuleTag::GuardStar;
      return std::nullopt;
    case Metaterm::Tag::Verif: {
      const TypePtr& a = m->ty;
      if (is_eig_spine(a)) {
        if (m->sub->tag == Metaterm::Tag::Gen && type_eq(a, m->sub->ty)) return RuleTag::VerifEig;
        return std::nullopt;
      }
      if (lv == Level::ST) return std::nullopt;
      if (a->tag == Type::Tag::Arrow) return RuleTag::VerifImp;
      if (a->tag == Type::Tag::ForAll) return RuleTag::VerifAll;
      return std::nullopt;
    }
    case Metaterm::Tag::Gen: {
      if (lv == Level::ST) return std::nullopt;
      if (m->ty->tag == Type::Tag::Arrow) return RuleTag::GenImp;
      if (m->ty->tag == Type::Tag::ForAll) return RuleTag::GenAll;
      return std::nullopt;
    }
    case Metaterm::Tag::Fresh:
      if (lv == Level::ST) return std::nullopt;
      if (eig_binder_unused_in_term(m->body)) return RuleTag::FreshDrop;
      return std::nullopt;
    default: return std::nullopt;
  }
}

// Contract the root redex. The fresh eigenvariable of rule VerifAll takes its
// name from `supply` when given (reduction sessions) or from the quantifier
// hint otherwise (pure uses; the choice is invisible modulo alpha).
MetatermPtr root_contract(Level lv, const KindCtx& ctx, const MetatermPtr& m, RuleTag rule,
                          NameSupply* supply) {
  switch (rule) {
    case RuleTag::Beta: {
      MetatermPtr out = open_term(m->fun->body, m->arg);
      return out;
    }
    case RuleTag::TyBeta: {
      MetatermPtr out = open_tvar_in_term(m->sub->body, m->ty);
      return canonicalize(lv, out);
    }
    case RuleTag::GuardStar: return m->arg;
    case RuleTag::VerifEig: return m_star();
    case RuleTag::VerifImp:
      return m_verif(m->ty->b, m_app(m->sub, m_gen(m->ty->a)));
    case RuleTag::VerifAll: {
      std::set<std::string> avoid = free_names(m).eig_vars;
      for (const auto& [n, k] : ctx.eigs()) {
        (void)k;
        avoid.insert(n);
      }
      std::string g = supply ? supply->fresh_eig(avoid)
                             : local_name(m->ty->hint.empty() ? "g" : m->ty->hint.c_str(), avoid);
      MetatermPtr body =
          m_verif(open_tvar(m->ty->body, t_eig(g)), m_tyapp(m->sub, t_eig(g)));
      return m_fresh(g, m->ty->kind, close_eig_in_term(body, g));
    }
    case RuleTag::GenImp:
      return m_lam("x", m_guard(m_verif(m->ty->a, m_bvar(0)), m_gen(m->ty->b)));
    case RuleTag::GenAll:
      // ForAll and TyLam bind the same namespace, the body transfers as is.
      return m_tylam(m->ty->hint, m->ty->kind, m_gen(m->ty->body));
    case RuleTag::FreshDrop: return m->body;
    case RuleTag::StExpand: break;
  }
  throw std::invalid_argument("rule does not contract at the root");
}

struct OpenedBinder {
  std::string name;
  enum class Ns { Term, TVar, Eig } ns;
};

// Rebuild `m` with the subterm at `path` transformed by `fn`, opening binders
// along the way so that every value seen by `fn` is locally closed.
template <class Fn>
MetatermPtr rebuild_at(Level lv, const KindCtx& ctx, const MetatermPtr& m, const Path& path,
                       size_t i, Fn&& fn) {
  if (i == path.size()) return fn(ctx, m);
  switch (path[i]) {
    case PathStep::Fun:
      if (m->tag == Metaterm::Tag::App)
        return m_app(rebuild_at(lv, ctx, m->fun, path, i + 1, fn), m->arg);
      if (m->tag == Metaterm::Tag::TyApp)
        return m_tyapp(rebuild_at(lv, ctx, m->sub, path, i + 1, fn), m->ty);
      break;
    case PathStep::Arg:
      if (m->tag == Metaterm::Tag::App)
        return m_app(m->fun, rebuild_at(lv, ctx, m->arg, path, i + 1, fn));
      if (m->tag == Metaterm::Tag::Verif)
        return m_verif(m->ty, rebuild_at(lv, ctx, m->sub, path, i + 1, fn));
      break;
    case PathStep::Cond:
      if (m->tag == Metaterm::Tag::Guard)
        return m_guard(rebuild_at(lv, ctx, m->fun, path, i + 1, fn), m->arg);
      break;
    case PathStep::Next:
      if (m->tag == Metaterm::Tag::Guard)
        return m_guard(m->fun, rebuild_at(lv, ctx, m->arg, path, i + 1, fn));
      break;
    case PathStep::Body: {
      if (m->tag == Metaterm::Tag::Lam) {
        std::string x = local_name("_o", free_names(m->body).term_vars);
        MetatermPtr inner =
            rebuild_at(lv, ctx, open_term(m->body, m_var(x)), path, i + 1, fn);
        return m_lam(m->hint, close_term(inner, x));
      }
      if (m->tag == Metaterm::Tag::TyLam) {
        std::string a = local_name("_t", free_names(m->body).type_vars);
        MetatermPtr inner = rebuild_at(lv, ctx.with_tvar(a, m->kind),
                                       open_tvar_in_term(m->body, t_var(a)), path, i + 1, fn);
        return m_tylam(m->hint, m->kind, close_tvar_in_term(inner, a));
      }
      if (m->tag == Metaterm::Tag::Fresh) {
        std::string g = local_name("_e", free_names(m->body).eig_vars);
        MetatermPtr inner = rebuild_at(lv, ctx.with_eig(g, m->kind),
                                       open_eig_in_term(m->body, g), path, i + 1, fn);
        return m_fresh(m->hint, m->kind, close_eig_in_term(inner, g));
      }
      break;
    }
  }
  throw std::invalid_argument("path does not address a subterm");
}

void enumerate_rec(Level lv, const KindCtx& ctx, const MetatermPtr& m, Path& path,
                   std::vector<std::pair<Path, RuleTag>>& out) {
  if (auto r = root_matches(lv, ctx, m)) out.emplace_back(path, *r);
  auto child = [&](PathStep s, const KindCtx& c, const MetatermPtr& sub) {
    path.push_back(s);
    enumerate_rec(lv, c, sub, path, out);
    path.pop_back();
  };
  switch (m->tag) {
    case Metaterm::Tag::App:
      child(PathStep::Fun, ctx, m->fun);
      child(PathStep::Arg, ctx, m->arg);
      break;
    case Metaterm::Tag::Guard:
      child(PathStep::Cond, ctx, m->fun);
      child(PathStep::Next, ctx, m->arg);
      break;
    case Metaterm::Tag::TyApp: child(PathStep::Fun, ctx, m->sub); break;
    case Metaterm::Tag::Verif: child(PathStep::Arg, ctx, m->sub); break;
    case Metaterm::Tag::Lam: {
      std::string x = local_name("_o", free_names(m->body).term_vars);
      child(PathStep::Body, ctx, open_term(m->body, m_var(x)));
      break;
    }
    case Metaterm::Tag::TyLam: {
      std::string a = local_name("_t", free_names(m->body).type_vars);
      child(PathStep::Body, ctx.with_tvar(a, m->kind), open_tvar_in_term(m->body, t_var(a)));
      break;
    }
    case Metaterm::Tag::Fresh: {
      std::string g = local_name("_e", free_names(m->body).eig_vars);
      child(PathStep::Body, ctx.with_eig(g, m->kind), open_eig_in_term(m->body, g));
      break;
    }
    default: break;
  }
}

void enumerate_wh_rec(Level lv, const KindCtx& ctx, const MetatermPtr& m, Path& path,
                      std::vector<std::pair<Path, RuleTag>>& out) {
  if (auto r = root_matches(lv, ctx, m)) out.emplace_back(path, *r);
  auto child = [&](PathStep s, const KindCtx& c, const MetatermPtr& sub) {
    path.push_back(s);
    enumerate_wh_rec(lv, c, sub, path, out);
    path.pop_back();
  };
  switch (m->tag) {
    case Metaterm::Tag::App: child(PathStep::Fun, ctx, m->fun); break;
    case Metaterm::Tag::TyApp: child(PathStep::Fun, ctx, m->sub); break;
    case Metaterm::Tag::Guard: child(PathStep::Cond, ctx, m->fun); break;
    case Metaterm::Tag::Verif: child(PathStep::Arg, ctx, m->sub); break;
    case Metaterm::Tag::Fresh: {
      if (lv == Level::ST) break;
      std::string g = local_name("_e", free_names(m->body).eig_vars);
      child(PathStep::Body, ctx.with_eig(g, m->kind), open_eig_in_term(m->body, g));
      break;
    }
    default: break;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ST expansion

MetatermPtr expand_st_gen(const TypePtr& a) {
  switch (a->tag) {
    case Type::Tag::Eig: return m_gen(a);
    case Type::Tag::Arrow:
      return m_lam("x", m_guard(expand_st_verif(a->a, m_bvar(0)), expand_st_gen(a->b)));
    default: throw LevelError("ST generators exist only at eigenvariable and arrow types");
  }
}

MetatermPtr expand_st_verif(const TypePtr& a, const MetatermPtr& m) {
  switch (a->tag) {
    case Type::Tag::Eig: return m_verif(a, m);
    case Type::Tag::Arrow: return expand_st_verif(a->b, m_app(m, expand_st_gen(a->a)));
    default: throw LevelError("ST verifiers exist only at eigenvariable and arrow types");
  }
}

MetatermPtr expand_st(const MetatermPtr& surface) {
  switch (surface->tag) {
    case Metaterm::Tag::Var:
    case Metaterm::Tag::BVar:
    case Metaterm::Tag::Star: return surface;
    case Metaterm::Tag::Lam: {
      auto b = expand_st(surface->body);
      return b == surface->body ? surface : m_lam(surface->hint, b);
    }
    case Metaterm::Tag::App: {
      auto f = expand_st(surface->fun), a = expand_st(surface->arg);
      return f == surface->fun && a == surface->arg ? surface : m_app(f, a);
    }
    case Metaterm::Tag::Guard: {
      auto f = expand_st(surface->fun), a = expand_st(surface->arg);
      return f == surface->fun && a == surface->arg ? surface : m_guard(f, a);
    }
    case Metaterm::Tag::Gen: return expand_st_gen(surface->ty);
    case Metaterm::Tag::Verif: return expand_st_verif(surface->ty, expand_st(surface->sub));
    case Metaterm::Tag::Anno:
      throw std::invalid_argument("annotations must be erased before expansion");
    default: throw LevelError("quantifier-level constructs are not part of the ST level");
  }
}

// ---------------------------------------------------------------------------
// Stepping

std::optional<Step> wh_step(ReduceSession& session, const MetatermPtr& m) {
  struct Rec {
    ReduceSession& s;
    // Returns the contracted whole subterm plus path within it.
    std::optional<Step> go(const KindCtx& ctx, const MetatermPtr& m) {
      if (auto r = root_matches(s.level, ctx, m)) {
        MetatermPtr after = root_contract(s.level, ctx, m, *r, &s.supply);
        return Step{*r, {}, m, after};
      }
      auto wrap = [&](PathStep ps, std::optional<Step> inner,
                      MetatermPtr (*rebuild)(const MetatermPtr&, const MetatermPtr&))
          -> std::optional<Step> {
        if (!inner) return std::nullopt;
        Path p;
        p.push_back(ps);
        p.insert(p.end(), inner->pos.begin(), inner->pos.end());
        return Step{inner->rule, std::move(p), m, rebuild(m, inner->after)};
      };
      switch (m->tag) {
        case Metaterm::Tag::App:
          return wrap(PathStep::Fun, go(ctx, m->fun),
                      [](const MetatermPtr& w, const MetatermPtr& f) { return m_app(f, w->arg); });
        case Metaterm::Tag::TyApp:
          if (s.level == Level::ST) return std::nullopt;
          return wrap(PathStep::Fun, go(ctx, m->sub), [](const MetatermPtr& w, const MetatermPtr& f) {
            return m_tyapp(f, w->ty);
          });
        case Metaterm::Tag::Guard:
          return wrap(PathStep::Cond, go(ctx, m->fun), [](const MetatermPtr& w, const MetatermPtr& c) {
            return m_guard(c, w->arg);
          });
        case Metaterm::Tag::Verif:
          return wrap(PathStep::Arg, go(ctx, m->sub), [](const MetatermPtr& w, const MetatermPtr& a) {
            return m_verif(w->ty, a);
          });
        case Metaterm::Tag::Fresh: {
          if (s.level == Level::ST) return std::nullopt;
          std::string g = local_name("_e", free_names(m->body).eig_vars);
          auto inner = go(ctx.with_eig(g, m->kind), open_eig_in_term(m->body, g));
          if (!inner) return std::nullopt;
          Path p;
          p.push_back(PathStep::Body);
          p.insert(p.end(), inner->pos.begin(), inner->pos.end());
          return Step{inner->rule, std::move(p), m,
                      m_fresh(m->hint, m->kind, close_eig_in_term(inner->after, g))};
        }
        default: return std::nullopt;
      }
    }
  };
  Rec rec{session};
  return rec.go(session.ctx, m);
}

std::vector<std::pair<Path, RuleTag>> enumerate_redexes(const ReduceSession& session,
                                                        const MetatermPtr& m) {
  std::vector<std::pair<Path, RuleTag>> out;
  Path p;
  enumerate_rec(session.level, session.ctx, m, p, out);
  return out;
}

std::vector<std::pair<Path, RuleTag>> enumerate_wh_redexes(const ReduceSession& session,
                                                           const MetatermPtr& m) {
  std::vector<std::pair<Path, RuleTag>> out;
  Path p;
  enumerate_wh_rec(session.level, session.ctx, m, p, out);
  return out;
}

Step apply_at(ReduceSession& session, const MetatermPtr& m, const Path& pos, RuleTag rule) {
  MetatermPtr after =
      rebuild_at(session.level, session.ctx, m, pos, 0,
                 [&](const KindCtx& ctx, const MetatermPtr& sub) {
                   auto r = root_matches(session.level, ctx, sub);
                   if (!r || *r != rule)
                     throw std::invalid_argument("no " + rule_tag_name(rule) + " redex at " +
                                                 path_to_string(pos));
                   return root_contract(session.level, ctx, sub, rule, &session.supply);
                 });
  return Step{rule, pos, m, after};
}

bool revalidate_step(ReduceSession& session, const Step& s) {
  try {
    Step redo = apply_at(session, s.before, s.pos, s.rule);
    return term_eq(redo.after, s.after);
  } catch (const std::invalid_argument&) {
    return false;
  }
}

namespace {

// Node count, stopping early once the cap is passed.
size_t term_size_capped(const MetatermPtr& m, size_t cap) {
  size_t n = 1;
  switch (m->tag) {
    case Metaterm::Tag::Lam:
    case Metaterm::Tag::TyLam:
    case Metaterm::Tag::Fresh: n += term_size_capped(m->body, cap); break;
    case Metaterm::Tag::App:
    case Metaterm::Tag::Guard: {
      n += term_size_capped(m->fun, cap);
      if (n > cap) return n;
      n += term_size_capped(m->arg, cap);
      break;
    }
    case Metaterm::Tag::TyApp:
    case Metaterm::Tag::Verif:
    case Metaterm::Tag::Anno: n += term_size_capped(m->sub, cap); break;
    default: break;
  }
  return n;
}

}  // namespace

Trace reduce(ReduceSession& session, const MetatermPtr& m, Strategy strategy, uint64_t fuel,
             uint64_t seed) {
  Trace trace;
  trace.level = session.level;
  trace.initial = m;
  std::mt19937_64 rng(seed);
  MetatermPtr cur = m;
  for (uint64_t used = 0; used < fuel; used++) {
    std::optional<Step> step;
    switch (strategy) {
      case Strategy::WeakHead: step = wh_step(session, cur); break;
      case Strategy::LeftmostOutermost: {
        auto redexes = enumerate_redexes(session, cur);
        if (!redexes.empty())
          step = apply_at(session, cur, redexes.front().first, redexes.front().second);
        break;
      }
      case Strategy::Random: {
        auto redexes = enumerate_redexes(session, cur);
        if (!redexes.empty()) {
          std::uniform_int_distribution<size_t> pick(0, redexes.size() - 1);
          const auto& [pos, rule] = redexes[pick(rng)];
          step = apply_at(session, cur, pos, rule);
        }
        break;
      }
    }
    if (!step) {
      trace.outcome = cur->tag == Metaterm::Tag::Star ? Outcome::StarReached : Outcome::Normal;
      trace.final_term = cur;
      return trace;
    }
    cur = step->after;
    trace.step_count++;
    if (session.record_steps) trace.steps.push_back(std::move(*step));
    if (session.size_limit && term_size_capped(cur, session.size_limit) > session.size_limit) {
      trace.final_term = cur;
      trace.outcome = Outcome::FuelExhausted;
      return trace;
    }
  }
  // Out of fuel; classify what we stopped at.
  bool more;
  if (strategy == Strategy::WeakHead)
    more = wh_step(session, cur).has_value();
  else
    more = !enumerate_redexes(session, cur).empty();
  trace.final_term = cur;
  trace.outcome = more ? Outcome::FuelExhausted
                       : (cur->tag == Metaterm::Tag::Star ? Outcome::StarReached : Outcome::Normal);
  return trace;
}

// ---------------------------------------------------------------------------
// Complete development (level F)

namespace {

MetatermPtr cd_rec(const MetatermPtr& m) {
  switch (m->tag) {
    case Metaterm::Tag::Var:
    case Metaterm::Tag::BVar:
    case Metaterm::Tag::Star: return m;
    case Metaterm::Tag::Lam: {
      std::string x = local_name("_o", free_names(m->body).term_vars);
      return m_lam(m->hint, close_term(cd_rec(open_term(m->body, m_var(x))), x));
    }
    case Metaterm::Tag::TyLam: {
      std::string a = local_name("_t", free_names(m->body).type_vars);
      return m_tylam(m->hint, m->kind,
                     close_tvar_in_term(cd_rec(open_tvar_in_term(m->body, t_var(a))), a));
    }
    case Metaterm::Tag::App: {
      if (m->fun->tag == Metaterm::Tag::Lam) {
        // app2: develop body and argument, then substitute.
        std::string x = local_name("_o", free_names(m->fun->body).term_vars);
        MetatermPtr body = cd_rec(open_term(m->fun->body, m_var(x)));
        MetatermPtr arg = cd_rec(m->arg);
        return subst_term(body, {{x, arg}});
      }
      return m_app(cd_rec(m->fun), cd_rec(m->arg));
    }
    case Metaterm::Tag::TyApp: {
      if (m->sub->tag == Metaterm::Tag::TyLam) {
        std::string a = local_name("_t", free_names(m->sub->body).type_vars);
        MetatermPtr body = cd_rec(open_tvar_in_term(m->sub->body, t_var(a)));
        return subst_tvar_in_term(body, {{a, m->ty}});
      }
      return m_tyapp(cd_rec(m->sub), m->ty);
    }
    case Metaterm::Tag::Guard: {
      if (m->fun->tag == Metaterm::Tag::Star) return cd_rec(m->arg);  // guard2
      return m_guard(cd_rec(m->fun), cd_rec(m->arg));
    }
    case Metaterm::Tag::Gen: {
      if (m->ty->tag == Type::Tag::Arrow)  // g-imp
        return m_lam("x", m_guard(m_verif(m->ty->a, m_bvar(0)), m_gen(m->ty->b)));
      if (m->ty->tag == Type::Tag::ForAll)  // g-all
        return m_tylam(m->ty->hint, m->ty->kind, m_gen(m->ty->body));
      return m;
    }
    case Metaterm::Tag::Verif: {
      const TypePtr& a = m->ty;
      if (a->tag == Type::Tag::Eig && m->sub->tag == Metaterm::Tag::Gen &&
          type_eq(a, m->sub->ty))
        return m_star();  // v-eig
      if (a->tag == Type::Tag::Arrow)
        return m_verif(a->b, m_app(cd_rec(m->sub), m_gen(a->a)));  // v-imp
      if (a->tag == Type::Tag::ForAll) {                           // v-all
        std::set<std::string> avoid = free_names(m).eig_vars;
        std::string g = local_name(a->hint.empty() ? "g" : a->hint.c_str(), avoid);
        MetatermPtr body = m_verif(open_tvar(a->body, t_eig(g)), m_tyapp(cd_rec(m->sub), t_eig(g)));
        return m_fresh(g, a->kind, close_eig_in_term(body, g));
      }
      return m_verif(a, cd_rec(m->sub));  // v-cong
    }
    case Metaterm::Tag::Fresh: {
      if (eig_binder_unused_in_term(m->body)) return cd_rec(m->body);  // fresh2
      std::string g = local_name("_e", free_names(m->body).eig_vars);
      return m_fresh(m->hint, m->kind,
                     close_eig_in_term(cd_rec(open_eig_in_term(m->body, g)), g));
    }
    case Metaterm::Tag::Anno:
      throw std::invalid_argument("annotations must be erased before development");
  }
  return m;
}

}  // namespace

MetatermPtr complete_development(Level lv, const MetatermPtr& m) {
  if (lv != Level::F) throw LevelError("complete development is defined at level F");
  return cd_rec(m);
}

}  // namespace rlz
