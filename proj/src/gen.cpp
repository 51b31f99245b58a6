#include "rlz/gen.hpp"

#include "rlz/reduction.hpp"
#include "rlz/typecheck.hpp"

namespace rlz {

namespace {

struct Rng {
  std::mt19937_64 e;
  explicit Rng(uint64_t seed) : e(seed) {}
  int upto(int n) {  // uniform in [0, n)
    return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(e));
  }
  bool chance(int percent) { return upto(100) < percent; }
};

KindPtr random_kind(Rng& rng, int depth) {
  if (depth <= 0 || rng.chance(60)) return rng.chance(50) ? kind_prop() : kind_base("k");
  return kind_arrow(random_kind(rng, depth - 1), random_kind(rng, depth - 1));
}

// The ambient kind context: a handful of eigenvariables. At ST/F they are
// all propositions; at FOmega some are higher-kinded.
KindCtx base_ctx(Rng&, const GenConfig& cfg) {
  KindCtx ctx;
  const char* props[] = {"a", "b", "c"};
  for (const char* n : props) ctx = ctx.with_eig(n, kind_prop());
  if (cfg.level == Level::FOmega) {
    ctx = ctx.with_eig("e", kind_base("k"));
    ctx = ctx.with_eig("f", kind_base("k"));
    ctx = ctx.with_eig("p", kind_arrow(kind_base("k"), kind_prop()));
    ctx = ctx.with_eig("q", kind_arrow(kind_prop(), kind_prop()));
  }
  return ctx;
}

std::vector<std::string> eigs_of_kind(const KindCtx& ctx, const KindPtr& k) {
  std::vector<std::string> out;
  for (const auto& [n, kk] : ctx.eigs())
    if (kind_eq(kk, k)) out.push_back(n);
  return out;
}

// Random closed type of the given kind (no free type variables).
TypePtr random_type(Rng& rng, const KindCtx& ctx, Level lv, const KindPtr& kind, int depth);

TypePtr random_prop(Rng& rng, const KindCtx& ctx, Level lv, int depth) {
  int roll = rng.upto(depth <= 0 ? 2 : (lv == Level::ST ? 4 : 6));
  switch (roll) {
    case 0:
    case 1: {
      if (lv == Level::FOmega && rng.chance(30)) {
        // an applied predicate eigenvariable: #p A
        auto ps = eigs_of_kind(ctx, kind_arrow(kind_base("k"), kind_prop()));
        if (!ps.empty()) {
          TypePtr arg = random_type(rng, ctx, lv, kind_base("k"), 0);
          return t_tapp(t_eig(ps[static_cast<size_t>(rng.upto(static_cast<int>(ps.size())))]),
                        arg);
        }
      }
      auto as = eigs_of_kind(ctx, kind_prop());
      return t_eig(as[static_cast<size_t>(rng.upto(static_cast<int>(as.size())))]);
    }
    case 2:
    case 3:
      return t_arrow(random_prop(rng, ctx, lv, depth - 1), random_prop(rng, ctx, lv, depth - 1));
    default: {
      KindPtr k = lv == Level::FOmega && rng.chance(30) ? random_kind(rng, 1) : kind_prop();
      std::string a = "t";
      // Quantified body: use the bound variable when its kind is Prop.
      TypePtr body;
      if (is_prop(k) && rng.chance(70)) {
        TypePtr inner = random_prop(rng, ctx, lv, depth - 1);
        body = rng.chance(50) ? t_arrow(t_var(a), inner) : t_arrow(inner, t_var(a));
      } else {
        body = random_prop(rng, ctx, lv, depth - 1);
      }
      return t_forall(a, k, close_tvar(body, a));
    }
  }
}

TypePtr random_type(Rng& rng, const KindCtx& ctx, Level lv, const KindPtr& kind, int depth) {
  if (is_prop(kind)) return random_prop(rng, ctx, lv, depth);
  auto candidates = eigs_of_kind(ctx, kind);
  if (!candidates.empty() && (depth <= 0 || rng.chance(70)))
    return t_eig(candidates[static_cast<size_t>(rng.upto(static_cast<int>(candidates.size())))]);
  if (kind->tag == Kind::Tag::Arrow) {
    std::string a = "u";
    TypePtr body = random_type(rng, ctx, lv, kind->cod, depth - 1);
    return t_tlam(a, kind->dom, close_tvar(body, a));
  }
  if (!candidates.empty())
    return t_eig(candidates[static_cast<size_t>(rng.upto(static_cast<int>(candidates.size())))]);
  throw GenerationExhausted("no inhabitant for the requested kind");
}

// ---------------------------------------------------------------------------
// Well-typed terms

struct TypedGen {
  Rng rng;
  Level lv;
  KindCtx ctx;
  TypeEnv env;  // grows as the construction demands witnesses
  // Scratch eigenvariables stand for type variables bound by enclosing type
  // abstractions; the All-intro side condition forbids them in the output
  // environment, so witnesses of such types can only come from binders.
  std::set<std::string> scratch;
  int next_var = 0;
  int next_tvar = 0;
  int work = 4000;  // bounds the backtracking search; exhaustion retries the attempt

  TypedGen(uint64_t seed, Level level) : rng(seed), lv(level) {}

  void spend() {
    if (--work <= 0) throw GenerationExhausted("generation work budget exhausted");
  }

  std::string fresh_var() { return "v" + std::to_string(next_var++); }

  bool mentions_scratch(const TypePtr& a) {
    for (const auto& g : free_names(a).eig_vars)
      if (scratch.count(g)) return true;
    return false;
  }

  MetatermPtr var_witness(const TypePtr& a) {
    for (const auto& [x, t] : env.entries())
      if (equiv_type(lv, t, a) && rng.chance(60)) return m_var(x);
    if (mentions_scratch(a)) {
      for (const auto& [x, t] : env.entries())
        if (equiv_type(lv, t, a)) return m_var(x);
      throw GenerationExhausted("target type depends on a bound type variable");
    }
    std::string x = fresh_var();
    env = env.extended(x, a);
    return m_var(x);
  }

  // Try to build a neutral spine from an environment variable reaching `a`.
  std::optional<MetatermPtr> spine(const TypePtr& from_ty, const MetatermPtr& head,
                                   const TypePtr& target, int depth, int hops) {
    spend();
    TypePtr cur = canonicalize_type(lv, from_ty);
    if (equiv_type(lv, cur, target)) return head;
    if (hops <= 0) return std::nullopt;
    if (cur->tag == Type::Tag::Arrow) {
      TypeEnv saved = env;
      try {
        MetatermPtr arg = go(cur->a, depth - 1);
        if (auto r = spine(cur->b, m_app(head, arg), target, depth, hops - 1)) return r;
      } catch (const GenerationExhausted&) {
      }
      env = saved;
      return std::nullopt;
    }
    if (cur->tag == Type::Tag::ForAll) {
      // Candidate instantiations: eigenvariables of the right kind and, for
      // Prop, small random propositions.
      std::vector<TypePtr> cands;
      for (const auto& n : eigs_of_kind(ctx, cur->kind)) cands.push_back(t_eig(n));
      if (is_prop(cur->kind)) {
        cands.push_back(target);
        cands.push_back(random_prop(rng, ctx, lv, 1));
      }
      if (cur->kind->tag == Kind::Tag::Arrow)
        cands.push_back(random_type(rng, ctx, lv, cur->kind, 1));
      for (const auto& b : cands) {
        TypePtr inst = canonicalize_type(lv, open_tvar(cur->body, b));
        TypeEnv saved = env;
        try {
          if (auto r = spine(inst, m_tyapp(head, b), target, depth, hops - 1)) return r;
        } catch (const GenerationExhausted&) {
        }
        env = saved;
      }
    }
    return std::nullopt;
  }

  MetatermPtr go(const TypePtr& a_raw, int depth) {
    spend();
    TypePtr a = canonicalize_type(lv, a_raw);
    if (depth > 0) {
      // Wrap in a beta redex occasionally so inputs are not already normal.
      if (rng.chance(12)) {
        // A beta redex; the abstraction head carries a surface annotation so
        // the judgment stays synthesizable.
        TypePtr b = random_prop(rng, ctx, lv, 1);
        std::string x = fresh_var();
        env = env.extended(x, b);
        MetatermPtr body = go(a, depth - 1);
        // Variables demanded inside the body stay in the output environment;
        // drop only the binder itself.
        env = env.without(x);
        MetatermPtr arg = go(b, depth - 1);
        return m_app(m_anno(m_lam(x, close_term(body, x)), t_arrow(b, a)), arg);
      }
      if (a->tag == Type::Tag::Arrow && rng.chance(75)) {
        std::string x = fresh_var();
        env = env.extended(x, a->a);
        MetatermPtr body = go(a->b, depth - 1);
        env = env.without(x);
        return m_lam(x, close_term(body, x));
      }
      if (a->tag == Type::Tag::ForAll && rng.chance(85)) {
        // Use a scratch eigenvariable for the bound type variable so every
        // intermediate type stays closed, then rename when closing.
        std::string g = "w" + std::to_string(next_tvar++);
        KindCtx saved = ctx;
        ctx = ctx.with_eig(g, a->kind);
        scratch.insert(g);
        MetatermPtr body = go(open_tvar(a->body, t_eig(g)), depth - 1);
        scratch.erase(g);
        ctx = saved;
        std::string tv = "r" + std::to_string(next_tvar++);
        MetatermPtr renamed = subst_eig_in_term(body, {{g, t_var(tv)}});
        return m_tylam(tv, a->kind, close_tvar_in_term(renamed, tv));
      }
      // Spine from an existing variable.
      if (!env.empty() && rng.chance(60)) {
        for (int attempt = 0; attempt < 3; attempt++) {
          const auto& entries = env.entries();
          const auto& [x, t] = entries[static_cast<size_t>(
              rng.upto(static_cast<int>(entries.size())))];
          if (auto r = spine(t, m_var(x), a, depth, 3)) return *r;
        }
      }
    }
    return var_witness(a);
  }
};

}  // namespace

TypedJudgment gen_typed_term(const GenConfig& cfg) {
  for (uint64_t attempt = 0;; attempt++) {
    if (attempt == 32) throw GenerationExhausted("no derivable judgment within bounds");
    try {
      TypedGen g(cfg.seed + attempt * 0x9e3779b97f4a7c15ull, cfg.level);
      g.ctx = base_ctx(g.rng, cfg);
      TypePtr a = random_prop(g.rng, g.ctx, cfg.level, std::min(cfg.max_depth, 3));
      for (int i = 0; i < cfg.env_size; i++) {
        TypePtr t = random_prop(g.rng, g.ctx, cfg.level, 2);
        g.env = g.env.extended(g.fresh_var(), t);
      }
      MetatermPtr term = g.go(a, cfg.max_depth);
      return TypedJudgment{g.ctx, g.env, term, a};
    } catch (const GenerationExhausted&) {
      continue;
    }
  }
}

// ---------------------------------------------------------------------------
// Arbitrary metaterms

namespace {

struct TermGen {
  Rng rng;
  Level lv;
  KindCtx ctx;
  std::vector<std::string> vars;  // bound variables in scope (as free names)
  int next = 0;

  MetatermPtr leaf() {
    int n = rng.upto(3 + static_cast<int>(!vars.empty()));
    switch (n) {
      case 0: return m_star();
      case 1: {
        auto as = eigs_of_kind(ctx, kind_prop());
        return m_gen(t_eig(as[static_cast<size_t>(rng.upto(static_cast<int>(as.size())))]));
      }
      case 2: return m_var("u" + std::to_string(rng.upto(2)));
      default: return m_var(vars[static_cast<size_t>(rng.upto(static_cast<int>(vars.size())))]);
    }
  }

  MetatermPtr go(int depth) {
    if (depth <= 0) return leaf();
    int n = rng.upto(lv == Level::ST ? 8 : 11);
    switch (n) {
      case 0: return leaf();
      case 1: {
        std::string x = "z" + std::to_string(next++);
        vars.push_back(x);
        MetatermPtr body = go(depth - 1);
        vars.pop_back();
        return m_lam(x, close_term(body, x));
      }
      case 2:
      case 3: {
        // Bias towards beta redexes.
        MetatermPtr f = go(depth - 1);
        if (rng.chance(50) && f->tag != Metaterm::Tag::Lam) {
          std::string x = "z" + std::to_string(next++);
          vars.push_back(x);
          MetatermPtr body = go(depth - 1);
          vars.pop_back();
          f = m_lam(x, close_term(body, x));
        }
        return m_app(f, go(depth - 1));
      }
      case 4: {
        MetatermPtr c = rng.chance(40) ? m_star() : go(depth - 1);
        return m_guard(c, go(depth - 1));
      }
      case 5: return m_gen(random_prop(rng, ctx, lv, std::min(depth, 2)));
      case 6: {
        TypePtr a = random_prop(rng, ctx, lv, std::min(depth, 2));
        if (rng.chance(35)) return m_verif(a, m_gen(a));
        return m_verif(a, go(depth - 1));
      }
      case 7: return m_guard(go(depth - 1), go(depth - 1));
      case 8: {
        std::string a = "s" + std::to_string(next++);
        KindPtr k = lv == Level::FOmega ? random_kind(rng, 1) : kind_prop();
        KindCtx saved = ctx;
        std::string g = "w" + std::to_string(next++);
        ctx = ctx.with_eig(g, k);
        MetatermPtr body = go(depth - 1);
        ctx = saved;
        MetatermPtr renamed = subst_eig_in_term(body, {{g, t_var(a)}});
        return m_tylam(a, k, close_tvar_in_term(renamed, a));
      }
      case 9: {
        MetatermPtr f = go(depth - 1);
        KindPtr k = lv == Level::FOmega ? random_kind(rng, 1) : kind_prop();
        return m_tyapp(f, random_type(rng, ctx, lv, k, std::min(depth, 2)));
      }
      default: {
        std::string g = "n" + std::to_string(next++);
        KindPtr k = lv == Level::FOmega ? random_kind(rng, 1) : kind_prop();
        KindCtx saved = ctx;
        ctx = ctx.with_eig(g, k);
        MetatermPtr body = go(depth - 1);
        ctx = saved;
        return m_fresh(g, k, close_eig_in_term(body, g));
      }
    }
  }
};

}  // namespace

MetatermPtr gen_metaterm(const GenConfig& cfg, KindCtx& ctx_out) {
  TermGen g{Rng(cfg.seed), cfg.level, {}, {}, 0};
  g.ctx = base_ctx(g.rng, cfg);
  MetatermPtr m = g.go(cfg.max_depth);
  ctx_out = g.ctx;
  return canonicalize(cfg.level, m);
}

MetatermPtr gen_metaterm(const GenConfig& cfg) {
  KindCtx ctx;
  return gen_metaterm(cfg, ctx);
}

MetatermPtr gen_pure_closed(const GenConfig& cfg) {
  Rng rng(cfg.seed);
  int next = 0;
  std::vector<std::string> vars;
  std::function<MetatermPtr(int)> go = [&](int depth) -> MetatermPtr {
    if (depth <= 0) {
      if (vars.empty() || rng.chance(25)) {
        std::string x = "z" + std::to_string(next++);
        vars.push_back(x);
        MetatermPtr body =
            m_var(vars[static_cast<size_t>(rng.upto(static_cast<int>(vars.size())))]);
        vars.pop_back();
        return m_lam(x, close_term(body, x));
      }
      return m_var(vars[static_cast<size_t>(rng.upto(static_cast<int>(vars.size())))]);
    }
    switch (rng.upto(3)) {
      case 0: {
        std::string x = "z" + std::to_string(next++);
        vars.push_back(x);
        MetatermPtr body = go(depth - 1);
        vars.pop_back();
        return m_lam(x, close_term(body, x));
      }
      case 1: return m_app(go(depth - 1), go(depth - 1));
      default: {
        if (vars.empty()) {
          std::string x = "z" + std::to_string(next++);
          vars.push_back(x);
          MetatermPtr body = go(depth - 1);
          vars.pop_back();
          return m_lam(x, close_term(body, x));
        }
        return m_var(vars[static_cast<size_t>(rng.upto(static_cast<int>(vars.size())))]);
      }
    }
  };
  MetatermPtr m = go(cfg.max_depth);
  // Close any leftover free variables under extra lambdas.
  FreeNames fn = free_names(m);
  for (const auto& x : fn.term_vars) m = m_lam(x, close_term(m, x));
  return m;
}

MetatermPtr gen_star_convergent(const GenConfig& cfg) {
  Rng rng(cfg.seed);
  KindCtx ctx;
  {
    GenConfig c = cfg;
    TermGen tg{Rng(cfg.seed ^ 0x9e3779b97f4a7c15ull), cfg.level, {}, {}, 0};
    tg.ctx = base_ctx(tg.rng, c);
    ctx = tg.ctx;
  }
  int next = 0;
  std::function<MetatermPtr(int)> go = [&](int depth) -> MetatermPtr {
    if (depth <= 0) return m_star();
    switch (rng.upto(7)) {
      case 0: return m_star();
      case 1: return m_guard(go(depth - 1), go(depth - 1));
      case 2: {
        TypePtr a = random_prop(rng, ctx, cfg.level, std::min(depth, 2));
        return m_verif(a, m_gen(a));  // correctness: reaches star
      }
      case 3: {
        // dead-argument beta redex
        std::string x = "z" + std::to_string(next++);
        MetatermPtr body = go(depth - 1);
        GenConfig sub = cfg;
        sub.seed = rng.e();
        sub.max_depth = std::min(depth - 1, 2);
        MetatermPtr arg = gen_pure_closed(sub);
        return m_app(m_lam(x, close_term(body, x)), arg);
      }
      case 4: {
        // live beta redex: (\x. seq(x, ...)) star-reaching
        std::string x = "z" + std::to_string(next++);
        MetatermPtr body = m_guard(m_var(x), go(depth - 1));
        return m_app(m_lam(x, close_term(body, x)), go(depth - 1));
      }
      case 5: {
        std::string g = "n" + std::to_string(next++);
        return m_fresh(g, kind_prop(), close_eig_in_term(go(depth - 1), g));
      }
      default: {
        // a verifier acting on a realizer of an implication
        TypePtr a = random_prop(rng, ctx, cfg.level, 1);
        return m_verif(t_arrow(a, a), m_lam("x", m_bvar(0)));
      }
    }
  };
  return go(cfg.max_depth);
}

TypePtr gen_closed_type(const GenConfig& cfg, KindCtx& ctx_out) {
  Rng rng(cfg.seed);
  ctx_out = base_ctx(rng, cfg);
  return random_prop(rng, ctx_out, cfg.level, cfg.max_depth);
}

MetatermPtr shrink_metaterm(const MetatermPtr& m,
                            const std::function<bool(const MetatermPtr&)>& still_failing) {
  // Candidate replacements at every position, largest first.
  struct Walk {
    std::vector<Path> positions;
    void collect(const MetatermPtr& t, Path& cur) {
      positions.push_back(cur);
      auto child = [&](PathStep s, const MetatermPtr& sub) {
        cur.push_back(s);
        collect(sub, cur);
        cur.pop_back();
      };
      switch (t->tag) {
        case Metaterm::Tag::App:
          child(PathStep::Fun, t->fun);
          child(PathStep::Arg, t->arg);
          break;
        case Metaterm::Tag::Guard:
          child(PathStep::Cond, t->fun);
          child(PathStep::Next, t->arg);
          break;
        case Metaterm::Tag::Verif: child(PathStep::Arg, t->sub); break;
        case Metaterm::Tag::TyApp: child(PathStep::Fun, t->sub); break;
        case Metaterm::Tag::Lam:
        case Metaterm::Tag::TyLam:
        case Metaterm::Tag::Fresh: child(PathStep::Body, t->body); break;
        default: break;
      }
    }
  };
  auto replace_at = [](const MetatermPtr& t, const Path& p, const MetatermPtr& repl) {
    std::function<MetatermPtr(const MetatermPtr&, size_t)> go =
        [&](const MetatermPtr& cur, size_t i) -> MetatermPtr {
      if (i == p.size()) return repl;
      switch (p[i]) {
        case PathStep::Fun:
          if (cur->tag == Metaterm::Tag::App) return m_app(go(cur->fun, i + 1), cur->arg);
          return m_tyapp(go(cur->sub, i + 1), cur->ty);
        case PathStep::Arg:
          if (cur->tag == Metaterm::Tag::App) return m_app(cur->fun, go(cur->arg, i + 1));
          return m_verif(cur->ty, go(cur->sub, i + 1));
        case PathStep::Cond: return m_guard(go(cur->fun, i + 1), cur->arg);
        case PathStep::Next: return m_guard(cur->fun, go(cur->arg, i + 1));
        case PathStep::Body:
          if (cur->tag == Metaterm::Tag::Lam) return m_lam(cur->hint, go(cur->body, i + 1));
          if (cur->tag == Metaterm::Tag::TyLam)
            return m_tylam(cur->hint, cur->kind, go(cur->body, i + 1));
          return m_fresh(cur->hint, cur->kind, go(cur->body, i + 1));
      }
      return cur;
    };
    return go(t, 0);
  };

  MetatermPtr cur = m;
  bool progress = true;
  while (progress) {
    progress = false;
    Walk w;
    Path p;
    w.collect(cur, p);
    for (const auto& pos : w.positions) {
      if (pos.empty()) continue;
      MetatermPtr smaller = replace_at(cur, pos, m_star());
      if (!term_eq(smaller, cur) && still_failing(smaller)) {
        cur = smaller;
        progress = true;
        break;
      }
    }
  }
  return cur;
}

}  // namespace rlz
