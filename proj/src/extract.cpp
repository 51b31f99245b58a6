#include "rlz/extract.hpp"

#include "rlz/printer.hpp"
#include "rlz/reduction.hpp"

namespace rlz {

std::optional<MatchResult> match_inputs(Level lv, const TypePtr& a, const InputSeq& inputs) {
  MatchResult out;
  TypePtr cur = canonicalize_type(lv, a);
  for (const auto& input : inputs) {
    if (std::holds_alternative<TermInput>(input)) {
      if (cur->tag != Type::Tag::Arrow) return std::nullopt;
      out.arg_types.push_back(cur->a);
      cur = cur->b;
    } else {
      if (cur->tag != Type::Tag::ForAll) return std::nullopt;
      const TypePtr& b = std::get<TypeInput>(input).type;
      out.arg_types.push_back(b);
      cur = canonicalize_type(lv, open_tvar(cur->body, b));
    }
  }
  out.residual = cur;
  return out;
}

std::pair<MetatermPtr, InputSeq> decompose_spine(const MetatermPtr& m) {
  InputSeq rev;
  MetatermPtr cur = m;
  for (;;) {
    if (cur->tag == Metaterm::Tag::App) {
      rev.push_back(TermInput{cur->arg});
      cur = cur->fun;
    } else if (cur->tag == Metaterm::Tag::TyApp) {
      rev.push_back(TypeInput{cur->ty});
      cur = cur->sub;
    } else {
      break;
    }
  }
  std::reverse(rev.begin(), rev.end());
  return {cur, std::move(rev)};
}

namespace {

bool has_beta_redex(const MetatermPtr& m) {
  switch (m->tag) {
    case Metaterm::Tag::App:
      if (m->fun->tag == Metaterm::Tag::Lam) return true;
      return has_beta_redex(m->fun) || has_beta_redex(m->arg);
    case Metaterm::Tag::TyApp:
      if (m->sub->tag == Metaterm::Tag::TyLam) return true;
      return has_beta_redex(m->sub);
    case Metaterm::Tag::Lam:
    case Metaterm::Tag::TyLam: return has_beta_redex(m->body);
    default: return false;
  }
}

}  // namespace

bool is_normal_form(Level lv, const MetatermPtr& m) {
  if (!is_pure(m)) return false;
  if (!level_ok(lv, m)) return false;
  return !has_beta_redex(m);
}

MetatermPtr beta_normalize(Level lv, const KindCtx& ctx, const MetatermPtr& m, uint64_t fuel) {
  if (!is_pure(m)) throw NotPure("beta_normalize requires a pure metaterm: " + print(m));
  // On pure terms the engine's rule table collapses to rules 1 and 2, so
  // leftmost-outermost reduction is exactly normal-order beta.
  ReduceSession s;
  s.level = lv;
  s.ctx = ctx;
  s.record_steps = false;
  Trace t = reduce(s, m, Strategy::LeftmostOutermost, fuel);
  if (t.outcome == Outcome::FuelExhausted)
    throw ExtractionFuelExhausted("no beta-normal form within fuel");
  return t.final_term;
}

// ---------------------------------------------------------------------------
// Proof size

namespace {

int size_rec(Level lv, const KindCtx& ctx, const TypeEnv& env, const MetatermPtr& nf,
             const TypePtr& a) {
  switch (nf->tag) {
    case Metaterm::Tag::Lam: {
      TypePtr exposed = canonicalize_type(lv, a);
      if (exposed->tag != Type::Tag::Arrow) return 0;
      std::set<std::string> avoid;
      for (const auto& [x, t] : env.entries()) {
        (void)t;
        avoid.insert(x);
      }
      auto fn = free_names(nf->body).term_vars;
      avoid.insert(fn.begin(), fn.end());
      std::string x = nf->hint.empty() ? "x" : nf->hint;
      while (avoid.count(x)) x += '\'';
      return size_rec(lv, ctx, env.extended(x, exposed->a), open_term(nf->body, m_var(x)),
                      exposed->b);
    }
    case Metaterm::Tag::TyLam: {
      TypePtr exposed = canonicalize_type(lv, a);
      if (exposed->tag != Type::Tag::ForAll) return 0;
      if (lv == Level::FOmega && !kind_eq(nf->kind, exposed->kind)) return 0;
      std::set<std::string> avoid;
      for (const auto& [x, t] : env.entries()) {
        (void)x;
        auto ft = free_names(t).type_vars;
        avoid.insert(ft.begin(), ft.end());
      }
      auto fb = free_names(nf->body).type_vars;
      avoid.insert(fb.begin(), fb.end());
      auto fa = free_names(exposed->body).type_vars;
      avoid.insert(fa.begin(), fa.end());
      std::string b = nf->hint.empty() ? "a" : nf->hint;
      while (avoid.count(b)) b += '\'';
      return size_rec(lv, ctx, env, open_tvar_in_term(nf->body, t_var(b)),
                      open_tvar(exposed->body, t_var(b)));
    }
    default: {
      auto [head, inputs] = decompose_spine(nf);
      if (head->tag != Metaterm::Tag::Var) return 0;  // pseudo-redex heads count 0
      auto declared = env.lookup(head->name);
      if (!declared) return 0;
      auto m = match_inputs(lv, *declared, inputs);
      if (!m) return 0;
      int total = std::min(type_size(canonicalize_type(lv, a)),
                           type_size(canonicalize_type(lv, m->residual)));
      for (size_t i = 0; i < inputs.size(); i++)
        if (const auto* ti = std::get_if<TermInput>(&inputs[i]))
          total += size_rec(lv, ctx, env, ti->term, m->arg_types[i]);
      return total;
    }
  }
}

}  // namespace

int proof_size(Level lv, const KindCtx& ctx, const TypeEnv& env, const MetatermPtr& nf,
               const TypePtr& a) {
  if (!is_pure(nf)) throw NotPure("proof size is defined on pure normal terms");
  if (!is_normal_form(lv, nf)) throw NotNormal("proof size is defined on normal terms");
  return size_rec(lv, ctx, env, nf, a);
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

using TD = TypingDerivation;
using TDPtr = TypingDerivationPtr;

TDPtr mk(TD d) { return std::make_shared<TD>(std::move(d)); }

// Remove an unused variable from every environment in the tree.
TDPtr strengthen(const TDPtr& d, const std::string& x) {
  TD node = *d;
  node.env = node.env.without(x);
  node.premises.clear();
  for (const auto& p : d->premises) node.premises.push_back(strengthen(p, x));
  return mk(std::move(node));
}

// Remove an eigenvariable binding from every kind context in the tree (the
// eigenvariable must not occur in the tree).
TDPtr drop_ctx_eig(const TDPtr& d, const std::string& g) {
  TD node = *d;
  KindCtx ctx;
  for (const auto& [n, k] : node.ctx.tvars()) ctx = ctx.with_tvar(n, k);
  for (const auto& [n, k] : node.ctx.eigs())
    if (n != g) ctx = ctx.with_eig(n, k);
  node.ctx = ctx;
  node.premises.clear();
  for (const auto& p : d->premises) node.premises.push_back(drop_ctx_eig(p, g));
  return mk(std::move(node));
}

// Rename an eigenvariable to a type variable throughout the tree, rebinding
// it in the kind contexts.
TDPtr eig_to_tvar(const TDPtr& d, const std::string& g, const std::string& b, const KindPtr& k) {
  TypeSubst s{{g, t_var(b)}};
  TD node = *d;
  KindCtx ctx = KindCtx().with_tvar(b, k);
  for (const auto& [n, kk] : node.ctx.tvars()) ctx = ctx.with_tvar(n, kk);
  for (const auto& [n, kk] : node.ctx.eigs())
    if (n != g) ctx = ctx.with_eig(n, kk);
  node.ctx = ctx;
  TypeEnv env;
  for (const auto& [x, t] : node.env.entries()) env = env.extended(x, subst_eig(t, s));
  node.env = env;
  node.term = subst_eig_in_term(node.term, s);
  node.type = subst_eig(node.type, s);
  if (node.elim_arg) node.elim_arg = subst_eig(node.elim_arg, s);
  node.premises.clear();
  for (const auto& p : d->premises) node.premises.push_back(eig_to_tvar(p, g, b, k));
  return mk(std::move(node));
}

struct Extractor {
  Level lv;
  uint64_t budget;
  NameSupply supply;

  void spend(uint64_t steps) {
    if (steps >= budget) throw ExtractionFuelExhausted("extraction fuel exhausted");
    budget -= steps;
  }

  TypePtr expose(const TypePtr& a) { return canonicalize_type(lv, a); }

  TDPtr conv_wrap(const KindCtx& ctx, const TypeEnv& env, TDPtr inner, const TypePtr& target) {
    if (type_eq(inner->type, target)) return inner;
    if (lv != Level::FOmega)
      throw InternalContradiction("assembled type " + print(inner->type) +
                                  " differs from the expected " + print(target));
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

  void subverify(const KindCtx& ctx, const TypeEnv& env, const TypePtr& a, const MetatermPtr& n) {
    VerifyOptions opts;
    opts.fuel = budget;
    opts.record_steps = false;
    opts.tvars = FreeTvarPolicy::Reject;
    Verdict v = realizes(lv, ctx, env, a, n, opts);
    spend(v.trace.step_count);
    if (v.kind == Verdict::Kind::FuelExhausted)
      throw ExtractionFuelExhausted("sub-verification ran out of fuel");
    if (!v.realized())
      throw InternalContradiction("spine argument " + print(n) +
                                  " fails verification against " + print(a) +
                                  ", which the completeness argument rules out");
  }

  struct Piece {
    TDPtr derivation;
    MetatermPtr eta_long;
  };

  std::string fresh_var(const TypeEnv& env, const MetatermPtr& nf) {
    std::set<std::string> avoid = free_names(nf).term_vars;
    for (const auto& [x, t] : env.entries()) {
      (void)t;
      avoid.insert(x);
    }
    return supply.fresh_term(avoid);
  }

  std::string fresh_eig(const KindCtx& ctx, const MetatermPtr& nf, const TypePtr& a) {
    std::set<std::string> avoid = free_names(nf).eig_vars;
    auto fa = free_names(a).eig_vars;
    avoid.insert(fa.begin(), fa.end());
    for (const auto& [n, k] : ctx.eigs()) {
      (void)k;
      avoid.insert(n);
    }
    return supply.fresh_eig(avoid);
  }

  std::string fresh_tvar(const KindCtx& ctx, const TypeEnv& env, const std::string& hint) {
    std::set<std::string> avoid;
    for (const auto& [n, k] : ctx.tvars()) {
      (void)k;
      avoid.insert(n);
    }
    for (const auto& [x, t] : env.entries()) {
      (void)x;
      auto ft = free_names(t).type_vars;
      avoid.insert(ft.begin(), ft.end());
    }
    std::string b = hint.empty() ? "a" : hint;
    while (avoid.count(b)) b += '\'';
    return b;
  }

  Piece go(const KindCtx& ctx, const TypeEnv& env, const TypePtr& a_raw, const MetatermPtr& nf) {
    TypePtr a = expose(a_raw);
    switch (a->tag) {
      case Type::Tag::Arrow: {
        if (nf->tag == Metaterm::Tag::Lam) {
          std::string x = fresh_var(env, nf);
          Piece body = go(ctx, env.extended(x, a->a), a->b, open_term(nf->body, m_var(x)));
          TD node;
          node.rule = TD::Rule::AbsIntro;
          node.level = lv;
          node.ctx = ctx;
          node.env = env;
          node.term = nf;
          node.type = t_arrow(a->a, body.derivation->type);
          node.binder_name = x;
          node.premises = {body.derivation};
          return {conv_wrap(ctx, env, mk(std::move(node)), a),
                  m_lam(x, close_term(body.eta_long, x))};
        }
        if (nf->tag == Metaterm::Tag::TyLam)
          throw InternalContradiction(
              "type abstraction against an arrow cannot verify, yet the input was realized");
        // Neutral: peel one argument, recurse, then strip the final
        // elimination and strengthen the fresh variable away.
        std::string x = fresh_var(env, nf);
        Piece inner = go(ctx, env.extended(x, a->a), a->b, m_app(nf, m_var(x)));
        TDPtr d = inner.derivation;
        while (d->rule == TD::Rule::Conv) d = d->premises[0];
        if (d->rule != TD::Rule::AppElim || d->premises[1]->term->tag != Metaterm::Tag::Var ||
            d->premises[1]->term->name != x)
          throw InternalContradiction("peeled derivation does not end with the fresh argument");
        TDPtr head = strengthen(d->premises[0], x);
        return {conv_wrap(ctx, env, head, a), m_lam(x, close_term(inner.eta_long, x))};
      }
      case Type::Tag::ForAll: {
        if (nf->tag == Metaterm::Tag::TyLam) {
          if (lv == Level::FOmega && !kind_eq(nf->kind, a->kind))
            throw InternalContradiction("type abstraction kind mismatch under a realized input");
          std::string g = fresh_eig(ctx, nf, a);
          Piece body = go(ctx.with_eig(g, a->kind), env, open_tvar(a->body, t_eig(g)),
                          open_tvar_in_term(nf->body, t_eig(g)));
          // Rename the scratch eigenvariable to a type variable and close.
          std::string b = fresh_tvar(ctx, env, nf->hint);
          TDPtr renamed = eig_to_tvar(body.derivation, g, b, a->kind);
          TD node;
          node.rule = TD::Rule::AllIntro;
          node.level = lv;
          node.ctx = ctx;
          node.env = env;
          node.term = nf;
          node.type = a;
          node.binder_name = b;
          node.binder_kind = a->kind;
          node.premises = {renamed};
          MetatermPtr eta = subst_eig_in_term(body.eta_long, {{g, t_var(b)}});
          return {mk(std::move(node)), m_tylam(b, a->kind, close_tvar_in_term(eta, b))};
        }
        if (nf->tag == Metaterm::Tag::Lam)
          throw InternalContradiction(
              "term abstraction against a quantifier cannot verify, yet the input was realized");
        std::string g = fresh_eig(ctx, nf, a);
        Piece inner = go(ctx.with_eig(g, a->kind), env, open_tvar(a->body, t_eig(g)),
                         m_tyapp(nf, t_eig(g)));
        TDPtr d = inner.derivation;
        while (d->rule == TD::Rule::Conv) d = d->premises[0];
        if (d->rule != TD::Rule::AllElim || d->elim_arg->tag != Type::Tag::Eig ||
            d->elim_arg->name != g)
          throw InternalContradiction("peeled derivation does not end with the fresh type");
        TDPtr head = drop_ctx_eig(d->premises[0], g);
        std::string b = fresh_tvar(ctx, env, a->hint);
        MetatermPtr eta = subst_eig_in_term(inner.eta_long, {{g, t_var(b)}});
        return {conv_wrap(ctx, env, head, a), m_tylam(b, a->kind, close_tvar_in_term(eta, b))};
      }
      default: {
        // Atomic residual: the normal form must be a variable-headed spine.
        if (nf->tag == Metaterm::Tag::Lam || nf->tag == Metaterm::Tag::TyLam)
          throw InternalContradiction(
              "abstraction against an atomic type cannot verify, yet the input was realized");
        auto [head, inputs] = decompose_spine(nf);
        if (head->tag != Metaterm::Tag::Var)
          throw InternalContradiction("realizer normal form has a pseudo-redex head");
        auto declared = env.lookup(head->name);
        if (!declared)
          throw InternalContradiction("realizer head variable is not bound: " + head->name);
        auto match = match_inputs(lv, *declared, inputs);
        if (!match)
          throw InternalContradiction("spine inputs do not match the head's type (" +
                                      print(*declared) + ")");
        if (!equiv_type(lv, match->residual, a))
          throw InternalContradiction("matched residual " + print(match->residual) +
                                      " differs from the verified type " + print(a));

        TD var;
        var.rule = TD::Rule::Var;
        var.level = lv;
        var.ctx = ctx;
        var.env = env;
        var.term = head;
        var.type = *declared;
        TDPtr d = mk(std::move(var));
        for (size_t i = 0; i < inputs.size(); i++) {
          TypePtr cur = expose(d->type);
          d = conv_wrap(ctx, env, d, cur);
          if (const auto* ti = std::get_if<TermInput>(&inputs[i])) {
            if (cur->tag != Type::Tag::Arrow)
              throw InternalContradiction("assembly expected an arrow");
            subverify(ctx, env, cur->a, ti->term);
            Piece arg = go(ctx, env, cur->a, ti->term);
            TD node;
            node.rule = TD::Rule::AppElim;
            node.level = lv;
            node.ctx = ctx;
            node.env = env;
            node.term = m_app(d->term, ti->term);
            node.type = cur->b;
            node.premises = {d, arg.derivation};
            d = mk(std::move(node));
          } else {
            const TypePtr& b = std::get<TypeInput>(inputs[i]).type;
            if (cur->tag != Type::Tag::ForAll)
              throw InternalContradiction("assembly expected a quantifier");
            TD node;
            node.rule = TD::Rule::AllElim;
            node.level = lv;
            node.ctx = ctx;
            node.env = env;
            node.term = m_tyapp(d->term, b);
            node.type = open_tvar(cur->body, b);
            node.elim_arg = b;
            node.binder_kind = cur->kind;
            node.premises = {d};
            d = mk(std::move(node));
          }
        }
        return {conv_wrap(ctx, env, d, a), nf};
      }
    }
  }
};

}  // namespace

ExtractResult extract(Level lv, const KindCtx& ctx, const TypeEnv& env, const TypePtr& a,
                      const MetatermPtr& m, uint64_t fuel) {
  MetatermPtr subject = erase_annotations(m);
  if (!is_pure(subject)) throw NotPure("extraction requires a pure (good) metaterm");

  Extractor ex{lv, fuel, NameSupply{}};

  VerifyOptions opts;
  opts.fuel = ex.budget;
  opts.record_steps = false;
  Verdict v = realizes(lv, ctx, env, a, subject, opts);
  ex.spend(v.trace.step_count);
  if (v.kind == Verdict::Kind::FuelExhausted)
    throw ExtractionFuelExhausted("verification of the input ran out of fuel");
  if (!v.realized())
    throw NotRealizer("the input does not realize " + print(a) + " (" + verdict_name(v.kind) +
                      " at " + print(v.final_term) + ")");

  MetatermPtr nf = beta_normalize(lv, ctx, subject, ex.budget);

  Extractor::Piece piece = ex.go(ctx, env, canonicalize_type(lv, a), nf);
  ExtractResult out;
  out.normal_form = nf;
  out.derivation = piece.derivation;
  out.eta_long = piece.eta_long;
  out.size = proof_size(lv, ctx, env, nf, canonicalize_type(lv, a));
  out.fuel_used = fuel - ex.budget;
  return out;
}

}  // namespace rlz
