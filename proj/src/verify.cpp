#include "rlz/verify.hpp"

#include "rlz/printer.hpp"
#include "rlz/typecheck.hpp"

namespace rlz {

std::string verdict_name(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Realized: return "realized";
    case Verdict::Kind::Stuck: return "stuck";
    case Verdict::Kind::FuelExhausted: return "fuel";
  }
  return "?";
}

TermSubst gen_subst(Level lv, const TypeEnv& env) {
  TermSubst s;
  for (const auto& [x, a] : env.entries())
    s[x] = lv == Level::ST ? expand_st_gen(a) : m_gen(a);
  return s;
}

namespace {

Verdict classify(Trace&& t) {
  Verdict v;
  v.final_term = t.final_term;
  switch (t.outcome) {
    case Outcome::StarReached: v.kind = Verdict::Kind::Realized; break;
    case Outcome::Normal: v.kind = Verdict::Kind::Stuck; break;
    case Outcome::FuelExhausted: v.kind = Verdict::Kind::FuelExhausted; break;
  }
  v.trace = std::move(t);
  return v;
}

struct ClosedInputs {
  KindCtx ctx;
  TypeEnv env;
  TypePtr type;
  MetatermPtr term;
};

ClosedInputs close_tvars(Level, const KindCtx& ctx, const TypeEnv& env, const TypePtr& a,
                         const MetatermPtr& m, FreeTvarPolicy policy) {
  FreeNames fn = free_names(a);
  FreeNames fm = free_names(m);
  std::set<std::string> tvars = fn.type_vars;
  tvars.insert(fm.type_vars.begin(), fm.type_vars.end());
  for (const auto& [x, t] : env.entries()) {
    (void)x;
    auto ft = free_names(t).type_vars;
    tvars.insert(ft.begin(), ft.end());
  }
  if (tvars.empty() || policy == FreeTvarPolicy::Keep) return {ctx, env, a, m};
  if (policy == FreeTvarPolicy::Reject)
    throw PreconditionViolated(
        "inputs contain free type variables (" + *tvars.begin() +
        ", ...); substitute them by fresh eigenvariables or enable auto-closing");

  // AutoClose: substitute each free type variable by a fresh eigenvariable of
  // the same kind.
  std::set<std::string> avoid = fn.eig_vars;
  avoid.insert(fm.eig_vars.begin(), fm.eig_vars.end());
  for (const auto& [n, k] : ctx.eigs()) {
    (void)k;
    avoid.insert(n);
  }
  NameSupply supply;
  KindCtx out_ctx = ctx;
  TypeSubst subst;
  for (const auto& tv : tvars) {
    KindPtr k = ctx.tvar_kind(tv).value_or(kind_prop());
    std::string g = supply.fresh_eig(avoid);
    avoid.insert(g);
    out_ctx = out_ctx.with_eig(g, k);
    subst[tv] = t_eig(g);
  }
  TypeEnv out_env;
  for (const auto& [x, t] : env.entries()) out_env = out_env.extended(x, subst_tvar(t, subst));
  return {out_ctx, out_env, subst_tvar(a, subst), subst_tvar_in_term(m, subst)};
}

}  // namespace

Verdict realizes(Level lv, const KindCtx& ctx, const TypeEnv& env, const TypePtr& a,
                 const MetatermPtr& m, const VerifyOptions& opts) {
  require_level_ok(lv, a);
  require_level_ok(lv, m);
  ClosedInputs in = close_tvars(lv, ctx, env, a, m, opts.tvars);
  if (lv == Level::FOmega) {
    if (!is_prop(kind_of(in.ctx, in.type)))
      throw KindError("verified type is not a proposition: " + print(in.type));
    if (!env_well_formed(lv, in.ctx, in.env))
      throw KindError("environment is not well-formed");
  }
  MetatermPtr closed = subst_term(erase_annotations(in.term), gen_subst(lv, in.env));
  MetatermPtr subject =
      lv == Level::ST ? expand_st_verif(in.type, expand_st(closed)) : m_verif(in.type, closed);
  subject = canonicalize(lv, subject);
  ReduceSession session;
  session.level = lv;
  session.ctx = in.ctx;
  session.record_steps = opts.record_steps;
  session.size_limit = opts.size_limit;
  return classify(reduce(session, subject, Strategy::WeakHead, opts.fuel));
}

Verdict correctness_check(Level lv, const KindCtx& ctx, const TypePtr& a,
                          const VerifyOptions& opts) {
  VerifyOptions o = opts;
  o.tvars = FreeTvarPolicy::Keep;  // a free type variable yields an honest Stuck
  return realizes(lv, ctx, TypeEnv(), a, m_gen(a), o);
}

UniversalityResult universality_check(Level lv, const TypeEnv& env, const TermSubst& sigma,
                                      const MetatermPtr& raw, const VerifyOptions& opts) {
  if (lv != Level::ST) throw LevelError("the universality check is stated at level ST");
  MetatermPtr m = erase_annotations(raw);
  // Compatibility: every x:A in env is mapped by sigma to a realizer of A.
  for (const auto& [x, a] : env.entries()) {
    auto it = sigma.find(x);
    if (it == sigma.end())
      throw PreconditionViolated("sigma does not cover environment variable " + x);
    Verdict v = realizes(lv, KindCtx(), TypeEnv(), a, it->second, opts);
    if (!v.realized())
      throw PreconditionViolated("sigma(" + x + ") is not a realizer of " + print(a) + " (" +
                                 verdict_name(v.kind) + ")");
  }
  // m{gen_subst(env)} must reach star.
  MetatermPtr generic = expand_st(subst_term(m, gen_subst(lv, env)));
  ReduceSession s1;
  s1.level = lv;
  s1.record_steps = false;
  Trace t1 = reduce(s1, generic, Strategy::WeakHead, opts.fuel);
  if (t1.outcome != Outcome::StarReached)
    throw PreconditionViolated("m{gen_subst(env)} does not reach star (" +
                               outcome_name(t1.outcome) + ")");

  MetatermPtr instantiated = expand_st(subst_term(m, sigma));
  ReduceSession s2;
  s2.level = lv;
  s2.record_steps = false;
  Trace t2 = reduce(s2, instantiated, Strategy::WeakHead, opts.fuel);
  UniversalityResult out;
  out.fuel_used = t2.step_count;
  switch (t2.outcome) {
    case Outcome::StarReached: out.kind = UniversalityResult::Kind::Confirmed; break;
    case Outcome::Normal:
      out.kind = UniversalityResult::Kind::CounterexampleCandidate;
      out.stuck_term = t2.final_term;
      break;
    case Outcome::FuelExhausted: out.kind = UniversalityResult::Kind::Inconclusive; break;
  }
  return out;
}

}  // namespace rlz
