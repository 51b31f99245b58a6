#include "rlz/suite.hpp"

#include "rlz/extract.hpp"
#include "rlz/intersect.hpp"
#include "rlz/printer.hpp"
#include "rlz/simultaneous.hpp"
#include "rlz/typecheck.hpp"
#include "rlz/verify.hpp"

namespace rlz {

namespace {

uint64_t case_seed(const GenConfig& cfg, size_t i) {
  return cfg.seed + 0x100000001b3ull * (i + 1);
}

struct Failure {
  std::string detail;
};

using CaseFn = std::function<std::optional<Failure>(const GenConfig&)>;
// Returns nullopt on pass; Failure on fail; throws Inconclusive for skips.
struct Inconclusive : std::runtime_error {
  using std::runtime_error::runtime_error;
};

SuiteReport drive(const std::string& name, const GenConfig& cfg, size_t cases, const CaseFn& fn) {
  SuiteReport report;
  report.name = name;
  report.cases = cases;
  for (size_t i = 0; i < cases; i++) {
    GenConfig c = cfg;
    c.seed = case_seed(cfg, i);
    try {
      if (auto failure = fn(c)) {
        report.failed++;
        if (report.failed == 1) {
          report.first_fail_seed = c.seed;
          report.detail = failure->detail;
        }
      } else {
        report.passed++;
      }
    } catch (const Inconclusive&) {
      report.inconclusive++;
    }
  }
  return report;
}

ReduceSession mk_session(Level lv, const KindCtx& ctx, bool record = true) {
  ReduceSession s;
  s.level = lv;
  s.ctx = ctx;
  s.record_steps = record;
  return s;
}

// ---------------------------------------------------------------------------

std::optional<Failure> determinism_case(const GenConfig& cfg) {
  GenConfig c = cfg;
  c.level = Level::ST;
  KindCtx ctx;
  MetatermPtr m = gen_metaterm(c, ctx);
  auto s = mk_session(Level::ST, ctx);
  auto redexes = enumerate_wh_redexes(s, m);
  if (redexes.size() <= 1) return std::nullopt;
  auto still = [&](const MetatermPtr& t) {
    auto ss = mk_session(Level::ST, ctx);
    return enumerate_wh_redexes(ss, t).size() > 1;
  };
  return Failure{print(shrink_metaterm(m, still)) + " has " + std::to_string(redexes.size()) +
                 " weak-head redexes"};
}

std::optional<Failure> subcommutativity_case(const GenConfig& cfg) {
  GenConfig c = cfg;
  c.level = Level::F;
  // Look for an instance with at least two weak-head redexes.
  KindCtx ctx;
  MetatermPtr m;
  std::vector<std::pair<Path, RuleTag>> redexes;
  bool found = false;
  for (uint64_t bump = 0; bump < 64 && !found; bump++) {
    GenConfig cc = c;
    cc.seed = c.seed + bump * 0x9e3779b9ull;
    m = gen_metaterm(cc, ctx);
    auto s = mk_session(Level::F, ctx);
    redexes = enumerate_wh_redexes(s, m);
    found = redexes.size() >= 2;
  }
  if (!found) throw Inconclusive("no instance with two weak-head redexes");

  auto s = mk_session(Level::F, ctx);
  std::vector<MetatermPtr> reducts;
  for (const auto& [pos, rule] : redexes) reducts.push_back(apply_at(s, m, pos, rule).after);
  // All pairs must join within reflexive-closure single steps.
  auto closure = [&](const MetatermPtr& t) {
    std::vector<MetatermPtr> out{t};
    auto ss = mk_session(Level::F, ctx);
    for (const auto& [pos, rule] : enumerate_wh_redexes(ss, t))
      out.push_back(apply_at(ss, t, pos, rule).after);
    return out;
  };
  for (size_t i = 0; i < reducts.size(); i++) {
    auto ci = closure(reducts[i]);
    for (size_t j = i + 1; j < reducts.size(); j++) {
      auto cj = closure(reducts[j]);
      bool joined = false;
      for (const auto& a : ci) {
        for (const auto& b : cj)
          if (term_eq(a, b)) {
            joined = true;
            break;
          }
        if (joined) break;
      }
      if (!joined)
        return Failure{"peaks from " + print(m) + " do not join: " + print(reducts[i]) +
                       " vs " + print(reducts[j])};
    }
  }
  return std::nullopt;
}

std::optional<Failure> diamond_case(const GenConfig& cfg) {
  GenConfig c = cfg;
  c.level = Level::F;
  KindCtx ctx;
  MetatermPtr m = gen_metaterm(c, ctx);
  MetatermPtr cdm = complete_development(Level::F, m);
  auto s = mk_session(Level::F, ctx);
  for (const auto& [pos, rule] : enumerate_redexes(s, m)) {
    Step step = apply_at(s, m, pos, rule);
    auto lifted = sto_lift_step(step);
    std::string why;
    if (!sto_validate(lifted, &why))
      return Failure{"lifted step does not validate: " + why};
    auto tri = sto_triangle(lifted);
    if (!sto_validate(tri, &why))
      return Failure{"triangle witness does not validate: " + why};
    if (!term_eq(tri->src, step.after) || !term_eq(tri->dst, cdm))
      return Failure{"triangle conclusion mismatch for " + print(m) + " at " +
                     path_to_string(pos)};
  }
  return std::nullopt;
}

std::optional<Failure> standardization_case(const GenConfig& cfg) {
  GenConfig c = cfg;
  c.level = Level::F;
  // Find an instance whose Random run reaches star within the fuel.
  for (uint64_t bump = 0; bump < 64; bump++) {
    GenConfig cc = c;
    cc.seed = c.seed + bump * 0x9e3779b9ull;
    MetatermPtr m = gen_star_convergent(cc);
    auto s1 = mk_session(Level::F, KindCtx(), false);
    Trace random = reduce(s1, m, Strategy::Random, cfg.fuel, cc.seed);
    if (random.outcome != Outcome::StarReached) continue;
    auto s2 = mk_session(Level::F, KindCtx(), false);
    Trace wh = reduce(s2, m, Strategy::WeakHead, 4 * std::max<uint64_t>(random.step_count, 1));
    if (wh.outcome != Outcome::StarReached)
      return Failure{"weak head does not standardize " + print(m) + " within 4x fuel (" +
                     outcome_name(wh.outcome) + ")"};
    return std::nullopt;
  }
  throw Inconclusive("no star-reaching random run found");
}

std::optional<Failure> soundness_case(const GenConfig& cfg) {
  TypedJudgment j = gen_typed_term(cfg);
  CheckResult chk = check(cfg.level, j.ctx, j.env, j.term, j.type);
  if (!chk.ok())
    return Failure{"generator contract: " + print(j.term) + " : " + print(j.type) +
                   " does not check (" + chk.fail->reason + ")"};
  VerifyOptions opts;
  opts.fuel = cfg.fuel;
  opts.record_steps = false;
  Verdict v = realizes(cfg.level, j.ctx, j.env, j.type, j.term, opts);
  if (!v.realized())
    return Failure{print(j.term) + " : " + print(j.type) + " -> " + verdict_name(v.kind) +
                   " at " + print(v.final_term)};
  return std::nullopt;
}

std::optional<Failure> consistency_case(const GenConfig& cfg) {
  GenConfig c = cfg;
  c.level = Level::ST;
  MetatermPtr m = gen_pure_closed(c);
  VerifyOptions opts;
  // A bounded run decides the property: reduction of a pure term cannot
  // create a generator, so Realized is impossible regardless of fuel, and
  // divergent instances (some with exponentially growing spines) would
  // otherwise churn through the whole budget.
  opts.fuel = std::min<uint64_t>(cfg.fuel, 2000);
  opts.size_limit = 20000;
  opts.record_steps = false;
  Verdict v = realizes(Level::ST, KindCtx(), TypeEnv(), t_eig("a"), m, opts);
  if (v.realized()) return Failure{"pure closed term realizes a bare eigenvariable: " + print(m)};
  return std::nullopt;
}

std::optional<Failure> universality_case(const GenConfig& cfg) {
  GenConfig c = cfg;
  c.level = Level::ST;
  TypedJudgment j = gen_typed_term(c);
  MetatermPtr m = m_verif(j.type, j.term);
  // Build a compatible substitution from realizer variants.
  std::mt19937_64 rng(c.seed ^ 0xabcdef);
  TermSubst sigma;
  for (const auto& [x, a] : j.env.entries()) {
    switch (rng() % 3) {
      case 0: sigma[x] = expand_st_gen(a); break;
      case 1: sigma[x] = m_guard(m_star(), expand_st_gen(a)); break;
      default: sigma[x] = m_app(m_lam("z", m_bvar(0)), expand_st_gen(a)); break;
    }
  }
  VerifyOptions opts;
  opts.fuel = cfg.fuel;
  opts.record_steps = false;
  UniversalityResult r = universality_check(Level::ST, j.env, sigma, m, opts);
  switch (r.kind) {
    case UniversalityResult::Kind::Confirmed: return std::nullopt;
    case UniversalityResult::Kind::Inconclusive: throw Inconclusive("fuel");
    case UniversalityResult::Kind::CounterexampleCandidate:
      return Failure{"universality counterexample candidate: " + print(m) + " stuck at " +
                     print(r.stuck_term)};
  }
  return std::nullopt;
}

std::optional<Failure> extraction_case(const GenConfig& cfg) {
  TypedJudgment j = gen_typed_term(cfg);
  ExtractResult r;
  try {
    r = extract(cfg.level, j.ctx, j.env, j.type, j.term, cfg.fuel);
  } catch (const ExtractionFuelExhausted&) {
    throw Inconclusive("fuel");
  } catch (const std::exception& e) {
    return Failure{"extraction failed on " + print(j.term) + " : " + print(j.type) + " (" +
                   e.what() + ")"};
  }
  std::string why;
  if (!validate(r.derivation, &why))
    return Failure{"extracted derivation does not validate: " + why};
  MetatermPtr nf = beta_normalize(cfg.level, j.ctx, erase_annotations(j.term), cfg.fuel);
  if (!equiv(cfg.level, r.derivation->term, nf))
    return Failure{"derivation subject is not the beta-normal form of the input"};
  if (!equiv_type(cfg.level, r.derivation->type, j.type))
    return Failure{"derivation type differs from the target"};
  return std::nullopt;
}

// One constructed instance of the weighted-substitution size identity.
std::optional<Failure> size_identity_instance(std::mt19937_64& rng) {
  int uses = static_cast<int>(rng() % 4);  // multiplicity of x
  // phi: x used `uses` times at type gen(#a), via guards over ver(#a, x).
  LinDerivPtr body = [&]() -> LinDerivPtr {
    LinDeriv st;
    st.rule = LinRule::LStarIntro;
    st.subject = m_star();
    st.type = lt_star();
    return std::make_shared<LinDeriv>(std::move(st));
  }();
  size_t expected_phi = 1;
  for (int i = 0; i < uses; i++) {
    LinDeriv var;
    var.rule = LinRule::Lvar;
    var.subject = m_var("x");
    var.type = lt_gen("a");
    var.env = LinEnv().with("x", {lt_gen("a")});
    auto var_d = std::make_shared<LinDeriv>(std::move(var));
    LinDeriv ver;
    ver.rule = LinRule::LVerEig;
    ver.subject = m_verif(t_eig("a"), m_var("x"));
    ver.type = lt_star();
    ver.env = var_d->env;
    ver.premises = {var_d};
    auto ver_d = std::make_shared<LinDeriv>(std::move(ver));
    LinDeriv guard;
    guard.rule = LinRule::LGuard;
    guard.subject = m_guard(ver_d->subject, body->subject);
    guard.type = body->type;
    guard.env = ver_d->env.sum(body->env);
    guard.premises = {ver_d, body};
    body = std::make_shared<LinDeriv>(std::move(guard));
    expected_phi += 3;
  }
  // psi: `uses` derivations of N : gen(#a) where N is either the plain
  // generator or a beta redex over it (one shape per instance, since every
  // Lmulti premise types the same subject).
  bool redex_shape = uses > 0 && (rng() % 2);
  std::vector<LinDerivPtr> psis;
  size_t psi_size = 0;
  MetatermPtr subject = redex_shape ? m_app(m_lam("y", m_bvar(0)), m_gen(t_eig("a")))
                                    : m_gen(t_eig("a"));
  for (int i = 0; i < uses; i++) {
    LinDeriv gen;
    gen.rule = LinRule::LGenEig;
    gen.subject = m_gen(t_eig("a"));
    gen.type = lt_gen("a");
    auto gen_d = std::make_shared<LinDeriv>(std::move(gen));
    if (redex_shape) {
      LinDeriv var;
      var.rule = LinRule::Lvar;
      var.subject = m_var("y");
      var.type = lt_gen("a");
      var.env = LinEnv().with("y", {lt_gen("a")});
      auto var_d = std::make_shared<LinDeriv>(std::move(var));
      LinDeriv lam;
      lam.rule = LinRule::Llam;
      lam.subject = m_lam("y", m_bvar(0));
      lam.type = lt_arrow({lt_gen("a")}, lt_gen("a"));
      lam.opened = "y";
      lam.premises = {var_d};
      auto lam_d = std::make_shared<LinDeriv>(std::move(lam));
      LinDeriv marg;
      marg.rule = LinRule::Lmulti;
      marg.is_multi = true;
      marg.subject = m_gen(t_eig("a"));
      marg.multi = {lt_gen("a")};
      marg.premises = {gen_d};
      auto marg_d = std::make_shared<LinDeriv>(std::move(marg));
      LinDeriv app;
      app.rule = LinRule::Lapp;
      app.subject = subject;
      app.type = lt_gen("a");
      app.premises = {lam_d, marg_d};
      psis.push_back(std::make_shared<LinDeriv>(std::move(app)));
      psi_size += 4;
    } else {
      psis.push_back(gen_d);
      psi_size += 1;
    }
  }
  LinDeriv multi;
  multi.rule = LinRule::Lmulti;
  multi.is_multi = true;
  multi.subject = subject;
  LinMulti types;
  LinEnv env;
  for (const auto& p : psis) {
    types.push_back(p->type);
    env = env.sum(p->env);
  }
  multi.multi = multi_sorted(types);
  multi.env = env;
  multi.premises = psis;
  auto psi = std::make_shared<LinDeriv>(std::move(multi));

  std::string why;
  if (!check_lderiv(body, &why)) return Failure{"constructed phi does not check: " + why};
  if (!check_lderiv(psi, &why)) return Failure{"constructed psi does not check: " + why};

  LinDerivPtr out = subst_lderiv(body, "x", psi);
  if (!check_lderiv(out, &why)) return Failure{"substituted derivation does not check: " + why};
  size_t got = lderiv_size_unchecked(out);
  size_t want = expected_phi - static_cast<size_t>(uses) + psi_size;
  if (got != want)
    return Failure{"size identity violated: got " + std::to_string(got) + ", want " +
                   std::to_string(want)};
  return std::nullopt;
}

std::optional<Failure> intersection_case(const GenConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  if (auto f = size_identity_instance(rng)) return f;

  GenConfig c = cfg;
  c.level = Level::F;
  for (uint64_t bump = 0; bump < 64; bump++) {
    GenConfig cc = c;
    cc.seed = c.seed + bump * 0x9e3779b9ull;
    MetatermPtr m = gen_star_convergent(cc);
    auto s1 = mk_session(Level::F, KindCtx());
    Trace random = reduce(s1, m, Strategy::Random, cfg.fuel, cc.seed);
    if (random.outcome != Outcome::StarReached) continue;
    LinDerivPtr d;
    try {
      d = derive_from_trace(random);
    } catch (const std::exception& e) {
      return Failure{"derive_from_trace failed on " + print(m) + ": " + e.what()};
    }
    std::string why;
    if (!check_lderiv(d, &why)) return Failure{"trace derivation does not check: " + why};

    auto s2 = mk_session(Level::F, KindCtx());
    Trace wh = reduce(s2, m, Strategy::WeakHead, cfg.fuel);
    if (wh.outcome != Outcome::StarReached)
      return Failure{"weak head run does not reach star for " + print(m)};
    size_t size = lderiv_size_unchecked(d);
    LinDerivPtr cur = d;
    for (const auto& step : wh.steps) {
      try {
        cur = wh_step_lderiv(cur, step);
      } catch (const std::exception& e) {
        return Failure{"weak head subject reduction failed: " + std::string(e.what())};
      }
      if (!check_lderiv(cur, &why))
        return Failure{"stepped derivation does not check: " + why};
      size_t next = lderiv_size_unchecked(cur);
      if (next >= size)
        return Failure{"derivation size did not decrease (" + std::to_string(size) + " -> " +
                       std::to_string(next) + ")"};
      size = next;
    }
    if (cur->rule != LinRule::LStarIntro)
      return Failure{"weak head replay did not terminate at the star axiom"};
    return std::nullopt;
  }
  throw Inconclusive("no star-reaching random run found");
}

}  // namespace

SuiteReport run_suite(const std::string& name, const GenConfig& cfg, size_t cases) {
  if (name == "determinism") return drive(name, cfg, cases, determinism_case);
  if (name == "subcommutativity") return drive(name, cfg, cases, subcommutativity_case);
  if (name == "diamond") return drive(name, cfg, cases, diamond_case);
  if (name == "standardization") return drive(name, cfg, cases, standardization_case);
  if (name == "soundness") return drive(name, cfg, cases, soundness_case);
  if (name == "consistency") return drive(name, cfg, cases, consistency_case);
  if (name == "universality") return drive(name, cfg, cases, universality_case);
  if (name == "extraction") return drive(name, cfg, cases, extraction_case);
  if (name == "intersection") return drive(name, cfg, cases, intersection_case);
  throw UnknownSuite("unknown suite: " + name);
}

}  // namespace rlz
