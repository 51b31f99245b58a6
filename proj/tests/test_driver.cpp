#include "doctest.h"
#include "rlz/corpus.hpp"
#include "rlz/extract.hpp"
#include "rlz/gen.hpp"
#include "rlz/json_io.hpp"
#include "rlz/parser.hpp"
#include "rlz/printer.hpp"
#include "rlz/suite.hpp"
#include "rlz/typecheck.hpp"
#include "rlz/verify.hpp"

using namespace rlz;

TEST_CASE("gen_typed_term is seed deterministic and always checks") {
  for (Level lv : {Level::ST, Level::F, Level::FOmega}) {
    for (uint64_t seed = 0; seed < 40; seed++) {
      GenConfig cfg;
      cfg.level = lv;
      cfg.seed = seed;
      cfg.max_depth = 3;
      TypedJudgment a = gen_typed_term(cfg);
      TypedJudgment b = gen_typed_term(cfg);
      CHECK(term_eq(a.term, b.term));
      CHECK(type_eq(a.type, b.type));
      CheckResult r = check(lv, a.ctx, a.env, a.term, a.type);
      CAPTURE(print(a.term));
      CAPTURE(print(a.type));
      REQUIRE_MESSAGE(r.ok(), (r.fail ? r.fail->reason : std::string()));
      CHECK(validate(r.derivation));
    }
  }
}

TEST_CASE("gen_typed_term at depth 0 yields a variable judgment") {
  GenConfig cfg;
  cfg.level = Level::ST;
  cfg.seed = 5;
  cfg.max_depth = 0;
  cfg.env_size = 1;
  TypedJudgment j = gen_typed_term(cfg);
  CHECK(j.term->tag == Metaterm::Tag::Var);
  auto ty = j.env.lookup(j.term->name);
  REQUIRE(ty.has_value());
  CHECK(type_eq(*ty, j.type));
}

TEST_CASE("gen_metaterm determinism, leaves, and well-kindedness") {
  GenConfig cfg;
  cfg.level = Level::ST;
  cfg.seed = 123;
  cfg.max_depth = 0;
  MetatermPtr leaf = gen_metaterm(cfg);
  bool small = leaf->tag == Metaterm::Tag::Star || leaf->tag == Metaterm::Tag::Var ||
               leaf->tag == Metaterm::Tag::Gen;
  CHECK(small);

  for (uint64_t seed = 0; seed < 50; seed++) {
    GenConfig c;
    c.level = Level::FOmega;
    c.seed = seed;
    c.max_depth = 4;
    KindCtx ctx1, ctx2;
    MetatermPtr a = gen_metaterm(c, ctx1);
    MetatermPtr b = gen_metaterm(c, ctx2);
    CHECK(term_eq(a, b));
    CHECK(well_kinded(ctx1, a));
  }
}

TEST_CASE("FOmega metaterms round-trip through the printer") {
  for (uint64_t seed = 0; seed < 60; seed++) {
    GenConfig c;
    c.level = Level::FOmega;
    c.seed = 7000 + seed;
    c.max_depth = 4;
    MetatermPtr m = gen_metaterm(c);
    std::string printed = print(m);
    CAPTURE(printed);
    MetatermPtr back = parse_term(printed, Level::FOmega);
    CHECK(equiv(Level::FOmega, back, m));
  }
}

TEST_CASE("FOmega reduction preserves well-kindedness") {
  for (uint64_t seed = 0; seed < 80; seed++) {
    GenConfig c;
    c.level = Level::FOmega;
    c.seed = 1000 + seed;
    c.max_depth = 4;
    KindCtx ctx;
    MetatermPtr m = gen_metaterm(c, ctx);
    REQUIRE(well_kinded(ctx, m));
    ReduceSession s;
    s.level = Level::FOmega;
    s.ctx = ctx;
    for (const auto& [pos, rule] : enumerate_redexes(s, m)) {
      Step step = apply_at(s, m, pos, rule);
      CAPTURE(print(m));
      CAPTURE(rule_tag_name(rule));
      CHECK(well_kinded(ctx, step.after));
    }
  }
}

TEST_CASE("recorded steps revalidate on random traces") {
  for (uint64_t seed = 0; seed < 30; seed++) {
    GenConfig c;
    c.level = Level::F;
    c.seed = 2000 + seed;
    c.max_depth = 4;
    KindCtx ctx;
    MetatermPtr m = gen_metaterm(c, ctx);
    ReduceSession s;
    s.level = Level::F;
    s.ctx = ctx;
    Trace t = reduce(s, m, Strategy::Random, 60, seed);
    ReduceSession s2;
    s2.level = Level::F;
    s2.ctx = ctx;
    for (const auto& step : t.steps) CHECK(revalidate_step(s2, step));
  }
}

TEST_CASE("proof size of application to variables (the application lemma)") {
  // for normal nf : A -> B and fresh x, size(nf : A->B) >= size(bnf(nf x) : B)
  int checked = 0;
  for (uint64_t seed = 0; checked < 60 && seed < 300; seed++) {
    GenConfig c;
    c.level = Level::ST;
    c.seed = 3000 + seed;
    c.max_depth = 3;
    TypedJudgment j = gen_typed_term(c);
    TypePtr a = canonicalize_type(c.level, j.type);
    if (a->tag != Type::Tag::Arrow) continue;
    MetatermPtr nf;
    try {
      nf = beta_normalize(c.level, j.ctx, erase_annotations(j.term), 10000);
    } catch (const ExtractionFuelExhausted&) {
      continue;
    }
    std::string x = "fresh_x";
    TypeEnv env2 = j.env.extended(x, a->a);
    MetatermPtr applied = beta_normalize(c.level, j.ctx, m_app(nf, m_var(x)), 10000);
    int whole = proof_size(c.level, j.ctx, j.env, nf, a);
    int inner = proof_size(c.level, j.ctx, env2, applied, a->b);
    CAPTURE(print(nf));
    CHECK(whole >= inner);
    checked++;
  }
  CHECK(checked > 0);
}

TEST_CASE("match_inputs is deterministic and length preserving on generated cases") {
  for (uint64_t seed = 0; seed < 60; seed++) {
    GenConfig c;
    c.level = Level::F;
    c.seed = 4000 + seed;
    c.max_depth = 3;
    KindCtx ctx;
    TypePtr a = gen_closed_type(c, ctx);
    // Build the maximal input sequence the type shape supports.
    InputSeq inputs;
    TypePtr cur = a;
    while (true) {
      if (cur->tag == Type::Tag::Arrow) {
        inputs.push_back(TermInput{m_star()});
        cur = cur->b;
      } else if (cur->tag == Type::Tag::ForAll) {
        inputs.push_back(TypeInput{t_eig("z")});
        cur = open_tvar(cur->body, t_eig("z"));
      } else {
        break;
      }
    }
    auto r1 = match_inputs(Level::F, a, inputs);
    auto r2 = match_inputs(Level::F, a, inputs);
    REQUIRE(r1.has_value());
    REQUIRE(r2.has_value());
    CHECK(r1->arg_types.size() == inputs.size());
    CHECK(type_eq(r1->residual, r2->residual));
    for (size_t i = 0; i < r1->arg_types.size(); i++)
      CHECK(type_eq(r1->arg_types[i], r2->arg_types[i]));
  }
}

TEST_CASE("lderiv_size counts everything but Lmulti") {
  auto var = [](const char* n) {
    LinDeriv v;
    v.rule = LinRule::Lvar;
    v.subject = m_var(n);
    v.type = lt_star();
    v.env = LinEnv().with(n, {lt_star()});
    return std::make_shared<LinDeriv>(std::move(v));
  };
  LinDeriv m;
  m.rule = LinRule::Lmulti;
  m.is_multi = true;
  m.subject = m_var("x");
  m.multi = {lt_star(), lt_star()};
  m.premises = {var("x"), var("x")};
  m.env = LinEnv().with("x", {lt_star(), lt_star()});
  auto two = std::make_shared<LinDeriv>(std::move(m));
  CHECK(lderiv_size(two) == 2);

  LinDeriv e;
  e.rule = LinRule::Lmulti;
  e.is_multi = true;
  e.subject = m_star();
  auto zero = std::make_shared<LinDeriv>(std::move(e));
  CHECK(lderiv_size(zero) == 0);
}

TEST_CASE("trace JSON lines format") {
  ReduceSession s;
  s.level = Level::ST;
  MetatermPtr m = parse_term("seq(star, ver(#a, gen(#a)))", Level::ST);
  Trace t = reduce(s, m, Strategy::WeakHead, 100);
  std::string jsonl = trace_to_jsonl(t, Strategy::WeakHead, 100);
  std::istringstream in(jsonl);
  std::string line;
  std::vector<nlohmann::json> lines;
  while (std::getline(in, line)) lines.push_back(nlohmann::json::parse(line));
  REQUIRE(lines.size() == 2 + t.step_count);
  CHECK(lines.front()["level"] == "st");
  CHECK(lines.front()["strategy"] == "wh");
  CHECK(lines.front()["fuel"] == 100);
  CHECK(lines[1]["step"] == 0);
  CHECK(lines[1]["rule"] == "GuardStar");
  CHECK(lines.back()["outcome"] == "star");
}

TEST_CASE("derivation JSON carries rule, term, type, premises") {
  auto r = check(Level::ST, KindCtx(), TypeEnv(), parse_term("\\x. x", Level::ST),
                 parse_type("#a -> #a", Level::ST));
  REQUIRE(r.ok());
  nlohmann::json j = derivation_to_json(r.derivation);
  CHECK(j["rule"] == "AbsIntro");
  CHECK(j["premises"].size() == 1);
  CHECK(j["premises"][0]["rule"] == "Var");
}

TEST_CASE("corpus entries parse and run") {
  CorpusEntry e = parse_corpus_entry(
      "name: demo\nlevel: st\ntype: #a -> #a\nterm: \\x. x\nexpect: realized\n");
  CHECK(e.name == "demo");
  CorpusOutcome o = run_corpus_entry(e, 1000);
  CHECK(o.passed);

  CHECK_THROWS_AS(parse_corpus_entry("name: x\nlevel: st\n"), std::invalid_argument);
}

TEST_CASE("unknown suite is rejected") {
  GenConfig cfg;
  CHECK_THROWS_AS(run_suite("nonsense", cfg, 1), UnknownSuite);
}

TEST_CASE("suite smoke runs") {
  GenConfig cfg;
  cfg.seed = 77;
  cfg.max_depth = 3;
  cfg.level = Level::ST;
  SuiteReport det = run_suite("determinism", cfg, 50);
  CHECK(det.passed == 50);
  cfg.level = Level::F;
  SuiteReport dia = run_suite("diamond", cfg, 50);
  CHECK(dia.passed == 50);
}

namespace {
int count_nodes(const MetatermPtr& m) {
  switch (m->tag) {
    case Metaterm::Tag::Lam:
    case Metaterm::Tag::TyLam:
    case Metaterm::Tag::Fresh: return 1 + count_nodes(m->body);
    case Metaterm::Tag::App:
    case Metaterm::Tag::Guard: return 1 + count_nodes(m->fun) + count_nodes(m->arg);
    case Metaterm::Tag::TyApp:
    case Metaterm::Tag::Verif:
    case Metaterm::Tag::Anno: return 1 + count_nodes(m->sub);
    default: return 1;
  }
}
}  // namespace

TEST_CASE("shrinking keeps the failure property") {
  // Shrink against an artificial predicate: "contains a guard".
  MetatermPtr m = parse_term("(\\x. seq(star, x)) (seq(star, star))", Level::ST);
  auto has_guard = [](const MetatermPtr& t) {
    std::function<bool(const MetatermPtr&)> go = [&](const MetatermPtr& u) -> bool {
      switch (u->tag) {
        case Metaterm::Tag::Guard: return true;
        case Metaterm::Tag::Lam:
        case Metaterm::Tag::TyLam:
        case Metaterm::Tag::Fresh: return go(u->body);
        case Metaterm::Tag::App: return go(u->fun) || go(u->arg);
        case Metaterm::Tag::Verif: return go(u->sub);
        default: return false;
      }
    };
    return go(t);
  };
  MetatermPtr small = shrink_metaterm(m, has_guard);
  CHECK(has_guard(small));
  CHECK(count_nodes(small) <= count_nodes(m));
}
