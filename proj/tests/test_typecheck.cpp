#include "doctest.h"
#include "rlz/parser.hpp"
#include "rlz/printer.hpp"
#include "rlz/typecheck.hpp"

using namespace rlz;

namespace {

TypePtr ty(const std::string& s, Level lv = Level::ST) { return parse_type(s, lv); }
MetatermPtr mt(const std::string& s, Level lv = Level::ST) { return parse_term(s, lv); }

}  // namespace

TEST_CASE("kind_of") {
  KindCtx ctx;
  CHECK(kind_eq(kind_of(ctx, ty("\\a:Prop. a -> a", Level::FOmega)),
                kind_arrow(kind_prop(), kind_prop())));

  KindCtx leib = ctx.with_eig("p", kind_arrow(kind_base("k"), kind_prop()))
                     .with_eig("A", kind_base("k"))
                     .with_eig("B", kind_base("k"));
  CHECK(is_prop(kind_of(leib, ty("#p #B -> #p #A", Level::FOmega))));

  KindCtx one = ctx.with_tvar("a", kind_prop()).with_tvar("b", kind_prop());
  CHECK_THROWS_AS(kind_of(one, ty("a b", Level::FOmega)), KindMismatch);
  CHECK_THROWS_AS(kind_of(ctx, ty("zzz", Level::FOmega)), UnboundName);
}

TEST_CASE("kinds are unique across alpha-variants") {
  KindCtx ctx;
  auto t1 = ty("forall a:@k. forall p:@k->Prop. p a", Level::FOmega);
  auto t2 = ty("forall b:@k. forall q:@k->Prop. q b", Level::FOmega);
  CHECK(kind_eq(kind_of(ctx, t1), kind_of(ctx, t2)));
}

TEST_CASE("env_well_formed") {
  KindCtx ctx = KindCtx().with_eig("a", kind_prop()).with_eig("p",
                                                              kind_arrow(kind_base("k"), kind_prop()));
  CHECK(env_well_formed(Level::FOmega, ctx, TypeEnv().extended("x", ty("#a", Level::FOmega))));
  CHECK_FALSE(
      env_well_formed(Level::FOmega, ctx, TypeEnv().extended("x", ty("#p", Level::FOmega))));
  CHECK(env_well_formed(Level::FOmega, ctx, TypeEnv()));
}

TEST_CASE("well_kinded metaterms") {
  KindCtx ctx;
  CHECK(well_kinded(ctx, mt("nu #a. gen(#a)", Level::FOmega)));
  CHECK_FALSE(well_kinded(ctx, mt("nu #a:@k->Prop. gen(#a)", Level::FOmega)));
  CHECK(well_kinded(ctx, mt("x x", Level::FOmega)));
}

TEST_CASE("check: K at ST") {
  auto r = check(Level::ST, KindCtx(), TypeEnv(), mt("\\x. \\y. x"), ty("#a -> #b -> #a"));
  REQUIRE(r.ok());
  std::string why;
  CHECK_MESSAGE(validate(r.derivation, &why), why);
}

TEST_CASE("check: conjunction intro at F") {
  auto r = check(Level::F, KindCtx(), TypeEnv(), mt("\\x. \\y. /\\c. \\f. f x y", Level::F),
                 ty("#a -> #b -> (forall c. (#a -> #b -> c) -> c)", Level::F));
  REQUIRE(r.ok());
  std::string why;
  CHECK_MESSAGE(validate(r.derivation, &why), why);
}

TEST_CASE("check failures") {
  auto r = check(Level::ST, KindCtx(), TypeEnv(), mt("\\x. x"), ty("#a -> #b"));
  CHECK_FALSE(r.ok());
  CHECK(r.fail->path == "body");

  auto s = check(Level::ST, KindCtx(), TypeEnv(), mt("\\x. x x"), ty("#a -> #a"));
  CHECK_FALSE(s.ok());
}

TEST_CASE("synth") {
  TypeEnv env = TypeEnv().extended("x", ty("#a -> #b")).extended("y", ty("#a"));
  auto r = synth(Level::ST, KindCtx(), env, mt("x y"));
  REQUIRE(r.ok());
  CHECK(type_eq(r.type, ty("#b")));

  TypeEnv penv = TypeEnv().extended("p", ty("forall a. a", Level::F));
  auto q = synth(Level::F, KindCtx(), penv, mt("p [#b]", Level::F));
  REQUIRE(q.ok());
  CHECK(type_eq(q.type, ty("#b")));
  std::string why;
  CHECK_MESSAGE(validate(q.derivation, &why), why);

  auto bad = synth(Level::ST, KindCtx(), TypeEnv(), mt("(\\x. x) y"));
  CHECK_FALSE(bad.ok());
}

TEST_CASE("annotation makes redex heads checkable") {
  TypeEnv env = TypeEnv().extended("y", ty("#a"));
  auto r = synth(Level::ST, KindCtx(), env, mt("(\\x. x : #a -> #a) y"));
  REQUIRE(r.ok());
  CHECK(type_eq(r.type, ty("#a")));
  // The derivation subject carries no annotations.
  CHECK(is_pure(r.derivation->term));
}

TEST_CASE("conversion at FOmega") {
  KindCtx ctx = KindCtx().with_eig("b", kind_prop());
  auto a1 = ty("(\\c:Prop. c -> c) #b", Level::FOmega);
  auto a2 = ty("#b -> #b", Level::FOmega);
  // parse_type canonicalizes; build the redex type by hand to exercise Conv.
  auto raw = t_tapp(t_tlam("c", kind_prop(), t_arrow(t_bound(0), t_bound(0))), t_eig("b"));
  auto r1 = check(Level::FOmega, ctx, TypeEnv(), mt("\\x. x"), raw);
  auto r2 = check(Level::FOmega, ctx, TypeEnv(), mt("\\x. x"), a2);
  REQUIRE(r1.ok());
  REQUIRE(r2.ok());
  CHECK(r1.derivation->rule == TypingDerivation::Rule::Conv);
  std::string why;
  CHECK_MESSAGE(validate(r1.derivation, &why), why);
  CHECK(type_eq(a1, a2));  // canonicalized at parse
}

TEST_CASE("AllIntro renames rather than rejects") {
  // checking /\a. \x. x against forall a. a -> a with `a` already free in env
  TypeEnv env = TypeEnv().extended("z", ty("a", Level::F));
  auto r = check(Level::F, KindCtx().with_tvar("a", kind_prop()), env,
                 mt("/\\a. \\x. x", Level::F), ty("forall a. a -> a", Level::F));
  REQUIRE(r.ok());
  std::string why;
  CHECK_MESSAGE(validate(r.derivation, &why), why);
  CHECK(r.derivation->binder_name != "a");
}

TEST_CASE("validation rejects a mutated node") {
  auto r = check(Level::ST, KindCtx(), TypeEnv(), mt("\\x. \\y. x"), ty("#a -> #b -> #a"));
  REQUIRE(r.ok());
  auto broken = std::make_shared<TypingDerivation>(*r.derivation);
  broken->type = ty("#b -> #b -> #a");
  CHECK_FALSE(validate(broken));
}

TEST_CASE("subject reduction holds on a sample") {
  // (\x. x) (\y. y) : #a -> #a, then its beta reduct
  auto t0 = mt("((\\x. x : (#a -> #a) -> #a -> #a)) (\\y. y)");
  auto r0 = check(Level::ST, KindCtx(), TypeEnv(), t0, ty("#a -> #a"));
  REQUIRE(r0.ok());
  auto r1 = check(Level::ST, KindCtx(), TypeEnv(), mt("\\y. y"), ty("#a -> #a"));
  CHECK(r1.ok());
}

#include "rlz/extract.hpp"
#include "rlz/gen.hpp"

TEST_CASE("beta-normal forms of checkable judgments keep checking") {
  for (Level lv : {Level::ST, Level::F}) {
    for (uint64_t seed = 0; seed < 60; seed++) {
      GenConfig cfg;
      cfg.level = lv;
      cfg.seed = 500 + seed;
      cfg.max_depth = 4;
      TypedJudgment j = gen_typed_term(cfg);
      MetatermPtr nf = beta_normalize(lv, j.ctx, erase_annotations(j.term), 100000);
      CheckResult r = check(lv, j.ctx, j.env, nf, j.type);
      CAPTURE(print(nf));
      CHECK(r.ok());
    }
  }
}

TEST_CASE("conversion coherence: checking is invariant under type beta-expansion") {
  KindCtx base = KindCtx().with_eig("a", kind_prop()).with_eig("b", kind_prop());
  for (uint64_t seed = 0; seed < 40; seed++) {
    GenConfig cfg;
    cfg.level = Level::FOmega;
    cfg.seed = 900 + seed;
    cfg.max_depth = 3;
    TypedJudgment j = gen_typed_term(cfg);
    // A beta-expanded variant of the target: (\c:Prop. A[#x := c]) #x for some
    // eigenvariable occurring in A, or a vacuous redex otherwise.
    // Abstract out a Prop-kinded eigenvariable when one occurs; otherwise use
    // a vacuous redex.
    std::string prop_eig;
    for (const auto& g : free_names(j.type).eig_vars)
      if (auto k = j.ctx.eig_kind(g); k && is_prop(*k)) {
        prop_eig = g;
        break;
      }
    TypePtr variant;
    if (!prop_eig.empty()) {
      TypePtr abstracted = close_tvar(subst_eig(j.type, {{prop_eig, t_var("c")}}), "c");
      variant = t_tapp(t_tlam("c", kind_prop(), abstracted), t_eig(prop_eig));
    } else {
      variant = t_tapp(t_tlam("c", kind_prop(), t_bound(0)), j.type);
    }
    REQUIRE(equiv_type(Level::FOmega, variant, j.type));
    CheckResult direct = check(Level::FOmega, j.ctx, j.env, j.term, j.type);
    CheckResult converted = check(Level::FOmega, j.ctx, j.env, j.term, variant);
    CHECK(direct.ok() == converted.ok());
    if (converted.ok()) {
      std::string why;
      CHECK_MESSAGE(validate(converted.derivation, &why), why);
    }
  }
}
