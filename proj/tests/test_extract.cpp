#include "doctest.h"
#include "rlz/extract.hpp"
#include "rlz/parser.hpp"
#include "rlz/printer.hpp"

using namespace rlz;

namespace {

TypePtr ty(const std::string& s, Level lv = Level::ST) { return parse_type(s, lv); }
MetatermPtr mt(const std::string& s, Level lv = Level::ST) { return parse_term(s, lv); }

}  // namespace

TEST_CASE("match_inputs") {
  // forall a. (a -> a) -> a with (B, M) matches as ((B, B -> B), B)
  auto a = ty("forall a. (a -> a) -> a", Level::F);
  InputSeq inputs{TypeInput{ty("#b", Level::F)}, TermInput{mt("m", Level::F)}};
  auto r = match_inputs(Level::F, a, inputs);
  REQUIRE(r.has_value());
  REQUIRE(r->arg_types.size() == 2);
  CHECK(type_eq(r->arg_types[0], ty("#b", Level::F)));
  CHECK(type_eq(r->arg_types[1], ty("#b -> #b", Level::F)));
  CHECK(type_eq(r->residual, ty("#b", Level::F)));

  // empty sequence matches with the type itself as residual
  auto e = match_inputs(Level::ST, ty("#a -> #b"), {});
  REQUIRE(e.has_value());
  CHECK(e->arg_types.empty());
  CHECK(type_eq(e->residual, ty("#a -> #b")));

  // shape disagreement
  CHECK_FALSE(match_inputs(Level::F, ty("#a -> #b", Level::F),
                           InputSeq{TypeInput{ty("#c", Level::F)}})
                  .has_value());
}

TEST_CASE("proof_size") {
  // size(x : #a) with x:#a = min(1,1) = 1
  TypeEnv env = TypeEnv().extended("x", ty("#a"));
  CHECK(proof_size(Level::ST, KindCtx(), env, mt("x"), ty("#a")) == 1);

  // size(\x. x : #a -> #a) = 1
  CHECK(proof_size(Level::ST, KindCtx(), TypeEnv(), mt("\\x. x"), ty("#a -> #a")) == 1);

  // size(\x. x : #a) = 0 (shape mismatch)
  CHECK(proof_size(Level::ST, KindCtx(), TypeEnv(), mt("\\x. x"), ty("#a")) == 0);

  CHECK_THROWS_AS(proof_size(Level::ST, KindCtx(), TypeEnv(), mt("(\\x. x) (\\y. y)"), ty("#a")),
                  NotNormal);
  CHECK_THROWS_AS(proof_size(Level::ST, KindCtx(), TypeEnv(), mt("star"), ty("#a")), NotPure);
}

TEST_CASE("proof size of arguments decreases") {
  // x : #a -> #b -> #c applied to y:#a, z:#b; residual #c
  TypeEnv env = TypeEnv()
                    .extended("x", ty("#a -> #b -> #c"))
                    .extended("y", ty("#a"))
                    .extended("z", ty("#b"));
  int whole = proof_size(Level::ST, KindCtx(), env, mt("x y z"), ty("#c"));
  int argy = proof_size(Level::ST, KindCtx(), env, mt("y"), ty("#a"));
  int argz = proof_size(Level::ST, KindCtx(), env, mt("z"), ty("#b"));
  CHECK(whole > argy);
  CHECK(whole > argz);
}

TEST_CASE("beta_normalize") {
  CHECK(term_eq(beta_normalize(Level::ST, KindCtx(), mt("(\\x. x) (\\y. y)"), 100),
                mt("\\y. y")));
  CHECK(term_eq(beta_normalize(Level::ST, KindCtx(), mt("\\x. x"), 100), mt("\\x. x")));
  CHECK_THROWS_AS(beta_normalize(Level::ST, KindCtx(), mt("(\\x. x x) (\\x. x x)"), 100),
                  ExtractionFuelExhausted);
  CHECK_THROWS_AS(beta_normalize(Level::ST, KindCtx(), mt("gen(#a)"), 100), NotPure);
}

TEST_CASE("extract: K") {
  auto r = extract(Level::ST, KindCtx(), TypeEnv(), ty("#a -> #b -> #a"), mt("\\x. \\y. x"),
                   1000000);
  CHECK(term_eq(r.normal_form, mt("\\x. \\y. x")));
  std::string why;
  REQUIRE_MESSAGE(validate(r.derivation, &why), why);
  CHECK(term_eq(r.derivation->term, mt("\\x. \\y. x")));
  CHECK(type_eq(r.derivation->type, ty("#a -> #b -> #a")));
  // independent oracle: the checker accepts the same judgment
  auto chk = check(Level::ST, KindCtx(), TypeEnv(), r.normal_form, ty("#a -> #b -> #a"));
  CHECK(chk.ok());
}

TEST_CASE("extract: non-normal realizer is normalized first") {
  auto r = extract(Level::ST, KindCtx(), TypeEnv(), ty("#a -> #a"),
                   mt("(\\f. \\x. f x) (\\y. y)"), 1000000);
  CHECK(term_eq(r.normal_form, mt("\\x. x")));
  std::string why;
  CHECK_MESSAGE(validate(r.derivation, &why), why);
}

TEST_CASE("extract: eta-short subjects via peeling") {
  // y itself realizes #a -> #b under y : #a -> #b; the derivation subject is
  // y, not its eta-expansion.
  TypeEnv env = TypeEnv().extended("y", ty("#a -> #b"));
  auto r = extract(Level::ST, KindCtx(), env, ty("#a -> #b"), mt("y"), 1000000);
  CHECK(term_eq(r.derivation->term, mt("y")));
  CHECK(r.derivation->rule == TypingDerivation::Rule::Var);
  // the eta-long reconstruction is recorded as metadata
  CHECK(term_eq(r.eta_long, mt("\\x0. y x0")));
  std::string why;
  CHECK_MESSAGE(validate(r.derivation, &why), why);
}

TEST_CASE("extract at F with quantifiers") {
  auto a = ty("#a -> #b -> (forall c. (#a -> #b -> c) -> c)", Level::F);
  auto m = mt("\\x. \\y. /\\c. \\f. f x y", Level::F);
  auto r = extract(Level::F, KindCtx(), TypeEnv(), a, m, 1000000);
  std::string why;
  REQUIRE_MESSAGE(validate(r.derivation, &why), why);
  CHECK(term_eq(r.derivation->term, m));
  CHECK(type_eq(r.derivation->type, a));
}

TEST_CASE("extract at F: elimination spine") {
  auto a = ty("(forall c. (#a -> #b -> c) -> c) -> #a", Level::F);
  auto m = mt("\\p. p [#a] (\\x. \\y. x)", Level::F);
  auto r = extract(Level::F, KindCtx(), TypeEnv(), a, m, 1000000);
  std::string why;
  REQUIRE_MESSAGE(validate(r.derivation, &why), why);
  CHECK(type_eq(r.derivation->type, a));
}

TEST_CASE("extract errors") {
  CHECK_THROWS_AS(
      extract(Level::ST, KindCtx(), TypeEnv(), ty("#a"), mt("gen(#a)"), 1000), NotPure);
  CHECK_THROWS_AS(
      extract(Level::ST, KindCtx(), TypeEnv(), ty("#a -> #b"), mt("\\x. x"), 1000), NotRealizer);
}

TEST_CASE("extract peels mixed arrow and quantifier prefixes") {
  TypeEnv env = TypeEnv().extended("p", ty("#a -> forall c. c -> c", Level::F));
  auto a = ty("#a -> forall c. c -> c", Level::F);
  auto r = extract(Level::F, KindCtx(), env, a, mt("p", Level::F), 1000000);
  std::string why;
  REQUIRE_MESSAGE(validate(r.derivation, &why), why);
  CHECK(r.derivation->rule == TypingDerivation::Rule::Var);
  CHECK(term_eq(r.derivation->term, mt("p", Level::F)));
  CHECK(type_eq(r.derivation->type, a));
}

TEST_CASE("extract at FOmega inserts conversions where types differ up to beta") {
  KindCtx ctx = KindCtx().with_eig("b", kind_prop());
  // ForAll over a higher-kinded instantiation: p : forall q:Prop->Prop. q #b -> q #b
  TypeEnv env =
      TypeEnv().extended("p", ty("forall q:Prop->Prop. q #b -> q #b", Level::FOmega));
  auto goal = ty("#b -> #b", Level::FOmega);
  auto subject = mt("p [\\c:Prop. c]", Level::FOmega);
  auto r = extract(Level::FOmega, ctx, env, goal, subject, 1000000);
  std::string why;
  REQUIRE_MESSAGE(validate(r.derivation, &why), why);
  CHECK(equiv_type(Level::FOmega, r.derivation->type, goal));
  auto chk = check(Level::FOmega, ctx, env, r.normal_form, goal);
  CHECK(chk.ok());
}

TEST_CASE("extract round-trips with the checker on picked cases") {
  struct Case {
    Level lv;
    const char* env_var;
    const char* env_ty;
    const char* a;
    const char* m;
  };
  for (const Case& c : std::initializer_list<Case>{
           {Level::ST, "f", "#a -> #a", "#a -> #a", "\\x. f (f x)"},
           {Level::ST, "g", "(#a -> #a) -> #b", "#b", "g (\\x. x)"},
           {Level::F, "p", "forall a. a -> a", "#b -> #b", "p [#b]"},
           {Level::F, "", "", "forall a. a -> a", "/\\a. \\x. x"},
       }) {
    CAPTURE(c.m);
    TypeEnv env;
    if (*c.env_var) env = env.extended(c.env_var, ty(c.env_ty, c.lv));
    auto r = extract(c.lv, KindCtx(), env, ty(c.a, c.lv), mt(c.m, c.lv), 1000000);
    std::string why;
    REQUIRE_MESSAGE(validate(r.derivation, &why), why);
    auto chk = check(c.lv, KindCtx(), env, r.normal_form, ty(c.a, c.lv));
    CHECK(chk.ok());
  }
}
