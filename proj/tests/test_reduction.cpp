#include "doctest.h"
#include "rlz/parser.hpp"
#include "rlz/printer.hpp"
#include "rlz/reduction.hpp"
#include "rlz/simultaneous.hpp"

using namespace rlz;

namespace {

ReduceSession session(Level lv) {
  ReduceSession s;
  s.level = lv;
  return s;
}

MetatermPtr st(const std::string& s) { return parse_term(s, Level::ST); }
MetatermPtr f(const std::string& s) { return parse_term(s, Level::F); }
TypePtr stty(const std::string& s) { return parse_type(s, Level::ST); }

}  // namespace

TEST_CASE("expand_st") {
  // gen(#a -> #b) = \x. seq(ver(#a, x), gen(#b))
  CHECK(term_eq(expand_st(st("gen(#a -> #b)")), st("\\x. seq(ver(#a, x), gen(#b))")));
  // atomic generators unchanged
  CHECK(term_eq(expand_st(st("gen(#a)")), st("gen(#a)")));
  // ver at a compound type pushes generators inside
  auto expanded = expand_st(st("ver(#a -> #b -> #a, \\x. \\y. x)"));
  auto expected =
      m_verif(stty("#a"), m_app(m_app(st("\\x. \\y. x"), expand_st(st("gen(#a)"))),
                                expand_st(st("gen(#b)"))));
  CHECK(term_eq(expanded, expected));
  // pure terms unchanged
  auto pure = st("\\x. x (\\y. y)");
  CHECK(expand_st(pure) == pure);
  CHECK_THROWS_AS(expand_st(f("gen(forall a. a)")), LevelError);
}

TEST_CASE("wh_step basics") {
  auto s = session(Level::ST);
  // seq(star, M) -> M at the root
  auto step = wh_step(s, st("seq(star, gen(#a))"));
  REQUIRE(step.has_value());
  CHECK(step->rule == RuleTag::GuardStar);
  CHECK(step->pos.empty());
  CHECK(term_eq(step->after, st("gen(#a)")));

  // ver(#a, gen(#a)) -> star
  auto v = wh_step(s, st("ver(#a, gen(#a))"));
  REQUIRE(v.has_value());
  CHECK(v->rule == RuleTag::VerifEig);
  CHECK(term_eq(v->after, m_star()));

  // abstractions are weak-head normal
  CHECK_FALSE(wh_step(s, st("\\x. x")).has_value());
  // no rule matches an abstraction under an atomic verifier
  CHECK_FALSE(wh_step(s, st("ver(#a, \\x. x)")).has_value());
}

TEST_CASE("wh_step rule 8 names the fresh eigenvariable from the supply") {
  auto s = session(Level::F);
  auto step = wh_step(s, f("ver(forall a. a, m)"));
  REQUIRE(step.has_value());
  CHECK(step->rule == RuleTag::VerifAll);
  CHECK(term_eq(step->after, f("nu #g0. ver(#g0, m [#g0])")));
  CHECK(print(step->after) == "nu #g0. ver(#g0, m [#g0])");
}

TEST_CASE("wh at F contracts the outermost redex first") {
  auto s = session(Level::F);
  // Both the root (VerifImp) and the argument (VerifEig) are weak-head
  // redexes; outermost wins.
  auto m = f("ver(#a -> #b, ver(#c, gen(#c)))");
  auto step = wh_step(s, m);
  REQUIRE(step.has_value());
  CHECK(step->rule == RuleTag::VerifImp);
  CHECK(step->pos.empty());
  auto wh = enumerate_wh_redexes(s, m);
  CHECK(wh.size() == 2);
}

TEST_CASE("worked example: K realizes the first Hilbert axiom") {
  auto s = session(Level::ST);
  auto m = expand_st(st("ver(#a -> #b -> #a, \\x. \\y. x)"));
  Trace t = reduce(s, m, Strategy::WeakHead, 1000000);
  CHECK(t.outcome == Outcome::StarReached);
  CHECK(t.step_count < 200);
  // every recorded step revalidates
  for (const auto& step : t.steps) CHECK(revalidate_step(s, step));
}

TEST_CASE("worked example: S realizes the second Hilbert axiom") {
  auto s = session(Level::ST);
  auto m = expand_st(
      st("ver((#a -> #b -> #c) -> (#a -> #b) -> #a -> #c, \\x. \\y. \\z. x z (y z))"));
  Trace t = reduce(s, m, Strategy::WeakHead, 1000000);
  CHECK(t.outcome == Outcome::StarReached);
  CHECK(t.step_count < 200);
}

TEST_CASE("worked example: conjunction at level F") {
  auto s = session(Level::F);
  // a /\ b := forall c. (a -> b -> c) -> c
  auto intro = f(
      "ver(#a -> #b -> (forall c. (#a -> #b -> c) -> c), \\x. \\y. /\\c. \\f. f x y)");
  Trace t1 = reduce(s, intro, Strategy::WeakHead, 1000000);
  CHECK(t1.outcome == Outcome::StarReached);
  CHECK(t1.step_count < 200);

  auto elim = f("ver((forall c. (#a -> #b -> c) -> c) -> #a, \\p. p [#a] (\\x. \\y. x))");
  Trace t2 = reduce(s, elim, Strategy::WeakHead, 1000000);
  CHECK(t2.outcome == Outcome::StarReached);
  CHECK(t2.step_count < 200);
}

TEST_CASE("worked example: Leibniz symmetry at FOmega") {
  ReduceSession s;
  s.level = Level::FOmega;
  s.ctx = s.ctx.with_eig("A", kind_base("k")).with_eig("B", kind_base("k"));
  auto ty = parse_type(
      "(forall P:@k->Prop. P #A -> P #B) -> (forall P:@k->Prop. P #B -> P #A)",
      Level::FOmega);
  auto tm = parse_term("\\e. /\\P:@k->Prop. \\x. e [\\c:@k. P c -> P #A] (\\y. y) x",
                       Level::FOmega);
  Trace t = reduce(s, m_verif(ty, tm), Strategy::WeakHead, 1000000);
  CHECK(t.outcome == Outcome::StarReached);
  CHECK(t.step_count < 200);
}

TEST_CASE("divergent terms exhaust fuel") {
  auto s = session(Level::ST);
  Trace t = reduce(s, st("(\\x. x x) (\\x. x x)"), Strategy::WeakHead, 10);
  CHECK(t.outcome == Outcome::FuelExhausted);
  CHECK(t.step_count == 10);
}

TEST_CASE("stuck verification ends Normal") {
  auto s = session(Level::ST);
  Trace t = reduce(s, st("ver(#a, \\x. x)"), Strategy::WeakHead, 1000000);
  CHECK(t.outcome == Outcome::Normal);
  CHECK(term_eq(t.final_term, st("ver(#a, \\x. x)")));
}

TEST_CASE("enumerate_redexes pre-order") {
  auto s = session(Level::ST);
  auto m = st("seq(star, ver(#a, gen(#a)))");
  auto rs = enumerate_redexes(s, m);
  REQUIRE(rs.size() == 2);
  CHECK(rs[0].second == RuleTag::GuardStar);
  CHECK(rs[0].first.empty());
  CHECK(rs[1].second == RuleTag::VerifEig);
  CHECK(rs[1].first == Path{PathStep::Next});

  CHECK(enumerate_redexes(s, m_star()).empty());

  auto sf = session(Level::F);
  auto gs = enumerate_redexes(sf, f("gen(#a -> #b)"));
  REQUIRE(gs.size() == 1);
  CHECK(gs[0].second == RuleTag::GenImp);
}

TEST_CASE("ST weak head reduction is deterministic on samples") {
  auto s = session(Level::ST);
  for (const char* src :
       {"seq(star, star)", "ver(#a, gen(#a))", "(\\x. x) star",
        "seq(ver(#a, gen(#a)), (\\x. x) star)", "ver(#a, (\\x. x) gen(#a))",
        "(\\x. x x) (\\y. y)"}) {
    CHECK(enumerate_wh_redexes(s, st(src)).size() <= 1);
  }
}

TEST_CASE("rule 9 fires eagerly, and only when the eigenvariable is gone") {
  auto s = session(Level::F);
  auto m = f("nu #a. star");
  auto step = wh_step(s, m);
  REQUIRE(step.has_value());
  CHECK(step->rule == RuleTag::FreshDrop);
  CHECK(term_eq(step->after, m_star()));

  auto used = f("nu #a. ver(#a, gen(#a))");
  auto s2 = wh_step(s, used);
  REQUIRE(s2.has_value());
  CHECK(s2->rule == RuleTag::VerifEig);  // inside the binder
  CHECK(s2->pos == Path{PathStep::Body});
  CHECK(term_eq(s2->after, f("nu #a. star")));
}

TEST_CASE("complete development") {
  CHECK(term_eq(complete_development(Level::F, f("(\\x. x x) (\\y. y)")),
                f("(\\y. y) (\\y. y)")));
  CHECK(term_eq(complete_development(Level::F, f("gen(#a -> #b)")),
                f("\\x. seq(ver(#a, x), gen(#b))")));
  CHECK(term_eq(complete_development(Level::F, m_star()), m_star()));
  CHECK_THROWS_AS(complete_development(Level::ST, m_star()), LevelError);
}

TEST_CASE("triangle witness on hand-picked terms") {
  auto s = session(Level::F);
  for (const char* src : {
           "(\\x. x x) (\\y. (\\z. z) y)",
           "seq(star, seq(star, ver(#a, gen(#a))))",
           "ver(#a -> #b, ver(#c, gen(#c)))",
           "ver(forall a. a -> a, \\x. x)",
           "gen((forall a. a) -> #b)",
           "nu #a. seq(ver(#a, gen(#a)), star)",
           "(\\x. seq(x, x)) (ver(#a, gen(#a)))",
           "(/\\a. gen(a)) [#b]",
       }) {
    auto m = f(src);
    CAPTURE(src);
    auto cdm = complete_development(Level::F, m);
    for (const auto& [pos, rule] : enumerate_redexes(s, m)) {
      Step step = apply_at(s, m, pos, rule);
      auto lifted = sto_lift_step(step);
      std::string why;
      REQUIRE_MESSAGE(sto_validate(lifted, &why), why);
      CHECK(term_eq(lifted->src, m));
      CHECK(term_eq(lifted->dst, step.after));
      auto tri = sto_triangle(lifted);
      REQUIRE_MESSAGE(sto_validate(tri, &why), why);
      CHECK(term_eq(tri->src, step.after));
      CHECK(term_eq(tri->dst, cdm));
    }
  }
}

TEST_CASE("random strategy is seed deterministic") {
  auto m = f("seq(star, (\\x. x x) ((\\y. y) gen(#a -> #b)))");
  auto s1 = session(Level::F);
  auto s2 = session(Level::F);
  Trace t1 = reduce(s1, m, Strategy::Random, 50, 42);
  Trace t2 = reduce(s2, m, Strategy::Random, 50, 42);
  REQUIRE(t1.step_count == t2.step_count);
  CHECK(term_eq(t1.final_term, t2.final_term));
}
