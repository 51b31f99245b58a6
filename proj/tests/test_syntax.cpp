#include <random>

#include "doctest.h"
#include "rlz/parser.hpp"
#include "rlz/printer.hpp"
#include "rlz/syntax.hpp"

using namespace rlz;

TEST_CASE("parse basic terms") {
  auto id = parse_term("\\x. x", Level::ST);
  CHECK(term_eq(id, m_lam("x", m_bvar(0))));

  auto k = parse_type("#a -> #b -> #a", Level::ST);
  CHECK(type_eq(k, t_arrow(t_eig("a"), t_arrow(t_eig("b"), t_eig("a")))));

  auto q = parse_type("forall a:Prop. a -> a", Level::FOmega);
  CHECK(type_eq(q, t_forall("a", kind_prop(), t_arrow(t_bound(0), t_bound(0)))));
}

TEST_CASE("level gating") {
  CHECK_THROWS_AS(parse_type("forall a. a", Level::ST), LevelError);
  CHECK_THROWS_AS(parse_type("a", Level::ST), LevelError);
  CHECK_THROWS_AS(parse_term("/\\a. x", Level::ST), LevelError);
  CHECK_THROWS_AS(parse_term("x [#a]", Level::ST), LevelError);
  CHECK_THROWS_AS(parse_type("\\a:Prop. a", Level::F), LevelError);
  CHECK_THROWS_AS(parse_type("forall a:Prop->Prop. a", Level::F), LevelError);
  CHECK_NOTHROW(parse_type("forall a:Prop. a", Level::F));
  CHECK_NOTHROW(parse_type("forall p:@k->Prop. p -> p", Level::FOmega));
}

TEST_CASE("print formats") {
  CHECK(print(m_lam("x", m_bvar(0))) == "\\x. x");
  CHECK(print(m_gen(t_arrow(t_eig("a"), t_eig("b")))) == "gen(#a -> #b)");
  CHECK(print(m_star()) == "star");
}

TEST_CASE("binders close and shadow") {
  auto t = parse_term("\\x. \\x. x", Level::ST);
  CHECK(term_eq(t, m_lam("x", m_lam("x", m_bvar(0)))));

  auto u = parse_term("\\x. x (\\y. x)", Level::ST);
  CHECK(term_eq(u, m_lam("x", m_app(m_bvar(0), m_lam("y", m_bvar(1))))));

  auto nu = parse_term("nu #a. ver(#a, x)", Level::F);
  auto fn = free_names(nu);
  CHECK(fn.term_vars == std::set<std::string>{"x"});
  CHECK(fn.eig_vars.empty());
  CHECK(fn.type_vars.empty());
}

TEST_CASE("free names") {
  auto m = parse_term("\\x. x y", Level::ST);
  CHECK(free_names(m).term_vars == std::set<std::string>{"y"});

  auto g = parse_term("gen(#a -> b)", Level::F);
  auto fn = free_names(g);
  CHECK(fn.type_vars == std::set<std::string>{"b"});
  CHECK(fn.eig_vars == std::set<std::string>{"a"});
}

TEST_CASE("substitution is capture avoiding") {
  // (\x. x y)[y := star] = \x. x star
  auto m = parse_term("\\x. x y", Level::ST);
  auto r = subst_term(m, {{"y", m_star()}});
  CHECK(term_eq(r, parse_term("\\x. x star", Level::ST)));

  // (\x. y)[y := x] = \x'. x  -- the free x stays free
  auto n = parse_term("\\x. y", Level::ST);
  auto s = subst_term(n, {{"y", m_var("x")}});
  CHECK(term_eq(s, m_lam("x", m_var("x"))));
  CHECK(print(s) == "\\x'. x");
  CHECK(term_eq(parse_term(print(s), Level::ST), s));

  // (forall a. a -> b)[b := a] = forall a'. a' -> a
  auto ty = parse_type("forall a. a -> b", Level::F);
  auto tz = subst_tvar(ty, {{"b", t_var("a")}});
  CHECK(type_eq(tz, t_forall("a", kind_prop(), t_arrow(t_bound(0), t_var("a")))));
  CHECK(print(tz) == "forall a'. a' -> a");
}

TEST_CASE("substitution composition") {
  // t[x:=u][y:=v] == t[y:=v][x:=u[y:=v]] when x not free in v
  auto t = parse_term("x (y x)", Level::ST);
  auto u = parse_term("\\z. z y", Level::ST);
  auto v = parse_term("star", Level::ST);
  auto lhs = subst_term(subst_term(t, {{"x", u}}), {{"y", v}});
  auto rhs = subst_term(subst_term(t, {{"y", v}}), {{"x", subst_term(u, {{"y", v}})}});
  CHECK(term_eq(lhs, rhs));
}

TEST_CASE("tau equivalence at FOmega") {
  auto a = parse_term("gen((\\a:Prop. a) #b)", Level::FOmega);
  auto b = parse_term("gen(#b)", Level::FOmega);
  CHECK(equiv(Level::FOmega, a, b));

  CHECK(equiv(Level::ST, parse_term("\\x. x", Level::ST), parse_term("\\y. y", Level::ST)));
  CHECK_FALSE(equiv(Level::ST, parse_term("\\x. \\y. x", Level::ST),
                    parse_term("\\x. \\y. y", Level::ST)));
}

TEST_CASE("canonicalization is idempotent") {
  auto m = parse_term("(/\\a. gen((\\c:Prop. c -> a) #b)) [(\\c:Prop. c) #d]", Level::FOmega);
  auto c1 = canonicalize(Level::FOmega, m);
  auto c2 = canonicalize(Level::FOmega, c1);
  CHECK(term_eq(c1, c2));
}

TEST_CASE("type normalization") {
  auto t = parse_type("(\\a:Prop. a -> a) #b", Level::FOmega);
  CHECK(type_eq(t, t_arrow(t_eig("b"), t_eig("b"))));
}

TEST_CASE("purity") {
  CHECK(is_pure(parse_term("\\x. x x", Level::ST)));
  CHECK(is_pure(parse_term("/\\a. \\x. x [#b]", Level::F)));
  CHECK_FALSE(is_pure(parse_term("\\x. star", Level::ST)));
  CHECK_FALSE(is_pure(parse_term("gen(#a)", Level::ST)));
  CHECK_FALSE(is_pure(parse_term("nu #a. x", Level::F)));
}

TEST_CASE("annotations") {
  auto m = parse_term("(\\x. x : #a -> #a) y", Level::ST);
  CHECK(has_annotations(m));
  auto e = erase_annotations(m);
  CHECK_FALSE(has_annotations(e));
  CHECK(term_eq(e, parse_term("(\\x. x) y", Level::ST)));
}

// Random AST generator for the round-trip property.
namespace {

MetatermPtr random_term(std::mt19937_64& rng, Level lv, int depth,
                        std::vector<std::string>& tvars, int nesting = 0);

TypePtr random_type(std::mt19937_64& rng, Level lv, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : (lv == Level::ST ? 2 : 3));
  switch (pick(rng)) {
    case 0: return t_eig("e" + std::to_string(rng() % 3));
    case 1:
      if (lv == Level::ST) return t_eig("d" + std::to_string(rng() % 2));
      return t_var("v" + std::to_string(rng() % 3));
    case 2: return t_arrow(random_type(rng, lv, depth - 1), random_type(rng, lv, depth - 1));
    default: {
      auto body = random_type(rng, lv, depth - 1);
      std::string b = "q" + std::to_string(rng() % 2);
      return t_forall(b, kind_prop(), close_tvar(body, b));
    }
  }
}

MetatermPtr random_term(std::mt19937_64& rng, Level lv, int depth, std::vector<std::string>& vars,
                        int nesting) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : (lv == Level::ST ? 7 : 9));
  switch (pick(rng)) {
    case 0: return m_star();
    case 1:
      if (!vars.empty()) return m_var(vars[rng() % vars.size()]);
      return m_var("u" + std::to_string(rng() % 3));
    case 2: return m_gen(random_type(rng, lv, 1));
    case 3: {
      std::string x = "x" + std::to_string(nesting);
      vars.push_back(x);
      auto body = random_term(rng, lv, depth - 1, vars, nesting + 1);
      vars.pop_back();
      return m_lam(x, close_term(body, x));
    }
    case 4:
      return m_app(random_term(rng, lv, depth - 1, vars, nesting),
                   random_term(rng, lv, depth - 1, vars, nesting));
    case 5:
      return m_guard(random_term(rng, lv, depth - 1, vars, nesting),
                     random_term(rng, lv, depth - 1, vars, nesting));
    case 6: return m_verif(random_type(rng, lv, 2), random_term(rng, lv, depth - 1, vars, nesting));
    case 7: return m_gen(random_type(rng, lv, 2));
    case 8: {
      std::string a = "t" + std::to_string(nesting);
      auto body = random_term(rng, lv, depth - 1, vars, nesting + 1);
      return m_tylam(a, kind_prop(), close_tvar_in_term(body, a));
    }
    default: {
      std::string a = "e" + std::to_string(nesting);
      auto body = random_term(rng, lv, depth - 1, vars, nesting + 1);
      return m_fresh(a, kind_prop(), close_eig_in_term(body, a));
    }
  }
}

}  // namespace

TEST_CASE("parse/print round trip on random terms") {
  std::mt19937_64 rng(20240817);
  for (Level lv : {Level::ST, Level::F}) {
    for (int i = 0; i < 300; i++) {
      std::vector<std::string> vars;
      auto m = random_term(rng, lv, 4, vars);
      auto printed = print(m);
      CAPTURE(printed);
      auto back = parse_term(printed, lv);
      CHECK(equiv(lv, back, m));
    }
  }
}

TEST_CASE("equiv is an equivalence relation on samples") {
  std::mt19937_64 rng(7);
  std::vector<MetatermPtr> pool;
  for (int i = 0; i < 40; i++) {
    std::vector<std::string> vars;
    pool.push_back(random_term(rng, Level::F, 3, vars));
  }
  for (const auto& a : pool) CHECK(equiv(Level::F, a, a));
  for (const auto& a : pool)
    for (const auto& b : pool) CHECK(equiv(Level::F, a, b) == equiv(Level::F, b, a));
}

TEST_CASE("open and close are inverse") {
  auto body = parse_term("\\y. x y", Level::ST);  // closed term, then close over x
  auto closed = close_term(body, "x");
  auto reopened = open_term(closed, m_var("x"));
  CHECK(term_eq(reopened, body));
}
