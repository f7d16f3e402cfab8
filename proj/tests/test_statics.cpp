#include <doctest.h>

#include <random>

#include "cdgl/eval.hpp"
#include "cdgl/parser.hpp"
#include "cdgl/printer.hpp"
#include "cdgl/statics.hpp"

using namespace cdgl;

TEST_CASE("free variables per the syntactic tables") {
  // FV(α;β) = FV(α) ∪ (FV(β) \ MBV(α)), MBV(x:=*) = {x}
  CHECK(free_vars(parse_game("x := *; ?x >= 0")) == VarSet{});
  CHECK(free_vars(parse_game("{x'=y & x<=1}")) == VarSet{"x", "y"});
  CHECK(free_vars(parse_term("5")) == VarSet{});
  CHECK(free_vars(parse_term("x + y'")) == VarSet{"x", "y'"});
  // differential term reads primed shadows
  CHECK(free_vars(parse_term("(x*y)'")) == VarSet{"x", "x'", "y", "y'"});
}

TEST_CASE("bound variables per the syntactic tables") {
  CHECK(bound_vars(parse_game("{x'=1}")) == VarSet{"x", "x'"});
  CHECK(bound_vars(parse_game("?x >= 1")) == VarSet{});
  CHECK(bound_vars(parse_game("{x := 1 ++ y := 2}^d")) == VarSet{"x", "y"});
}

TEST_CASE("must-bound variables per the syntactic tables") {
  CHECK(must_bound_vars(parse_game("x := 1 ++ y := 2")) == VarSet{});
  CHECK(must_bound_vars(parse_game("{x := 1}*")) == VarSet{});
  CHECK(must_bound_vars(parse_game("x := 1; y := 2")) == VarSet{"x", "y"});
}

TEST_CASE("plant bound variables include clocks and primes") {
  GamePtr plant = parse_game("{t'=1, x'=v, v'=a & t<=T & v>=0}");
  CHECK(bound_vars(plant) == VarSet{"t", "t'", "x", "x'", "v", "v'"});
}

TEST_CASE("renaming is a transposition") {
  FormulaPtr f = parse_formula("x >= y");
  CHECK(formula_eq(rename(f, "x", "y"), parse_formula("y >= x")));
  GamePtr g = parse_game("{x'=y}");
  CHECK(game_eq(rename(g, "x", "z"), parse_game("{z'=y}")));
}

TEST_CASE("substitution examples") {
  FormulaPtr f = parse_formula("x >= 0");
  CHECK(formula_eq(substitute(f, "x", parse_term("y+1")), parse_formula("y+1 >= 0")));

  // z occurs under a binder of x ∈ FV(x+1)
  FormulaPtr g = parse_formula("<x := 1> x >= z");
  CHECK_THROWS_AS(substitute(g, "z", parse_term("x+1")), AdmissibilityError);

  // x bound by an ODE cannot receive a substitution inside it
  FormulaPtr h = parse_formula("[{x'=f0 & x >= 0}] x >= 0");
  CHECK_THROWS_AS((void)substitute(h, "x", parse_term("g0")), AdmissibilityError);

  // substituting into the rhs of an assignment is fine (evaluated before)
  GamePtr a = parse_game("y := x + 1");
  CHECK(game_eq(substitute(a, "x", parse_term("2")), parse_game("y := 2 + 1")));
}

namespace {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(uint64_t s) : rng(s) {}
  int pick(int n) { return static_cast<int>(rng() % n); }
  std::string var() {
    static const char* names[] = {"x", "y", "z", "w"};
    return names[pick(4)];
  }
  TermPtr term(int d) {
    if (d <= 0) return pick(2) ? t_var(var()) : t_rat(Rat(pick(9), 2));
    switch (pick(7)) {
      case 0: return t_plus(term(d - 1), term(d - 1));
      case 1: return t_times(term(d - 1), term(d - 1));
      case 2: return t_min(term(d - 1), term(d - 1));
      case 3: return t_max(term(d - 1), term(d - 1));
      case 4: return t_neg(term(d - 1));
      case 5: return t_var(var());
      default: return t_rat(Rat(pick(9), 4));
    }
  }
  FormulaPtr formula(int d) {
    Rel rels[] = {Rel::Le, Rel::Lt, Rel::Eq, Rel::Ne, Rel::Gt, Rel::Ge};
    if (d <= 0) return f_cmp(term(1), rels[pick(6)], term(1));
    switch (pick(6)) {
      case 0: return f_and(formula(d - 1), formula(d - 1));
      case 1: return f_or(formula(d - 1), formula(d - 1));
      case 2: return f_imp(formula(d - 1), formula(d - 1));
      case 3: return f_diamond(game(d - 1), formula(d - 1));
      case 4: return f_box(game(d - 1), formula(d - 1));
      default: return f_cmp(term(d - 1), rels[pick(6)], term(d - 1));
    }
  }
  GamePtr game(int d) {
    if (d <= 0) {
      switch (pick(3)) {
        case 0: return g_assign(var(), term(1));
        case 1: return g_assign_any(var());
        default: return g_test(formula(0));
      }
    }
    switch (pick(8)) {
      case 0: return g_test(formula(d - 1));
      case 1: return g_assign(var(), term(d - 1));
      case 2: return g_choice(game(d - 1), game(d - 1));
      case 3: return g_seq(game(d - 1), game(d - 1));
      case 4: return g_repeat(game(d - 1));
      case 5: return g_dual(game(d - 1));
      case 6: {
        std::vector<std::pair<std::string, TermPtr>> eqs;
        eqs.emplace_back(var(), term(d - 1));
        return g_ode(std::move(eqs), formula(0));
      }
      default: return g_assign_any(var());
    }
  }
};

}  // namespace

TEST_CASE("renaming involution on random ASTs") {
  Gen gen(99);
  for (int i = 0; i < 200; ++i) {
    FormulaPtr f = gen.formula(4);
    CHECK(formula_eq(rename(rename(f, "x", "y"), "x", "y"), f));
    GamePtr g = gen.game(4);
    CHECK(game_eq(rename(rename(g, "x", "y"), "x", "y"), g));
    TermPtr t = gen.term(4);
    CHECK(term_eq(rename(rename(t, "x", "y"), "x", "y"), t));
  }
}

TEST_CASE("coincidence: states agreeing on FV(t) yield overlapping enclosures") {
  Gen gen(4242);
  for (int i = 0; i < 150; ++i) {
    TermPtr t = gen.term(4);
    VarSet fv = free_vars(t);
    State s1, s2;
    std::mt19937_64 vals(i);
    for (const auto& v : fv) {
      Rat r(static_cast<long>(vals() % 37) - 18, 4);
      s1 = s1.set(v, CReal(r));
      s2 = s2.set(v, CReal(r));
    }
    // s2 additionally disagrees wildly outside FV(t)
    s2 = s2.set("unrelated", CReal(Rat(1000)));
    for (const auto& name : {"x", "y", "z", "w"}) {
      if (!fv.count(name)) s2 = s2.set(name, CReal(Rat(static_cast<long>(vals() % 100))));
    }
    for (long k : {8L, 20L}) {
      Interval i1 = eval_term(t, s1, k);
      Interval i2 = eval_term(t, s2, k);
      CAPTURE(pretty(t));
      CHECK(i1.overlaps(i2));
    }
  }
}

TEST_CASE("substitution lemma on terms (admissible cases)") {
  Gen gen(31337);
  int done = 0;
  for (int i = 0; done < 150 && i < 1000; ++i) {
    TermPtr t = gen.term(3);
    TermPtr f = gen.term(2);
    TermPtr sub;
    try {
      sub = substitute(t, "x", f);
    } catch (const AdmissibilityError&) {
      continue;  // terms have no binders, so this cannot happen; keep the guard
    }
    ++done;
    State s;
    std::mt19937_64 vals(i * 7 + 1);
    for (const auto& v : {"x", "y", "z", "w"})
      s = s.set(v, CReal(Rat(static_cast<long>(vals() % 21) - 10, 2)));
    State s2 = s.set("x", eval_creal(f, s));
    for (long k : {10L, 24L}) {
      Interval a = eval_term(sub, s, k);
      Interval b = eval_term(t, s2, k);
      CAPTURE(pretty(t));
      CAPTURE(pretty(f));
      CHECK(a.overlaps(b));
    }
  }
  CHECK(done >= 150);
}
