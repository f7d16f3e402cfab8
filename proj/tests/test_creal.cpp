#include <doctest.h>

#include <random>
#include <thread>

#include "cdgl/eval.hpp"
#include "cdgl/parser.hpp"
#include "cdgl/state.hpp"

using namespace cdgl;

TEST_CASE("exact rational arithmetic gives point intervals") {
  State s;
  TermPtr t = parse_term("(1+2)*3");
  Interval iv = eval_term(t, s, 0);
  CHECK(iv.lo == Rat(9));
  CHECK(iv.hi == Rat(9));
  iv = eval_term(t, s, 60);
  CHECK(iv.lo == Rat(9));
  CHECK(iv.hi == Rat(9));
}

TEST_CASE("min of close rationals matches the rational order") {
  State s;
  // 1/3 < 0.34
  TermPtr t = parse_term("min(1/3, 0.34)");
  Interval iv = eval_term(t, s, 20);
  Rat third(1, 3);
  CHECK(iv.contains(third));
  CHECK(iv.width() <= pow2(-20));
}

TEST_CASE("min(x,x) with irrational x terminates at every precision") {
  State s;
  s = s.set("x", eval_creal(parse_term("sqrt(2)"), State()));
  TermPtr t = parse_term("min(x, x)");
  for (long k : {4, 10, 20, 40, 80}) {
    Interval iv = eval_term(t, s, k);
    CHECK(iv.width() <= pow2(-k));
    // contains sqrt(2): check by squaring endpoints
    CHECK(iv.lo * iv.lo <= Rat(2));
    CHECK(iv.hi * iv.hi >= Rat(2));
  }
}

TEST_CASE("refinements are nested and width-bounded") {
  State s;
  CReal x = eval_creal(parse_term("sqrt(2) + 1/3 * sqrt(5)"), s);
  Interval prev = x.refine(0);
  for (long k = 1; k <= 64; ++k) {
    Interval iv = x.refine(k);
    CHECK(prev.contains(iv));
    CHECK(iv.width() <= pow2(-k));
    prev = iv;
  }
}

TEST_CASE("sqrt(2) at precision 4 has width <= 1/16") {
  Interval iv = eval_term(parse_term("sqrt(2)"), State(), 4);
  CHECK(iv.width() <= Rat(1, 16));
  // interval-Newton style oracle: endpoints squared straddle 2
  CHECK(iv.lo * iv.lo <= Rat(2));
  CHECK(iv.hi * iv.hi >= Rat(2));
}

TEST_CASE("refine of a rational point is exact") {
  Interval iv = eval_term(parse_term("1/2"), State(), 10);
  CHECK(iv.lo == Rat(1, 2));
  CHECK(iv.hi == Rat(1, 2));
}

TEST_CASE("cmp_eps basic verdicts") {
  State s;
  CHECK(cmp_eps_terms(parse_term("1"), parse_term("0"), Rat(1, 2), s) == CmpResult::GT);
  CHECK(cmp_eps_terms(parse_term("0"), parse_term("0"), Rat(1, 2), s) == CmpResult::LT_PLUS_EPS);
  // sqrt(2) > 1.41421356 since 2 > 1.41421356^2
  CHECK(cmp_eps_terms(parse_term("sqrt(2)"), parse_term("1.41421356"), Rat(1, 1000000), s) ==
        CmpResult::GT);
}

TEST_CASE("cmp_eps terminates on syntactically equal irrationals") {
  State s;
  CHECK(cmp_eps_terms(parse_term("sqrt(2)"), parse_term("sqrt(2)"), Rat(1, 1024), s) ==
        CmpResult::LT_PLUS_EPS);
}

TEST_CASE("division near zero raises after bounded effort") {
  State s;
  TermPtr t = parse_term("1 / (sqrt(2)*sqrt(2) - 2)");
  CHECK_THROWS_AS(eval_term(t, s, 10), DivisionNearZero);
}

TEST_CASE("sqrt of certainly negative raises") {
  CHECK_THROWS_AS(eval_term(parse_term("sqrt(0 - 1)"), State(), 5), SqrtOfNegative);
}

TEST_CASE("sqrt of exact zero is total") {
  Interval iv = eval_term(parse_term("sqrt(sqrt(2)*sqrt(2) - 2)"), State(), 12);
  CHECK(iv.width() <= pow2(-12));
  CHECK(iv.contains(Rat(0)));
}

TEST_CASE("state getter/setter axioms") {
  State s;
  CReal v = eval_creal(parse_term("sqrt(3)"), State());
  State s2 = s.set("x", v);
  CHECK(s2.get("x").refine(20).contains(s.set("x", v).get("x").refine(20)));
  // get(set(s,x,v), y) == get(s, y) for y != x
  State s3 = s2.set("y", CReal(Rat(7)));
  Interval iy = s3.get("x").refine(30);
  Interval ix = s2.get("x").refine(30);
  CHECK(iy.overlaps(ix));
  CHECK(s.get("z").refine(5).lo == Rat(0));
  CHECK(s.get("z").refine(5).hi == Rat(0));
  // persistence: the original state is unchanged
  CHECK(s.get("x").refine(5).lo == Rat(0));
}

TEST_CASE("fuzz: eval interval always contains the exact rational value") {
  std::mt19937_64 rng(12345);
  State s = State().set("u", CReal(Rat(3, 7))).set("w", CReal(Rat(-2, 5)));
  std::map<std::string, Rat> env{{"u", Rat(3, 7)}, {"w", Rat(-2, 5)}};

  // rational-only term trees with a side-by-side rational interpreter
  struct Gen {
    std::mt19937_64& rng;
    std::map<std::string, Rat>& env;
    std::pair<TermPtr, Rat> gen(int depth) {
      std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 6);
      switch (pick(rng)) {
        case 0: {
          std::uniform_int_distribution<long> lit(0, 20);
          long n = lit(rng);
          return {t_rat(Rat(n, 4)), Rat(n, 4)};
        }
        case 1: {
          bool u = rng() & 1;
          return {t_var(u ? "u" : "w"), env[u ? "u" : "w"]};
        }
        case 2: {
          auto [a, va] = gen(depth - 1);
          auto [b, vb] = gen(depth - 1);
          return {t_plus(a, b), va + vb};
        }
        case 3: {
          auto [a, va] = gen(depth - 1);
          auto [b, vb] = gen(depth - 1);
          return {t_times(a, b), va * vb};
        }
        case 4: {
          auto [a, va] = gen(depth - 1);
          return {t_neg(a), -va};
        }
        case 5: {
          auto [a, va] = gen(depth - 1);
          auto [b, vb] = gen(depth - 1);
          return {t_min(a, b), std::min(va, vb)};
        }
        default: {
          auto [a, va] = gen(depth - 1);
          auto [b, vb] = gen(depth - 1);
          return {t_max(a, b), std::max(va, vb)};
        }
      }
    }
  } gen{rng, env};

  for (int i = 0; i < 300; ++i) {
    auto [t, v] = gen.gen(4);
    Interval iv = eval_term(t, s, 24);
    CHECK(iv.contains(v));
    CHECK(iv.width() <= pow2(-24));
  }
}

TEST_CASE("concurrent refinement of a shared value is safe") {
  CReal x = eval_creal(parse_term("sqrt(2) * sqrt(3) + 1/7"), State());
  std::vector<std::thread> threads;
  std::atomic<bool> ok{true};
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&x, &ok, i] {
      for (long k = 1; k <= 40; ++k) {
        Interval iv = x.refine(k + (i % 3));
        if (iv.width() > pow2(-k)) ok = false;
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(ok.load());
}
