#include <doctest.h>

#include <random>

#include "cdgl/ode.hpp"
#include "cdgl/parser.hpp"
#include "cdgl/printer.hpp"

using namespace cdgl;

namespace {

ODESystem sys_of(const std::string& text) {
  return ODESystem::from_game(parse_game(text));
}

// Rational lower/upper bounds for e = sum 1/n!, remainder bound 2/(n+1)!.
Interval e_enclosure() {
  Rat s(0), fact(1);
  for (long n = 0; n <= 25; ++n) {
    if (n > 0) fact *= n;
    s += Rat(1) / fact;
  }
  Rat rem = Rat(2) / (fact * 26);
  return Interval(s, s + rem);
}

// Taylor series for sin(1) with alternating-series remainder.
Interval sin1_enclosure() {
  Rat s(0), fact(1);
  for (long n = 1; n <= 19; n += 2) {
    // fact = n!
    Rat term;
    Rat f(1);
    for (long i = 2; i <= n; ++i) f *= i;
    term = Rat(1) / f;
    if (((n - 1) / 2) % 2 == 0) s += term; else s -= term;
  }
  Rat f21(1);
  for (long i = 2; i <= 21; ++i) f21 *= i;
  return Interval(s - Rat(1) / f21, s + Rat(1) / f21);
}

}  // namespace

TEST_CASE("nilpotent solve of the double integrator") {
  SymbolicSolution sol = solve_nilpotent(sys_of("{t'=1, x'=v, v'=a}"));
  // v(s) = v + a s ; x(s) = x + v s + a s^2 / 2 ; t(s) = t + s
  TermPtr s_half = parse_term("1/2");
  CHECK(pretty(sol.value_term("t", t_var("s"))) == "t + s");
  CHECK(pretty(sol.value_term("v", t_var("s"))) == "v + a*s");
  // exact structural check via evaluation at a sample point
  State st;
  st = st.set("x", CReal(Rat(3))).set("v", CReal(Rat(2))).set("a", CReal(Rat(1, 2)));
  TermPtr xs = sol.value_term("x", parse_term("2"));  // x + 2v + a*2
  Interval iv = eval_term(xs, st, 30);
  CHECK(iv.contains(Rat(3) + Rat(4) + Rat(1)));
  CHECK(iv.width() == Rat(0));
}

TEST_CASE("nilpotent solve of constant and self-dependent systems") {
  SymbolicSolution sol = solve_nilpotent(sys_of("{x'=0}"));
  CHECK(pretty(sol.value_term("x", t_var("s"))) == "x");
  CHECK_THROWS_AS(solve_nilpotent(sys_of("{x'=x}")), NotNilpotent);
}

TEST_CASE("picard on x'=x reaches e at k=20") {
  State s0;
  s0 = s0.set("x", CReal(Rat(1)));
  SampledSolution sol = picard_solve(sys_of("{x'=x}"), s0, Rat(1), 20);
  Interval at1 = sol.sample_interval("x", Rat(1), 20);
  Interval e = e_enclosure();
  CHECK(at1.width() <= pow2(-20));
  CHECK(at1.overlaps(e));
  // tighter: the enclosure must contain the true value
  CHECK(at1.lo <= e.hi);
  CHECK(at1.hi >= e.lo);
}

TEST_CASE("picard on a constant system is exact-ish") {
  State s0;
  s0 = s0.set("x", CReal(Rat(5, 3)));
  SampledSolution sol = picard_solve(sys_of("{x'=0}"), s0, Rat(7, 2), 30);
  Interval v = sol.sample_interval("x", Rat(3), 30);
  CHECK(v.contains(Rat(5, 3)));
  CHECK(v.width() <= pow2(-30));
}

TEST_CASE("picard on the oscillator hits sin(1)") {
  State s0;
  s0 = s0.set("x", CReal(Rat(0))).set("v", CReal(Rat(1)));
  SampledSolution sol = picard_solve(sys_of("{x'=v, v'=-x}"), s0, Rat(1), 20);
  Interval at1 = sol.sample_interval("x", Rat(1), 20);
  Interval sin1 = sin1_enclosure();
  CHECK(at1.width() <= pow2(-20));
  CHECK(at1.overlaps(sin1));
}

TEST_CASE("picard agrees with closed form on random nilpotent systems") {
  std::mt19937_64 rng(2718);
  for (int trial = 0; trial < 4; ++trial) {
    // strictly triangular quadratic rhs over x,y,z is always nilpotent
    auto lit = [&] { return t_rat(Rat(static_cast<long>(rng() % 9) - 4, 2)); };
    std::vector<std::pair<std::string, TermPtr>> eqs;
    eqs.emplace_back("x", t_plus(lit(), t_times(lit(), t_times(t_var("y"), t_var("z")))));
    eqs.emplace_back("y", t_plus(lit(), t_times(lit(), t_var("z"))));
    eqs.emplace_back("z", lit());
    ODESystem sys{eqs, f_true()};
    SymbolicSolution closed = solve_nilpotent(sys);

    State s0;
    s0 = s0.set("x", CReal(Rat(1, 4))).set("y", CReal(Rat(-1, 2))).set("z", CReal(Rat(1)));
    SampledSolution num = picard_solve(sys, s0, Rat(1), 20);

    for (long j = 0; j <= 8; ++j) {
      Rat t = Rat(j) / 8;
      for (const auto& v : {"x", "y", "z"}) {
        Interval approx = num.sample_interval(v, t, 20);
        Interval exact = eval_term(closed.value_term(v, t_rat(t)), s0, 30);
        CAPTURE(v);
        CAPTURE(j);
        CHECK(approx.overlaps(exact));
        CHECK(approx.width() <= pow2(-20));
      }
    }
  }
}

TEST_CASE("check_solves accepts the exact solution and rejects a fake") {
  ODESystem sys = sys_of("{t'=1, x'=2*t}");
  State s;  // t=0, x=0
  // sol(r) = (r, r^2): symbolic solution with concrete coefficients
  SymbolicSolution good;
  good.time_var = "$t";
  good.coeffs["t"] = {Poly(), Poly::constant(Rat(1))};
  good.coeffs["x"] = {Poly(), Poly(), Poly::constant(Rat(1))};
  CHECK(check_solves(good, s, Rat(1), sys));

  SymbolicSolution bad;  // x(r) = r^3
  bad.time_var = "$t";
  bad.coeffs["t"] = {Poly(), Poly::constant(Rat(1))};
  bad.coeffs["x"] = {Poly(), Poly(), Poly(), Poly::constant(Rat(1))};
  CHECK_FALSE(check_solves(bad, s, Rat(1), sys));

  // duration-0 solution equal to s is vacuously fine
  CHECK(check_solves(good, s, Rat(0), sys));
}

TEST_CASE("check_solves prefix closure") {
  ODESystem sys = sys_of("{x'=x}");
  State s0;
  s0 = s0.set("x", CReal(Rat(1)));
  SampledSolution sol = picard_solve(sys, s0, Rat(1), 16);
  SolvesOptions opt;
  opt.grid = 16;
  opt.tol = Rat(1, 1 << 10);
  CHECK(check_solves(sol, s0, Rat(1), sys, opt));
  CHECK(check_solves(sol, s0, Rat(1, 2), sys, opt));
  CHECK(check_solves(sol, s0, Rat(1, 4), sys, opt));
}

TEST_CASE("differential_eval by symbolic rules") {
  State s;
  s = s.set("x", CReal(Rat(3))).set("x'", CReal(Rat(2)));
  // (x^2)' at x=3, x'=2 -> 12
  Interval iv = differential_eval(parse_term("x*x"), s, 20);
  CHECK(iv.contains(Rat(12)));
  CHECK(iv.width() <= pow2(-20));

  State s2;
  s2 = s2.set("x'", CReal(Rat(1))).set("y'", CReal(Rat(2)));
  Interval iv2 = differential_eval(parse_term("x+y"), s2, 20);
  CHECK(iv2.contains(Rat(3)));

  CHECK_THROWS_AS(differential_eval(parse_term("min(x,y)"), s, 10), NonDifferentiable);
}

TEST_CASE("differential lemma along a nilpotent flow") {
  // Along {t'=1, x'=v, v'=a}: (g)' at Sol(t) equals d/dt g(Sol(t)).
  ODESystem sys = sys_of("{t'=1, x'=v, v'=a}");
  SymbolicSolution sol = solve_nilpotent(sys);
  State s0;
  s0 = s0.set("x", CReal(Rat(1))).set("v", CReal(Rat(2))).set("a", CReal(Rat(-1, 2)));
  TermPtr g = parse_term("x*x + v");  // FV(g) ⊆ ODE vars

  for (long j = 1; j <= 4; ++j) {
    Rat t = Rat(j, 4);
    // state at time t with primed values filled in
    State st = s0;
    for (const auto& [x, f] : sys.equations)
      st = st.set(x, eval_creal(sol.value_term(x, t_rat(t)), s0));
    State base = st;
    for (const auto& [x, f] : sys.equations) st = st.set(x + "'", eval_creal(f, base));

    Interval lhs = differential_eval(g, st, 24);

    // finite difference of g∘Sol at t
    Rat h(1, 1 << 14);
    State stp = s0, stm = s0;
    for (const auto& [x, f] : sys.equations) {
      stp = stp.set(x, eval_creal(sol.value_term(x, t_rat(t + h)), s0));
      stm = stm.set(x, eval_creal(sol.value_term(x, t_rat(t - h)), s0));
    }
    CReal fd = (eval_creal(g, stp) - eval_creal(g, stm)) / CReal(h * 2);
    Interval rhs = fd.refine(24);
    // central difference error is O(h^2)
    CHECK(lhs.lo - rhs.hi <= Rat(1, 1 << 20));
    CHECK(rhs.lo - lhs.hi <= Rat(1, 1 << 20));
  }
}

TEST_CASE("formula differential shapes") {
  FormulaPtr ge = formula_differential(parse_formula("x >= 0"));
  CHECK(pretty(ge) == "x' >= 0");
  FormulaPtr conj = formula_differential(parse_formula("x >= 0 & v = t"));
  CHECK(conj->kind == Formula::Kind::And);
  CHECK_THROWS_AS(formula_differential(parse_formula("x != 0")), NonDifferentiable);
  CHECK_THROWS_AS(formula_differential(parse_formula("min(x,y) >= 0")), NonDifferentiable);
}

TEST_CASE("lipschitz failure surfaces for boxes through sqrt of zero") {
  State s0;
  s0 = s0.set("x", CReal(Rat(0)));
  CHECK_THROWS_AS(picard_solve(sys_of("{x'=sqrt(x)}"), s0, Rat(1), 8), LipschitzBoundFailure);
}
