#include <doctest.h>

#include "cdgl/engine.hpp"
#include "cdgl/parser.hpp"
#include "cdgl/printer.hpp"
#include "cdgl/statics.hpp"

using namespace cdgl;

namespace {

RunConfig cfg() {
  RunConfig c;
  c.precision = 40;
  return c;
}

Strategy checked_angel(const std::string& formula_text, const std::string& proof_text,
                       const CdglFile* env = nullptr) {
  FormulaPtr goal = parse_formula(formula_text, env);
  CdglFile dummy;
  dummy.formulas["goal"] = goal;
  ProofFile pf = parse_cdglp("(proves goal " + proof_text + ")", dummy);
  CheckResult r = check({}, pf.proofs[0].second, goal);
  REQUIRE(r.checked);
  return extract(goal, pf.proofs[0].second, r, "goal");
}

DemonScript trivial_script() {
  DemonScript s;
  ScriptRule zero;
  zero.kind = ScriptRule::Kind::Fixed;
  zero.fixed = Rat(0);
  ScriptRule one = zero;
  one.fixed = Rat(1);
  s.defaults["choice"] = zero;
  s.defaults["witness"] = zero;
  s.defaults["ode_duration"] = one;
  s.defaults["repeat_go"] = zero;
  return s;
}

Interval final_of(const PlayTrace& t, const std::string& var, long k = 30) {
  return t.final_state.get(var).refine(k);
}

}  // namespace

TEST_CASE("assign clause updates the state") {
  Strategy as = script_angel(trivial_script());
  Strategy ds = script_demon(trivial_script());
  PlayTrace t = play(parse_game("x := 2"), as, ds, State(), cfg());
  CHECK(final_of(t, "x").lo == Rat(2));
  CHECK(final_of(t, "x").hi == Rat(2));
}

TEST_CASE("dual routes a choice to the demon script") {
  DemonScript d = trivial_script();
  d.decisions.emplace_back("choice",
                           [] { ScriptRule r; r.kind = ScriptRule::Kind::Fixed; r.fixed = Rat(1); return r; }());
  Strategy as = script_angel(trivial_script());
  Strategy ds = script_demon(d);
  PlayTrace t = play(parse_game("{x := 1 ++ x := 2}^d"), as, ds, State(), cfg());
  CHECK(final_of(t, "x").lo == Rat(2));
}

TEST_CASE("script answering a non-dual decision is a mismatch") {
  DemonScript d = trivial_script();
  d.decisions.emplace_back("witness",
                           [] { ScriptRule r; r.kind = ScriptRule::Kind::Fixed; r.fixed = Rat(3); return r; }());
  Strategy as = script_angel(trivial_script());
  Strategy ds = script_demon(d);
  CHECK_THROWS_AS(play(parse_game("{x := 1 ++ x := 2}^d"), as, ds, State(), cfg()),
                  StrategyMismatch);
}

TEST_CASE("extracted witness strategy assigns its term") {
  Strategy as = checked_angel("<x := *> x >= 0", "(<:*>I \"0\" (:=I x0 (arith)))");
  CHECK(as.role == Role::Angel);
  Strategy ds = script_demon(trivial_script());
  PlayTrace t = play(parse_game("x := *"), as, ds, State().set("x", CReal(Rat(5))), cfg());
  CHECK(final_of(t, "x").lo == Rat(0));
  CHECK(final_of(t, "x").hi == Rat(0));
  CHECK(t.angel_post_holds);
  CHECK(t.demon_post_holds);
}

TEST_CASE("demon test consumes angel's evidence") {
  // [?x >= 0] x >= 0 — demon-side proof via [?]I; angel scripted
  FormulaPtr goal = parse_formula("[?x >= 0] x >= 0");
  CdglFile dummy;
  dummy.formulas["goal"] = goal;
  ProofFile pf = parse_cdglp("(proves goal ([?]I (hyp 0)))", dummy);
  CheckResult r = check({}, pf.proofs[0].second, goal);
  REQUIRE(r.checked);
  Strategy ds = extract(goal, pf.proofs[0].second, r);
  CHECK(ds.role == Role::Demon);
  Strategy as = script_angel(trivial_script());
  PlayTrace t = play(parse_game("?x >= 0"), as, ds, State().set("x", CReal(Rat(1))), cfg());
  CHECK(t.demon_post_holds);
}

TEST_CASE("failed test surfaces as a test failure by the responsible player") {
  Strategy as = script_angel(trivial_script());
  Strategy ds = script_demon(trivial_script());
  CHECK_THROWS_AS(play(parse_game("?x >= 1"), as, ds, State(), cfg()), TestFailed);
}

TEST_CASE("convergence strategy runs the loop until the metric is spent") {
  Strategy as = checked_angel(
      "<{x := x - 1}*> x <= 0",
      "(<*>I \"x >= 0\" \"x\" \"0\" \"1\" m0 (arith) (:=I x9 (arith)) (arith))");
  Strategy ds = script_demon(trivial_script());
  State s0 = State().set("x", CReal(Rat(3)));
  // precondition-free: invariant x >= 0 is an arith leaf over the context
  PlayTrace t = play(parse_game("{x := x - 1}*"), as, ds, s0, cfg());
  CHECK(final_of(t, "x").lo == Rat(0));
  CHECK(final_of(t, "x").hi == Rat(0));
  CHECK(t.angel_post_holds);
  // 3 go rounds + 1 stop decision
  long repeats = 0;
  for (const auto& e : t.events)
    if (e.construct == "repeat") ++repeats;
  CHECK(repeats == 4);
}

TEST_CASE("repeat cap guards against non-terminating strategies") {
  DemonScript always_go = trivial_script();
  always_go.defaults["repeat_go"].fixed = Rat(1);
  Strategy as = script_angel(always_go);
  Strategy ds = script_demon(trivial_script());
  RunConfig c = cfg();
  c.repeat_cap = 50;
  CHECK_THROWS_AS(play(parse_game("{x := x + 1}*"), as, ds, State(), c), NonTermination);
}

TEST_CASE("dual involution yields a state-identical trace") {
  DemonScript d = trivial_script();
  Strategy as1 = script_angel(d), ds1 = script_demon(d);
  Strategy as2 = script_angel(d), ds2 = script_demon(d);
  GamePtr g = parse_game("x := x + 1; y := 2*x");
  GamePtr gg = g_dual(g_dual(g));
  State s0 = State().set("x", CReal(Rat(1)));
  PlayTrace t1 = play(g, as1, ds1, s0, cfg());
  PlayTrace t2 = play(gg, as2, ds2, s0, cfg());
  for (const auto& v : {"x", "y"}) {
    Interval a = t1.final_state.get(v).refine(40);
    Interval b = t2.final_state.get(v).refine(40);
    CHECK(a.lo == b.lo);
    CHECK(a.hi == b.hi);
  }
}

TEST_CASE("ODE play with scripted demon duration") {
  // angel proof for <{x'=1 & x <= 10}> x >= 2 with duration 2 from x=0
  CdglFile env;
  FormulaPtr goal = parse_formula("<{x'=1 & x <= 10}> x >= 2");
  CdglFile dummy;
  dummy.formulas["goal"] = goal;
  ProofFile pf = parse_cdglp("(proves goal (dsolve tau \"2\" (arith) (arith) (arith)))", dummy);
  CheckResult r = check({parse_formula("x = 0")}, pf.proofs[0].second, goal);
  REQUIRE(r.checked);
  Strategy as = extract(goal, pf.proofs[0].second, r);
  Strategy ds = script_demon(trivial_script());
  PlayTrace t = play(parse_game("{x'=1 & x <= 10}"), as, ds, State(), cfg());
  CHECK(final_of(t, "x").contains(Rat(2)));
  CHECK(t.angel_post_holds);
  // primed variable carries the rhs value after evolution
  CHECK(final_of(t, "x'").contains(Rat(1)));
}

TEST_CASE("seeded scripts reproduce decisions bit-identically") {
  DemonScript d = trivial_script();
  d.seed = 42;
  d.defaults["ode_duration"].kind = ScriptRule::Kind::Uniform;
  d.defaults["ode_duration"].lo = Rat(1, 2);
  d.defaults["ode_duration"].hi = Rat(1);
  GamePtr g = parse_game("{{x'=1}}^d; {{x'=1}}^d");
  auto go = [&] {
    Strategy as = script_angel(trivial_script());
    Strategy ds = script_demon(d);
    return play(g, as, ds, State(), cfg()).to_json(40).dump();
  };
  std::string a = go(), b = go();
  CHECK(a == b);
  DemonScript d2 = d;
  d2.seed = 43;
  Strategy as = script_angel(trivial_script());
  Strategy ds = script_demon(d2);
  std::string c = play(g, as, ds, State(), cfg()).to_json(40).dump();
  CHECK(a != c);
}

TEST_CASE("bound effect at runtime: untouched variables are bit-identical") {
  GamePtr g = parse_game("x := x + 1 ++ {y := 5; x := y}");
  State s0 = State().set("x", CReal(Rat(1))).set("z", CReal(Rat(7))).set("w", CReal(Rat(9)));
  DemonScript d = trivial_script();
  Strategy as = script_angel(d), ds = script_demon(d);
  PlayTrace t = play(g, as, ds, s0, cfg());
  VarSet bv = bound_vars(desugar_game(g));
  for (const auto& [name, val] : s0.assigned()) {
    if (bv.count(name)) continue;
    Interval a = val.refine(50), b = t.final_state.get(name).refine(50);
    CHECK(a.lo == b.lo);
    CHECK(a.hi == b.hi);
  }
}

TEST_CASE("script exhaustion raises") {
  DemonScript d;  // no defaults at all
  d.decisions.emplace_back("choice",
                           [] { ScriptRule r; r.kind = ScriptRule::Kind::Fixed; r.fixed = Rat(0); return r; }());
  Strategy as = script_angel(d);
  Strategy ds = script_demon(trivial_script());
  // two choices but only one scripted decision and no default
  GamePtr g = parse_game("{x := 1 ++ x := 2}; {x := 3 ++ x := 4}");
  CHECK_THROWS_AS(play(g, as, ds, State(), cfg()), ScriptExhausted);
}

TEST_CASE("trace json shape") {
  Strategy as = script_angel(trivial_script());
  Strategy ds = script_demon(trivial_script());
  PlayTrace t = play(parse_game("x := 2"), as, ds, State(), cfg());
  nlohmann::json j = t.to_json(20);
  CHECK(j.contains("events"));
  CHECK(j.contains("final"));
  CHECK(j.contains("evidence"));
  CHECK(j["final"]["x"]["lo"] == "2");
  CHECK(j["evidence"]["angel"]["holds"] == true);
}
