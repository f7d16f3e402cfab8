#include <doctest.h>

#include "cdgl/parser.hpp"
#include "cdgl/printer.hpp"
#include "cdgl/prover.hpp"

using namespace cdgl;

namespace {

CdglFile empty_env;

ProofTermPtr proof(const std::string& sexpr) {
  ProofFile f = parse_cdglp("(proves goal " + sexpr + ")", [] {
    static CdglFile env = parse_cdgl("formula goal = true");
    return env;
  }());
  return f.proofs[0].second;
}

CheckResult check_str(const std::vector<std::string>& ctx, const std::string& prf,
                      const std::string& goal) {
  std::vector<FormulaPtr> c;
  for (const auto& s : ctx) c.push_back(parse_formula(s));
  return check(c, proof(prf), parse_formula(goal));
}

}  // namespace

TEST_CASE("hyp checks against the context") {
  CheckResult r = check_str({"x > 0"}, "(hyp 0)", "x > 0");
  CHECK(r.checked);
  CHECK(r.obligations.empty());
  CheckResult bad = check_str({"x > 0"}, "(hyp 0)", "x > 1");
  CHECK_FALSE(bad.checked);
  REQUIRE(bad.failure.has_value());
  CHECK(bad.failure->rule == RuleId::Hyp);
}

TEST_CASE("diamond test intro with dischargeable leaves") {
  CheckResult r = check_str({}, "(<?>I (arith) (arith))", "<?1 > 0> 2 > 1");
  CHECK(r.checked);
  REQUIRE(r.obligations.size() == 2);
  CHECK(r.obligations[0].verdict == ArithVerdict::Proved);
  CHECK(r.obligations[1].verdict == ArithVerdict::Proved);
}

TEST_CASE("universal instantiation with a capturing term is rejected") {
  // [:*]E instantiating z by x+1 in forall z <x:=1> x >= z captures x
  CheckResult r = check_str({"forall z <x := 1> x >= z"},
                            "([:*]E \"forall z <x := 1> x >= z\" \"x+1\" (hyp 0))",
                            "<x := 1> x >= x + 1");
  CHECK_FALSE(r.checked);
  REQUIRE(r.failure.has_value());
  CHECK(r.failure->rule == RuleId::BoxAnyE);
  CHECK(r.failure->reason.find("inadmissible") != std::string::npos);
}

TEST_CASE("witness terms may mention variables bound later in the game") {
  // the premise is an honest assignment, so there is no capture to avoid
  CheckResult r = check_str({"y >= 0"}, "(<:*>I \"y+1\" (:=I x0 (:=I y0 (arith))))",
                            "<x := *> <y := 1> x >= y");
  CHECK(r.checked);
}

TEST_CASE("rule and modality mismatch fails with a shape error") {
  CheckResult r = check_str({}, "([u]E1 \"x := 2\" (hyp 0))", "<x := 1 ++ x := 2> x >= 1");
  CHECK_FALSE(r.checked);
  REQUIRE(r.failure.has_value());
  CHECK(r.failure->rule == RuleId::BoxChoiceE1);
}

TEST_CASE("apply_rule produces the premises of the figures") {
  // [∪]I
  Sequent seq{{}, desugar(parse_formula("[x:=1 ++ x:=2] x >= 0"))};
  ProofTerm p;
  p.rule = RuleId::BoxChoiceI;
  auto prem = apply_rule(seq, p);
  REQUIRE(prem.size() == 2);
  CHECK(formula_eq(prem[0].goal, desugar(parse_formula("[x:=1] x >= 0"))));
  CHECK(formula_eq(prem[1].goal, desugar(parse_formula("[x:=2] x >= 0"))));

  // ⟨;⟩I nests modalities
  Sequent seq2{{}, desugar(parse_formula("<x:=1; y:=2> x >= 0"))};
  ProofTerm p2;
  p2.rule = RuleId::SeqI;
  auto prem2 = apply_rule(seq2, p2);
  REQUIRE(prem2.size() == 1);
  CHECK(formula_eq(prem2[0].goal, desugar(parse_formula("<x:=1> <y:=2> x >= 0"))));

  // DC adds the cut to the domain
  Sequent seq3{{}, desugar(parse_formula("[{x'=1 & x <= 5}] x >= 0"))};
  ProofTerm p3;
  p3.rule = RuleId::DC;
  p3.formulas.push_back(parse_formula("x >= 1"));
  auto prem3 = apply_rule(seq3, p3);
  REQUIRE(prem3.size() == 2);
  CHECK(formula_eq(prem3[0].goal, desugar(parse_formula("[{x'=1 & x <= 5}] x >= 1"))));
  CHECK(formula_eq(prem3[1].goal,
                   desugar(parse_formula("[{x'=1 & x <= 5 & x >= 1}] x >= 0"))));
}

TEST_CASE("oracle: basic verdicts") {
  CHECK(discharge_arith({{}, desugar(parse_formula("1 > 0"))}) == ArithVerdict::Proved);
  CHECK(discharge_arith({{}, desugar(parse_formula("x >= x + 1"))}) == ArithVerdict::Refuted);
  CHECK(discharge_arith({{}, desugar(parse_formula("x >= 1"))}) == ArithVerdict::Assumed);
  // rewriting with context equations grounds the goal
  Sequent s{{desugar(parse_formula("x = 2")), desugar(parse_formula("y = x + 1"))},
            desugar(parse_formula("y > 2"))};
  CHECK(discharge_arith(s) == ArithVerdict::Proved);
  // sqrt equalities that interval arithmetic cannot certify stay assumed
  CHECK(discharge_arith({{}, desugar(parse_formula("sqrt(2)*sqrt(2) = 2"))}) ==
        ArithVerdict::Assumed);
  // bound propagation: v >= 0, x >= 0 ⊢ min(v, x) >= 0
  Sequent b{{desugar(parse_formula("v >= 0")), desugar(parse_formula("x >= 0"))},
            desugar(parse_formula("min(v, x) >= 0"))};
  CHECK(discharge_arith(b) == ArithVerdict::Proved);
  // epsilon-comparison axiom
  CHECK(discharge_arith({{}, desugar(parse_formula("v > 8 | v < 8 + 1/16"))}) ==
        ArithVerdict::Proved);
}

TEST_CASE("assignment rule remembers the old value") {
  // x := x + 1 from x = 1 proves x = 2
  CheckResult r = check_str({"x = 1"}, "(:=I x0 (arith))", "[x := x + 1] x = 2");
  CHECK(r.checked);
  REQUIRE(r.obligations.size() == 1);
  // context after the rule: x0 = 1, x = x0 + 1 — the oracle chains both
  CHECK(r.obligations[0].verdict == ArithVerdict::Proved);
}

TEST_CASE("bsolve on a clock ODE discharges by bound propagation") {
  CheckResult r = check_str({"x >= 0"}, "(bsolve tau (arith))", "[{x'=1}] x >= 0");
  CHECK(r.checked);
  REQUIRE(r.obligations.size() == 1);
  CHECK(r.obligations[0].verdict == ArithVerdict::Proved);
}

TEST_CASE("dsolve with an explicit duration") {
  // <{x'=1 & x <= 5}> x >= 2 from x = 0, duration 2
  CheckResult r = check_str({"x = 0"},
                            "(dsolve tau \"2\" (arith) (arith) (arith))",
                            "<{x'=1 & x <= 5}> x >= 2");
  CHECK(r.checked);
  for (const auto& o : r.obligations) CHECK(o.verdict == ArithVerdict::Proved);
}

TEST_CASE("dsolve demands a nilpotent system") {
  CheckResult r = check_str({}, "(dsolve tau \"1\" (arith) (arith) (arith))",
                            "<{x'=x}> x >= 0");
  CHECK_FALSE(r.checked);
  CHECK(r.failure->reason.find("side condition") != std::string::npos);
}

TEST_CASE("DI proves nonnegativity of an integrated nonnegative rate") {
  // [{v'=a & a >= 0}] v >= 0 given v >= 0: premise 2 is
  // ∀v (a >= 0 -> [v':=a] v' >= 0)
  CheckResult r = check_str({"v >= 0"},
                            "(DI (hyp 0) ([:*]I v1 ([?]I (:=I w1 (arith)))))",
                            "[{v'=a & a >= 0}] v >= 0");
  CHECK(r.checked);
  REQUIRE(r.obligations.size() == 1);
  CHECK(r.obligations[0].verdict == ArithVerdict::Proved);
}

TEST_CASE("DI rejects non-differentiable postconditions") {
  CheckResult r = check_str({}, "(DI (arith) (arith))", "[{x'=1}] min(x, 0) >= 0");
  CHECK_FALSE(r.checked);
  CHECK(r.failure->rule == RuleId::DI);
}

TEST_CASE("loop invariant rule shapes") {
  CheckResult r = check_str({"x >= 2"},
                            "(loop \"x >= 1\" (arith) (:=I x9 (arith)) (arith))",
                            "[{x := x + 1}*] x >= 0");
  CHECK(r.checked);
  for (const auto& o : r.obligations) CHECK(o.verdict == ArithVerdict::Proved);
}

TEST_CASE("convergence rule rejects nonpositive descent margins") {
  CheckResult r = check_str(
      {"x >= 5"},
      "(<*>I \"x >= 0\" \"x\" \"0\" \"0\" m0 (hyp 0) (arith) (arith))",
      "<{x := x - 1}*> x <= 1");
  CHECK_FALSE(r.checked);
  CHECK(r.failure->reason.find("delta") != std::string::npos);
}

TEST_CASE("convergence rule builds the figure's premises") {
  Sequent seq{{desugar(parse_formula("x >= 0"))},
              desugar(parse_formula("<{x := x - 1}*> x <= 1"))};
  ProofTerm p;
  p.rule = RuleId::DiaRepI;
  p.formulas.push_back(parse_formula("x >= 0"));
  p.terms.push_back(parse_term("x"));
  p.terms.push_back(parse_term("0"));
  p.terms.push_back(parse_term("1/2"));
  p.names.push_back("m0");
  auto prem = apply_rule(seq, p);
  REQUIRE(prem.size() == 3);
  // A: Γ ⊢ φ̄
  CHECK(formula_eq(prem[0].goal, desugar(parse_formula("x >= 0"))));
  // B: [φ̄, M ≻ 0 ∧ m0 = M] ⊢ <α>(φ̄ ∧ m0 ≻ M)
  REQUIRE(prem[1].ctx.size() == 2);
  CHECK(formula_eq(prem[1].ctx[1], desugar(parse_formula("x >= 0 + 1/2 & m0 = x"))));
  CHECK(formula_eq(prem[1].goal,
                   desugar(parse_formula("<x := x - 1> (x >= 0 & m0 >= x + 1/2)"))));
  // C: [φ̄, 0 ≽ M] ⊢ φ
  REQUIRE(prem[2].ctx.size() == 2);
  CHECK(formula_eq(prem[2].ctx[1], desugar(parse_formula("0 >= x"))));
}

TEST_CASE("monotonicity renames bound variables of the game in the context") {
  Sequent seq{{desugar(parse_formula("x >= 5"))},
              desugar(parse_formula("<x := 1> x >= 0"))};
  ProofTerm p;
  p.rule = RuleId::Mon;
  p.formulas.push_back(parse_formula("x = 1"));
  auto prem = apply_rule(seq, p);
  REQUIRE(prem.size() == 2);
  CHECK(formula_eq(prem[0].goal, desugar(parse_formula("<x := 1> x = 1"))));
  // second premise context: renamed hypothesis + φ
  REQUIRE(prem[1].ctx.size() == 2);
  CHECK(formula_eq(prem[1].ctx[0], desugar(parse_formula("x1 >= 5"))));
  CHECK(formula_eq(prem[1].ctx[1], desugar(parse_formula("x = 1"))));
  CHECK(formula_eq(prem[1].goal, desugar(parse_formula("x >= 0"))));
}

TEST_CASE("GV requires a constant postcondition") {
  CheckResult ok = check_str({"c > 0"}, "(GV \"true\" (hyp 0) (<?>I (arith) (arith)))",
                             "<?1 > 0> c > 0");
  CHECK(ok.checked);
  CheckResult bad = check_str({"x > 0"}, "(GV \"true\" (hyp 0) (arith))",
                              "<x := 1> x > 0");
  CHECK_FALSE(bad.checked);
  CHECK(bad.failure->rule == RuleId::GV);
}

TEST_CASE("freshness violations are rejected") {
  // y already occurs in the sequent
  CheckResult r = check_str({"y > 0"}, "(:=I y (arith))", "[x := 1] x = 1");
  CHECK_FALSE(r.checked);
  CHECK(r.failure->reason.find("not fresh") != std::string::npos);
}

TEST_CASE("rule table is exactly the calculus") {
  auto t = rule_table();
  CHECK(t.size() == 37);
  // spot checks
  CHECK(rule_from_name("<*>I").has_value());
  CHECK(rule_from_name("bsolve").has_value());
  CHECK(rule_from_name("GV").has_value());
  CHECK_FALSE(rule_from_name("cut").has_value());
  CHECK_FALSE(rule_from_name("K").has_value());
}

TEST_CASE("dual introduction flips the modality") {
  CheckResult r = check_str({}, "(^dI ([?]I (arith)))", "<{?x > 0}^d> x > 0");
  CHECK(r.checked);
  REQUIRE(r.obligations.size() == 1);
  // hypothesis x > 0 proves goal x > 0 — via oracle with context
  CHECK(r.obligations[0].verdict == ArithVerdict::Proved);
}
