#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cdgl/ode.hpp"
#include "cdgl/syntax.hpp"

namespace cdgl {

// ---------------------------------------------------------------------------
// Rules. Exactly the natural-deduction calculus: propositional game rules,
// first-order game rules, loop rules, ODE rules, plus the derived rule GV,
// hypothesis references, and first-order oracle leaves.
// ---------------------------------------------------------------------------
enum class RuleId {
  // propositional
  BoxChoiceI, BoxChoiceE1, BoxChoiceE2,
  DiaChoiceI1, DiaChoiceI2, DiaChoiceE,
  DiaTestI, DiaTestE1, DiaTestE2,
  BoxTestI, BoxTestE,
  Hyp,
  // first-order
  BoxAnyI, BoxAnyE, DiaAnyI, DiaAnyE,
  SeqI, AssignI, Mon, DualI,
  // loops
  DiaRepE, BoxRepE, DiaRepS, BoxRepR, DiaRepG, Loop, FP, DiaRepI,
  // ODEs
  DI, DC, DW, DG, DV, BSolve, DSolve,
  // derived + leaves
  GV, Arith,
};

const char* rule_name(RuleId r);
std::optional<RuleId> rule_from_name(const std::string& name);
std::vector<RuleId> rule_table();

struct ProofTerm;
using ProofTermPtr = std::shared_ptr<const ProofTerm>;

// Rule application with positional payloads; the payload shapes per rule
// are documented in the proof-file grammar (docs in README / proof parser).
struct ProofTerm {
  RuleId rule;
  long index = -1;                    // hyp
  std::vector<std::string> names;     // fresh variables
  std::vector<TermPtr> terms;         // witnesses, metrics, margins, ...
  std::vector<FormulaPtr> formulas;   // invariants, cut/elimination payloads
  std::vector<GamePtr> games;         // choice-elimination payloads
  std::vector<ProofTermPtr> children;
  std::string label;                  // arith leaf name
};

ProofTermPtr mk_proof(ProofTerm p);

struct Sequent {
  std::vector<FormulaPtr> ctx;  // desugared
  FormulaPtr goal;              // desugared
};

struct RuleError : std::runtime_error {
  explicit RuleError(const std::string& msg) : std::runtime_error(msg) {}
};

// Premise sequents of one backward rule application, exactly as the
// calculus specifies (renamings computed via transposition renaming).
// Hyp and Arith have no premises. Throws RuleError on any violated side
// condition (shape mismatch, freshness, admissibility, ...).
std::vector<Sequent> apply_rule(const Sequent& seq, const ProofTerm& rule);

enum class ArithVerdict { Proved, Assumed, Refuted };

// Pluggable first-order oracle: exact rational/interval certification on
// ground goals (after rewriting with context equations), syntactic
// reflexivity, polynomial normalization, interval bound propagation from
// context comparisons, and the decidable epsilon-comparison axiom
// f > g ∨ f < g + eps. Anything else is Assumed.
ArithVerdict discharge_arith(const Sequent& seq);

struct Obligation {
  Sequent seq;
  ArithVerdict verdict;
  std::string label;
  std::string path;
};

struct CheckFailure {
  RuleId rule;
  std::string reason;
  std::string path;
};

struct CheckResult {
  bool checked = false;
  std::optional<CheckFailure> failure;
  std::vector<Obligation> obligations;  // all arith leaves, incl. proved ones

  long assumed_count() const {
    long n = 0;
    for (const auto& o : obligations)
      if (o.verdict == ArithVerdict::Assumed) ++n;
    return n;
  }
};

// Check proof term M against Γ ⊢ φ. Context and goal are desugared first.
CheckResult check(const std::vector<FormulaPtr>& ctx, const ProofTermPtr& M,
                  const FormulaPtr& phi);

// ---------------------------------------------------------------------------
// Proof files: s-expression trees bound to named formulas, e.g.
//   (proves reachAvoid (<*>I "inv" "g-x" "0" "1/32" m0 (arith) (...) (arith)))
// Quoted strings hold terms/formulas/games in the concrete syntax; bare
// atoms are variable names; integers are hypothesis indices.
// ---------------------------------------------------------------------------
struct ProofFile {
  std::vector<std::pair<std::string, ProofTermPtr>> proofs;  // formula name -> proof
};

ProofFile parse_cdglp(const std::string& text, const CdglFile& env);

// One-line rendering of a proof term (rule names with child counts).
std::string proof_summary(const ProofTermPtr& p);

}  // namespace cdgl
