#pragma once

#include "cdgl/state.hpp"
#include "cdgl/syntax.hpp"

namespace cdgl {

struct NonDifferentiable : EvalError {
  explicit NonDifferentiable(const std::string& msg) : EvalError(msg) {}
};

// Lazy evaluation of a term into a precision-on-demand real. Differential
// and tuple nodes are rejected here (differentials are handled by the ode
// module, tuples are not first-class values).
CReal eval_creal(const TermPtr& t, const State& s);

// Enclosure of width <= 2^-k containing the exact value.
Interval eval_term(const TermPtr& t, const State& s, long k);

// Decidable comparison of two terms: GT certifies f > g, LT_PLUS_EPS
// certifies f < g + eps.
CmpResult cmp_eps_terms(const TermPtr& f, const TermPtr& g, const Rat& eps, const State& s);

// Truth of a first-order formula at precision k: comparisons hold up to a
// 2^-(k+1) tolerance, decided on width-2^-(k+2) enclosures. Total and
// deterministic. Modalities and quantifiers are not evaluable here.
struct NotEvaluable : EvalError {
  explicit NotEvaluable(const std::string& msg) : EvalError(msg) {}
};
bool truth_at(const FormulaPtr& f, const State& s, long k);

}  // namespace cdgl
