#pragma once

#include <map>
#include <optional>
#include <vector>

#include "cdgl/eval.hpp"
#include "cdgl/state.hpp"
#include "cdgl/syntax.hpp"

namespace cdgl {

struct NotNilpotent : std::runtime_error {
  explicit NotNilpotent(const std::string& msg) : std::runtime_error(msg) {}
};
struct LipschitzBoundFailure : std::runtime_error {
  explicit LipschitzBoundFailure(const std::string& msg) : std::runtime_error(msg) {}
};

// Explicit-form ODE system x1'=f1, ..., xn'=fn & domain.
struct ODESystem {
  std::vector<std::pair<std::string, TermPtr>> equations;
  FormulaPtr domain;

  static ODESystem from_game(const GamePtr& ode);
  // Explicit form: no primed variables in right-hand sides or domain,
  // variables distinct. Throws std::invalid_argument otherwise.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Sparse multivariate polynomials over Rat, used for closed-form solutions
// and exact solution checking.
// ---------------------------------------------------------------------------
class Poly {
 public:
  using Monomial = std::map<std::string, unsigned>;

  Poly() = default;
  static Poly constant(const Rat& c);
  static Poly variable(const std::string& x);
  // Fails (nullopt) on non-polynomial structure (sqrt, min, max, division
  // by a non-constant, differentials, tuples, primed variables).
  static std::optional<Poly> from_term(const TermPtr& t);

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly scale(const Rat& c) const;
  Poly partial(const std::string& x) const;
  Poly subst(const std::map<std::string, Poly>& m) const;

  bool is_zero() const { return coeffs_.empty(); }
  unsigned degree() const;
  TermPtr to_term() const;
  bool operator==(const Poly& o) const { return coeffs_ == o.coeffs_; }

 private:
  std::map<Monomial, Rat> coeffs_;  // invariant: no zero coefficients
  void add_monomial(const Monomial& m, const Rat& c);
};

// Exact polynomial solution of a nilpotent system: for each variable a
// polynomial in a fresh time symbol whose coefficients are polynomials
// over the initial state.
struct SymbolicSolution {
  std::string time_var;
  // var -> coefficients c_0..c_m (value = sum c_n * time^n); each c_n is a
  // polynomial over the initial values of the state variables.
  std::map<std::string, std::vector<Poly>> coeffs;

  // Value term for `var` at the given time term, over initial-state vars.
  TermPtr value_term(const std::string& var, const TermPtr& time) const;
  unsigned degree() const;
};

// Repeated symbolic differentiation; NotNilpotent when it does not reach
// zero within the iteration bound (or the rhs is not polynomial).
SymbolicSolution solve_nilpotent(const ODESystem& sys);

// ---------------------------------------------------------------------------
// Validated solution enclosures from constructive Picard iteration
// (Taylor-form iterates with an a-priori box and explicit contraction-rate
// subdivision L*d/N <= 1/2).
// ---------------------------------------------------------------------------
class SampledSolution {
 public:
  SampledSolution(ODESystem sys, State s0, Rat d, long k);

  const Rat& duration() const { return d_; }
  long precision() const { return k_; }
  Rat error_bound() const { return pow2(-k_); }

  // Enclosure of var at time t (0 <= t <= d) with width <= ~2^-k.
  Interval sample_interval(const std::string& var, const Rat& t, long k) const;
  // State at time t whose values refine on demand by re-running the
  // integrator at higher precision. Primed variables carry the rhs values.
  State sample(const Rat& t) const;

  const ODESystem& system() const { return sys_; }

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
  ODESystem sys_;
  State s0_;
  Rat d_;
  long k_;
};

SampledSolution picard_solve(const ODESystem& sys, const State& s0, const Rat& d, long k);

// ---------------------------------------------------------------------------
// The `solves` predicate, checkable.
// ---------------------------------------------------------------------------
struct SolvesOptions {
  long grid = 128;           // interior sample count
  long fd_shift = 16;        // finite-difference step 2^-fd_shift * d
  Rat tol = Rat(1, 1 << 20); // comparison tolerance
};

// Exact check by symbolic differentiation: d/dt sol = rhs∘sol and sol(0)
// is the initial state. Requires polynomial right-hand sides for the
// composition; falls back to the sampled check otherwise.
bool check_solves(const SymbolicSolution& sol, const State& s, const Rat& d,
                  const ODESystem& sys, const SolvesOptions& opt = {});

// Sampled check: initial value within tolerance and finite-difference
// derivative matches the rhs at every grid point.
bool check_solves(const SampledSolution& sol, const State& s, const Rat& d,
                  const ODESystem& sys, const SolvesOptions& opt = {});

// ---------------------------------------------------------------------------
// Differential terms.
// ---------------------------------------------------------------------------

// Syntactic partial derivative d t / d x (x a base variable); primed
// variables are independent coordinates. NonDifferentiable on min/max,
// tuples, or nested differentials.
TermPtr symbolic_partial(const TermPtr& t, const std::string& x);

// Total differential: sum over base vars of (dt/dx) * x'.
TermPtr total_differential(const TermPtr& t);

// Expand every (f)' node in a term/formula into its total differential.
TermPtr expand_differentials(const TermPtr& t);

// Differential formula (φ)' for shapes =, >=, >, <=, <, ∧, ∨ (with the
// strict forms keeping strictness); other shapes are NonDifferentiable.
FormulaPtr formula_differential(const FormulaPtr& f);

// Evaluate (t)' at s: total differential with the primed variables read
// from s. Enclosure of width <= 2^-k.
Interval differential_eval(const TermPtr& t, const State& s, long k);

}  // namespace cdgl
