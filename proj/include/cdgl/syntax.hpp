#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cdgl/rational.hpp"

namespace cdgl {

struct Term;
struct Game;
struct Formula;
using TermPtr = std::shared_ptr<const Term>;
using GamePtr = std::shared_ptr<const Game>;
using FormulaPtr = std::shared_ptr<const Formula>;

// ---------------------------------------------------------------------------
// Terms. Rational literals are nonnegative with decimal denominators
// (2^a 5^b); other rationals are spelled with Div/Neg, so printing and
// reparsing is structure-preserving.
// ---------------------------------------------------------------------------
struct Term {
  enum class Kind {
    Rational, Var, PrimedVar,
    Plus, Times, Div, Min, Max, Neg, Sqrt, Differential, Tuple,
  };
  Kind kind;
  Rat value;                  // Rational
  std::string name;           // Var / PrimedVar (base name, no prime)
  std::vector<TermPtr> args;  // operator arguments / tuple entries
};

TermPtr t_rat(const Rat& r);
TermPtr t_int(long n);  // handles negatives via Neg
TermPtr t_var(const std::string& name);
TermPtr t_primed(const std::string& name);
TermPtr t_plus(TermPtr a, TermPtr b);
TermPtr t_minus(TermPtr a, TermPtr b);
TermPtr t_times(TermPtr a, TermPtr b);
TermPtr t_div(TermPtr a, TermPtr b);
TermPtr t_min(TermPtr a, TermPtr b);
TermPtr t_max(TermPtr a, TermPtr b);
TermPtr t_neg(TermPtr a);
TermPtr t_sqrt(TermPtr a);
TermPtr t_differential(TermPtr a);
TermPtr t_tuple(std::vector<TermPtr> items);

// ---------------------------------------------------------------------------
// Games. DChoice and DRepeat are sugar (defined through duals).
// ---------------------------------------------------------------------------
struct Game {
  enum class Kind {
    Test, Assign, AssignAny, ODE, Choice, Seq, Repeat, Dual,
    DChoice, DRepeat,  // sugar
  };
  Kind kind;
  FormulaPtr fml;                                         // Test
  std::string var;                                        // Assign / AssignAny
  TermPtr term;                                           // Assign rhs
  std::vector<std::pair<std::string, TermPtr>> equations; // ODE: (var, rhs)
  FormulaPtr domain;                                      // ODE constraint
  GamePtr left, right;                                    // binary / unary (left)
};

GamePtr g_test(FormulaPtr f);
GamePtr g_assign(const std::string& x, TermPtr t);
GamePtr g_assign_any(const std::string& x);
GamePtr g_ode(std::vector<std::pair<std::string, TermPtr>> eqs, FormulaPtr domain);
GamePtr g_choice(GamePtr a, GamePtr b);
GamePtr g_dchoice(GamePtr a, GamePtr b);
GamePtr g_seq(GamePtr a, GamePtr b);
GamePtr g_repeat(GamePtr a);
GamePtr g_drepeat(GamePtr a);
GamePtr g_dual(GamePtr a);

// ---------------------------------------------------------------------------
// Formulas. Core: Diamond, Box, Cmp. The rest is sugar eliminated by
// desugar().
// ---------------------------------------------------------------------------
enum class Rel { Le, Lt, Eq, Ne, Gt, Ge };

struct Formula {
  enum class Kind {
    Diamond, Box, Cmp,
    True, False, And, Or, Imp, Iff, Not, Forall, Exists,  // sugar
  };
  Kind kind;
  GamePtr game;            // Diamond / Box
  FormulaPtr sub, sub2;    // unary / binary connectives; Diamond/Box body in sub
  TermPtr lhs, rhs;        // Cmp
  Rel rel = Rel::Eq;       // Cmp
  std::string var;         // Forall / Exists
};

FormulaPtr f_diamond(GamePtr g, FormulaPtr f);
FormulaPtr f_box(GamePtr g, FormulaPtr f);
FormulaPtr f_cmp(TermPtr l, Rel r, TermPtr rr);
FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr f_and(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr f_imp(FormulaPtr a, FormulaPtr b);
FormulaPtr f_iff(FormulaPtr a, FormulaPtr b);
FormulaPtr f_not(FormulaPtr a);
FormulaPtr f_forall(const std::string& x, FormulaPtr a);
FormulaPtr f_exists(const std::string& x, FormulaPtr a);

// Structural equality.
bool term_eq(const TermPtr& a, const TermPtr& b);
bool game_eq(const GamePtr& a, const GamePtr& b);
bool formula_eq(const FormulaPtr& a, const FormulaPtr& b);

// Eliminate sugar; idempotent; output uses only Diamond/Box/Cmp and the
// eight core game constructors.
FormulaPtr desugar(const FormulaPtr& f);
GamePtr desugar_game(const GamePtr& g);
bool is_core(const FormulaPtr& f);

// ---------------------------------------------------------------------------
// A parsed .cdgl file: named constants (inlined at parse time), games and
// formulas (name references spliced).
// ---------------------------------------------------------------------------
struct CdglFile {
  std::vector<std::string> order;  // declaration order, for fmt
  std::map<std::string, TermPtr> consts;
  std::map<std::string, GamePtr> games;
  std::map<std::string, FormulaPtr> formulas;
};

}  // namespace cdgl
