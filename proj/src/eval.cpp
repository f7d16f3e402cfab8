#include "cdgl/eval.hpp"

#include "cdgl/printer.hpp"

namespace cdgl {

CReal eval_creal(const TermPtr& t, const State& s) {
  switch (t->kind) {
    case Term::Kind::Rational: return CReal(t->value);
    case Term::Kind::Var: return s.get(t->name);
    case Term::Kind::PrimedVar: return s.get(t->name + "'");
    case Term::Kind::Plus: return eval_creal(t->args[0], s) + eval_creal(t->args[1], s);
    case Term::Kind::Times: return eval_creal(t->args[0], s) * eval_creal(t->args[1], s);
    case Term::Kind::Div: return eval_creal(t->args[0], s) / eval_creal(t->args[1], s);
    case Term::Kind::Min: return eval_creal(t->args[0], s).min(eval_creal(t->args[1], s));
    case Term::Kind::Max: return eval_creal(t->args[0], s).max(eval_creal(t->args[1], s));
    case Term::Kind::Neg: return -eval_creal(t->args[0], s);
    case Term::Kind::Sqrt: return eval_creal(t->args[0], s).sqrt();
    case Term::Kind::Differential:
      throw NotEvaluable("differential terms are evaluated by differential_eval");
    case Term::Kind::Tuple:
      throw NotEvaluable("tuples are not first-class term values");
  }
  throw std::logic_error("eval_creal: bad term");
}

Interval eval_term(const TermPtr& t, const State& s, long k) {
  return eval_creal(t, s).refine(k);
}

CmpResult cmp_eps_terms(const TermPtr& f, const TermPtr& g, const Rat& eps, const State& s) {
  return cmp_eps(eval_creal(f, s), eval_creal(g, s), eps);
}

namespace {

// d's sign decided on a fixed-precision enclosure; see header.
bool le_at(const CReal& d, long k) {
  Interval iv = d.refine(k + 2);
  return iv.lo <= pow2(-(k + 1));
}

bool eq_at(const CReal& d, long k) {
  Interval iv = d.refine(k + 2);
  Rat tol = pow2(-(k + 1));
  return iv.lo <= tol && iv.hi >= -tol;
}

bool ne_at(const CReal& d, long k) {
  Interval iv = d.refine(k + 2);
  Rat tol = pow2(-(k + 1));
  return iv.lo > tol || iv.hi < -tol;
}

}  // namespace

bool truth_at(const FormulaPtr& f, const State& s, long k) {
  switch (f->kind) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::Cmp: {
      CReal d = eval_creal(f->lhs, s) - eval_creal(f->rhs, s);
      switch (f->rel) {
        case Rel::Le:
        case Rel::Lt: return le_at(d, k);
        case Rel::Ge:
        case Rel::Gt: return le_at(-d, k);
        case Rel::Eq: return eq_at(d, k);
        case Rel::Ne: return ne_at(d, k);
      }
      return false;
    }
    case Formula::Kind::And: return truth_at(f->sub, s, k) && truth_at(f->sub2, s, k);
    case Formula::Kind::Or: return truth_at(f->sub, s, k) || truth_at(f->sub2, s, k);
    case Formula::Kind::Imp: return !truth_at(f->sub, s, k) || truth_at(f->sub2, s, k);
    case Formula::Kind::Iff: return truth_at(f->sub, s, k) == truth_at(f->sub2, s, k);
    case Formula::Kind::Not: return !truth_at(f->sub, s, k);
    case Formula::Kind::Diamond:
    case Formula::Kind::Box: {
      // Desugared propositional structure reappears as test modalities.
      const GamePtr& g = f->game;
      if (f->kind == Formula::Kind::Diamond) {
        if (g->kind == Game::Kind::Test)  // conjunction
          return truth_at(g->fml, s, k) && truth_at(f->sub, s, k);
        if (g->kind == Game::Kind::Choice && g->left->kind == Game::Kind::Test &&
            g->right->kind == Game::Kind::Test)  // disjunction
          return (truth_at(g->left->fml, s, k) || truth_at(g->right->fml, s, k)) &&
                 truth_at(f->sub, s, k);
      } else if (g->kind == Game::Kind::Test) {  // implication
        return !truth_at(g->fml, s, k) || truth_at(f->sub, s, k);
      }
      throw NotEvaluable("cannot evaluate modality: " + pretty(f));
    }
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      throw NotEvaluable("cannot evaluate quantifier: " + pretty(f));
  }
  throw std::logic_error("truth_at: bad formula");
}

}  // namespace cdgl
