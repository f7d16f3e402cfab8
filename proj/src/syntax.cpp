#include "cdgl/syntax.hpp"

#include <stdexcept>

namespace cdgl {

namespace {
TermPtr mk_term(Term t) { return std::make_shared<Term>(std::move(t)); }
GamePtr mk_game(Game g) { return std::make_shared<Game>(std::move(g)); }
FormulaPtr mk_fml(Formula f) { return std::make_shared<Formula>(std::move(f)); }

TermPtr binop(Term::Kind k, TermPtr a, TermPtr b) {
  Term t;
  t.kind = k;
  t.args = {std::move(a), std::move(b)};
  return mk_term(std::move(t));
}
}  // namespace

TermPtr t_rat(const Rat& r0) {
  Rat r = r0;
  r.canonicalize();
  if (sgn(r) < 0) return t_neg(t_rat(-r));
  if (!is_decimal_rat(r)) {
    // Keep literals printable: spell other rationals as a quotient.
    return t_div(t_rat(Rat(r.get_num())), t_rat(Rat(r.get_den())));
  }
  Term t;
  t.kind = Term::Kind::Rational;
  t.value = r;
  return mk_term(std::move(t));
}

TermPtr t_int(long n) { return t_rat(Rat(n)); }

TermPtr t_var(const std::string& name) {
  Term t;
  t.kind = Term::Kind::Var;
  t.name = name;
  return mk_term(std::move(t));
}

TermPtr t_primed(const std::string& name) {
  Term t;
  t.kind = Term::Kind::PrimedVar;
  t.name = name;
  return mk_term(std::move(t));
}

TermPtr t_plus(TermPtr a, TermPtr b) { return binop(Term::Kind::Plus, std::move(a), std::move(b)); }
TermPtr t_minus(TermPtr a, TermPtr b) { return t_plus(std::move(a), t_neg(std::move(b))); }
TermPtr t_times(TermPtr a, TermPtr b) { return binop(Term::Kind::Times, std::move(a), std::move(b)); }
TermPtr t_div(TermPtr a, TermPtr b) { return binop(Term::Kind::Div, std::move(a), std::move(b)); }
TermPtr t_min(TermPtr a, TermPtr b) { return binop(Term::Kind::Min, std::move(a), std::move(b)); }
TermPtr t_max(TermPtr a, TermPtr b) { return binop(Term::Kind::Max, std::move(a), std::move(b)); }

TermPtr t_neg(TermPtr a) {
  Term t;
  t.kind = Term::Kind::Neg;
  t.args = {std::move(a)};
  return mk_term(std::move(t));
}

TermPtr t_sqrt(TermPtr a) {
  Term t;
  t.kind = Term::Kind::Sqrt;
  t.args = {std::move(a)};
  return mk_term(std::move(t));
}

TermPtr t_differential(TermPtr a) {
  Term t;
  t.kind = Term::Kind::Differential;
  t.args = {std::move(a)};
  return mk_term(std::move(t));
}

TermPtr t_tuple(std::vector<TermPtr> items) {
  Term t;
  t.kind = Term::Kind::Tuple;
  t.args = std::move(items);
  return mk_term(std::move(t));
}

GamePtr g_test(FormulaPtr f) {
  Game g;
  g.kind = Game::Kind::Test;
  g.fml = std::move(f);
  return mk_game(std::move(g));
}

GamePtr g_assign(const std::string& x, TermPtr t) {
  Game g;
  g.kind = Game::Kind::Assign;
  g.var = x;
  g.term = std::move(t);
  return mk_game(std::move(g));
}

GamePtr g_assign_any(const std::string& x) {
  Game g;
  g.kind = Game::Kind::AssignAny;
  g.var = x;
  return mk_game(std::move(g));
}

GamePtr g_ode(std::vector<std::pair<std::string, TermPtr>> eqs, FormulaPtr domain) {
  Game g;
  g.kind = Game::Kind::ODE;
  g.equations = std::move(eqs);
  g.domain = domain ? std::move(domain) : f_true();
  return mk_game(std::move(g));
}

namespace {
GamePtr g_bin(Game::Kind k, GamePtr a, GamePtr b) {
  Game g;
  g.kind = k;
  g.left = std::move(a);
  g.right = std::move(b);
  return mk_game(std::move(g));
}
GamePtr g_un(Game::Kind k, GamePtr a) {
  Game g;
  g.kind = k;
  g.left = std::move(a);
  return mk_game(std::move(g));
}
}  // namespace

GamePtr g_choice(GamePtr a, GamePtr b) { return g_bin(Game::Kind::Choice, std::move(a), std::move(b)); }
GamePtr g_dchoice(GamePtr a, GamePtr b) { return g_bin(Game::Kind::DChoice, std::move(a), std::move(b)); }
GamePtr g_seq(GamePtr a, GamePtr b) { return g_bin(Game::Kind::Seq, std::move(a), std::move(b)); }
GamePtr g_repeat(GamePtr a) { return g_un(Game::Kind::Repeat, std::move(a)); }
GamePtr g_drepeat(GamePtr a) { return g_un(Game::Kind::DRepeat, std::move(a)); }
GamePtr g_dual(GamePtr a) { return g_un(Game::Kind::Dual, std::move(a)); }

FormulaPtr f_diamond(GamePtr g, FormulaPtr f) {
  Formula r;
  r.kind = Formula::Kind::Diamond;
  r.game = std::move(g);
  r.sub = std::move(f);
  return mk_fml(std::move(r));
}

FormulaPtr f_box(GamePtr g, FormulaPtr f) {
  Formula r;
  r.kind = Formula::Kind::Box;
  r.game = std::move(g);
  r.sub = std::move(f);
  return mk_fml(std::move(r));
}

FormulaPtr f_cmp(TermPtr l, Rel rel, TermPtr r) {
  Formula f;
  f.kind = Formula::Kind::Cmp;
  f.lhs = std::move(l);
  f.rhs = std::move(r);
  f.rel = rel;
  return mk_fml(std::move(f));
}

FormulaPtr f_true() {
  Formula f;
  f.kind = Formula::Kind::True;
  return mk_fml(std::move(f));
}
FormulaPtr f_false() {
  Formula f;
  f.kind = Formula::Kind::False;
  return mk_fml(std::move(f));
}

namespace {
FormulaPtr f_bin(Formula::Kind k, FormulaPtr a, FormulaPtr b) {
  Formula f;
  f.kind = k;
  f.sub = std::move(a);
  f.sub2 = std::move(b);
  return mk_fml(std::move(f));
}
}  // namespace

FormulaPtr f_and(FormulaPtr a, FormulaPtr b) { return f_bin(Formula::Kind::And, std::move(a), std::move(b)); }
FormulaPtr f_or(FormulaPtr a, FormulaPtr b) { return f_bin(Formula::Kind::Or, std::move(a), std::move(b)); }
FormulaPtr f_imp(FormulaPtr a, FormulaPtr b) { return f_bin(Formula::Kind::Imp, std::move(a), std::move(b)); }
FormulaPtr f_iff(FormulaPtr a, FormulaPtr b) { return f_bin(Formula::Kind::Iff, std::move(a), std::move(b)); }

FormulaPtr f_not(FormulaPtr a) {
  Formula f;
  f.kind = Formula::Kind::Not;
  f.sub = std::move(a);
  return mk_fml(std::move(f));
}

FormulaPtr f_forall(const std::string& x, FormulaPtr a) {
  Formula f;
  f.kind = Formula::Kind::Forall;
  f.var = x;
  f.sub = std::move(a);
  return mk_fml(std::move(f));
}

FormulaPtr f_exists(const std::string& x, FormulaPtr a) {
  Formula f;
  f.kind = Formula::Kind::Exists;
  f.var = x;
  f.sub = std::move(a);
  return mk_fml(std::move(f));
}

bool term_eq(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Term::Kind::Rational: return a->value == b->value;
    case Term::Kind::Var:
    case Term::Kind::PrimedVar: return a->name == b->name;
    default: break;
  }
  if (a->args.size() != b->args.size()) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!term_eq(a->args[i], b->args[i])) return false;
  return true;
}

bool game_eq(const GamePtr& a, const GamePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Game::Kind::Test: return formula_eq(a->fml, b->fml);
    case Game::Kind::Assign: return a->var == b->var && term_eq(a->term, b->term);
    case Game::Kind::AssignAny: return a->var == b->var;
    case Game::Kind::ODE: {
      if (a->equations.size() != b->equations.size()) return false;
      for (size_t i = 0; i < a->equations.size(); ++i) {
        if (a->equations[i].first != b->equations[i].first) return false;
        if (!term_eq(a->equations[i].second, b->equations[i].second)) return false;
      }
      return formula_eq(a->domain, b->domain);
    }
    case Game::Kind::Choice:
    case Game::Kind::DChoice:
    case Game::Kind::Seq:
      return game_eq(a->left, b->left) && game_eq(a->right, b->right);
    case Game::Kind::Repeat:
    case Game::Kind::DRepeat:
    case Game::Kind::Dual:
      return game_eq(a->left, b->left);
  }
  return false;
}

bool formula_eq(const FormulaPtr& a, const FormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Formula::Kind::Diamond:
    case Formula::Kind::Box:
      return game_eq(a->game, b->game) && formula_eq(a->sub, b->sub);
    case Formula::Kind::Cmp:
      return a->rel == b->rel && term_eq(a->lhs, b->lhs) && term_eq(a->rhs, b->rhs);
    case Formula::Kind::True:
    case Formula::Kind::False:
      return true;
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
    case Formula::Kind::Iff:
      return formula_eq(a->sub, b->sub) && formula_eq(a->sub2, b->sub2);
    case Formula::Kind::Not:
      return formula_eq(a->sub, b->sub);
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      return a->var == b->var && formula_eq(a->sub, b->sub);
  }
  return false;
}

GamePtr desugar_game(const GamePtr& g) {
  switch (g->kind) {
    case Game::Kind::Test: return g_test(desugar(g->fml));
    case Game::Kind::Assign:
    case Game::Kind::AssignAny:
      return g;
    case Game::Kind::ODE: {
      FormulaPtr d = desugar(g->domain);
      if (formula_eq(d, g->domain)) return g;
      return g_ode(g->equations, d);
    }
    case Game::Kind::Choice: return g_choice(desugar_game(g->left), desugar_game(g->right));
    case Game::Kind::Seq: return g_seq(desugar_game(g->left), desugar_game(g->right));
    case Game::Kind::Repeat: return g_repeat(desugar_game(g->left));
    case Game::Kind::Dual: return g_dual(desugar_game(g->left));
    case Game::Kind::DChoice:
      // a ∩ b  =  {a^d ∪ b^d}^d
      return g_dual(g_choice(g_dual(desugar_game(g->left)), g_dual(desugar_game(g->right))));
    case Game::Kind::DRepeat:
      // a^×  =  {{a^d}*}^d
      return g_dual(g_repeat(g_dual(desugar_game(g->left))));
  }
  throw std::logic_error("desugar_game: bad kind");
}

FormulaPtr desugar(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Cmp: return f;
    case Formula::Kind::Diamond: return f_diamond(desugar_game(f->game), desugar(f->sub));
    case Formula::Kind::Box: return f_box(desugar_game(f->game), desugar(f->sub));
    case Formula::Kind::True: return f_cmp(t_int(1), Rel::Gt, t_int(0));
    case Formula::Kind::False: return f_cmp(t_int(0), Rel::Gt, t_int(1));
    case Formula::Kind::And:
      // φ ∧ ψ  =  ⟨?φ⟩ψ
      return f_diamond(g_test(desugar(f->sub)), desugar(f->sub2));
    case Formula::Kind::Or:
      // φ ∨ ψ  =  ⟨?φ ∪ ?ψ⟩tt
      return f_diamond(g_choice(g_test(desugar(f->sub)), g_test(desugar(f->sub2))),
                       desugar(f_true()));
    case Formula::Kind::Imp:
      // φ → ψ  =  [?φ]ψ
      return f_box(g_test(desugar(f->sub)), desugar(f->sub2));
    case Formula::Kind::Iff:
      return desugar(f_and(f_imp(f->sub, f->sub2), f_imp(f->sub2, f->sub)));
    case Formula::Kind::Not:
      return desugar(f_imp(f->sub, f_false()));
    case Formula::Kind::Forall:
      return f_box(g_assign_any(f->var), desugar(f->sub));
    case Formula::Kind::Exists:
      return f_diamond(g_assign_any(f->var), desugar(f->sub));
  }
  throw std::logic_error("desugar: bad kind");
}

namespace {
bool is_core_game(const GamePtr& g) {
  switch (g->kind) {
    case Game::Kind::DChoice:
    case Game::Kind::DRepeat:
      return false;
    case Game::Kind::Test: return is_core(g->fml);
    case Game::Kind::Assign:
    case Game::Kind::AssignAny:
      return true;
    case Game::Kind::ODE: return is_core(g->domain);
    case Game::Kind::Choice:
    case Game::Kind::Seq:
      return is_core_game(g->left) && is_core_game(g->right);
    case Game::Kind::Repeat:
    case Game::Kind::Dual:
      return is_core_game(g->left);
  }
  return false;
}
}  // namespace

bool is_core(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Cmp: return true;
    case Formula::Kind::Diamond:
    case Formula::Kind::Box:
      return is_core_game(f->game) && is_core(f->sub);
    default:
      return false;
  }
}

}  // namespace cdgl
