#include "cdgl/printer.hpp"

#include <sstream>

namespace cdgl {

namespace {

// Term precedence: 1 additive, 2 multiplicative, 3 unary minus, 4 atoms.
void print_term(std::ostream& os, const TermPtr& t, int prec);

void paren_term(std::ostream& os, const TermPtr& t, int prec, int min_prec) {
  if (prec < min_prec) {
    os << "(";
    print_term(os, t, 0);
    os << ")";
  } else {
    print_term(os, t, min_prec);
  }
}

int term_prec(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Plus: return 1;
    case Term::Kind::Times:
    case Term::Kind::Div: return 2;
    case Term::Kind::Neg: return 3;
    default: return 4;
  }
}

void print_term(std::ostream& os, const TermPtr& t, int) {
  switch (t->kind) {
    case Term::Kind::Rational:
      os << decimal_str(t->value);
      return;
    case Term::Kind::Var:
      os << t->name;
      return;
    case Term::Kind::PrimedVar:
      os << t->name << "'";
      return;
    case Term::Kind::Plus: {
      const TermPtr& a = t->args[0];
      const TermPtr& b = t->args[1];
      paren_term(os, a, term_prec(a), 1);
      if (b->kind == Term::Kind::Neg) {
        os << " - ";
        const TermPtr& inner = b->args[0];
        paren_term(os, inner, term_prec(inner), 2);
      } else {
        os << " + ";
        paren_term(os, b, term_prec(b), 2);  // right side tighter: + left-assoc
      }
      return;
    }
    case Term::Kind::Times: {
      paren_term(os, t->args[0], term_prec(t->args[0]), 2);
      os << "*";
      paren_term(os, t->args[1], term_prec(t->args[1]), 3);
      return;
    }
    case Term::Kind::Div: {
      paren_term(os, t->args[0], term_prec(t->args[0]), 2);
      os << "/";
      paren_term(os, t->args[1], term_prec(t->args[1]), 3);
      return;
    }
    case Term::Kind::Neg: {
      os << "-";
      // Parenthesize a directly nested negation: "--" lexes as one token.
      int p = t->args[0]->kind == Term::Kind::Neg ? 0 : term_prec(t->args[0]);
      paren_term(os, t->args[0], p, 3);
      return;
    }
    case Term::Kind::Min:
    case Term::Kind::Max: {
      os << (t->kind == Term::Kind::Min ? "min(" : "max(");
      print_term(os, t->args[0], 0);
      os << ", ";
      print_term(os, t->args[1], 0);
      os << ")";
      return;
    }
    case Term::Kind::Sqrt:
      os << "sqrt(";
      print_term(os, t->args[0], 0);
      os << ")";
      return;
    case Term::Kind::Differential:
      os << "(";
      print_term(os, t->args[0], 0);
      os << ")'";
      return;
    case Term::Kind::Tuple: {
      os << "(";
      for (size_t i = 0; i < t->args.size(); ++i) {
        if (i) os << ", ";
        print_term(os, t->args[i], 0);
      }
      os << ")";
      return;
    }
  }
}

void print_formula(std::ostream& os, const FormulaPtr& f, int prec);
void print_game(std::ostream& os, const GamePtr& g, int prec);

// Formula precedence: 1 iff, 2 imp, 3 or, 4 and, 5 unary (not, quantifiers,
// modalities), 6 atoms.
int fml_prec(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Iff: return 1;
    case Formula::Kind::Imp: return 2;
    case Formula::Kind::Or: return 3;
    case Formula::Kind::And: return 4;
    case Formula::Kind::Not:
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
    case Formula::Kind::Diamond:
    case Formula::Kind::Box:
      return 5;
    default: return 6;
  }
}

void paren_fml(std::ostream& os, const FormulaPtr& f, int min_prec) {
  if (fml_prec(f) < min_prec) {
    os << "(";
    print_formula(os, f, 0);
    os << ")";
  } else {
    print_formula(os, f, min_prec);
  }
}

void print_formula(std::ostream& os, const FormulaPtr& f, int) {
  switch (f->kind) {
    case Formula::Kind::Cmp:
      print_term(os, f->lhs, 0);
      os << " " << rel_str(f->rel) << " ";
      print_term(os, f->rhs, 0);
      return;
    case Formula::Kind::True: os << "true"; return;
    case Formula::Kind::False: os << "false"; return;
    case Formula::Kind::Diamond:
      os << "<";
      print_game(os, f->game, 0);
      os << "> ";
      paren_fml(os, f->sub, 5);
      return;
    case Formula::Kind::Box:
      os << "[";
      print_game(os, f->game, 0);
      os << "] ";
      paren_fml(os, f->sub, 5);
      return;
    case Formula::Kind::Not:
      os << "!";
      paren_fml(os, f->sub, 5);
      return;
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      os << (f->kind == Formula::Kind::Forall ? "forall " : "exists ") << f->var << " ";
      paren_fml(os, f->sub, 5);
      return;
    case Formula::Kind::And:
      paren_fml(os, f->sub, 4);
      os << " & ";
      paren_fml(os, f->sub2, 5);  // left-assoc
      return;
    case Formula::Kind::Or:
      paren_fml(os, f->sub, 3);
      os << " | ";
      paren_fml(os, f->sub2, 4);
      return;
    case Formula::Kind::Imp:
      paren_fml(os, f->sub, 3);  // right-assoc: a -> b -> c = a -> (b -> c)
      os << " -> ";
      paren_fml(os, f->sub2, 2);
      return;
    case Formula::Kind::Iff:
      paren_fml(os, f->sub, 2);
      os << " <-> ";
      paren_fml(os, f->sub2, 2);
      return;
  }
}

// Game precedence: 1 choice/dchoice, 2 seq, 3 postfix, 4 atoms.
int game_prec(const GamePtr& g) {
  switch (g->kind) {
    case Game::Kind::Choice:
    case Game::Kind::DChoice: return 1;
    case Game::Kind::Seq: return 2;
    case Game::Kind::Repeat:
    case Game::Kind::DRepeat:
    case Game::Kind::Dual: return 3;
    default: return 4;
  }
}

void paren_game(std::ostream& os, const GamePtr& g, int min_prec) {
  if (game_prec(g) < min_prec) {
    os << "{";
    print_game(os, g, 0);
    os << "}";
  } else {
    print_game(os, g, min_prec);
  }
}

void print_game(std::ostream& os, const GamePtr& g, int) {
  switch (g->kind) {
    case Game::Kind::Test:
      os << "?";
      paren_fml(os, g->fml, 1);
      return;
    case Game::Kind::Assign:
      os << g->var << " := ";
      print_term(os, g->term, 0);
      return;
    case Game::Kind::AssignAny:
      os << g->var << " := *";
      return;
    case Game::Kind::ODE: {
      os << "{";
      for (size_t i = 0; i < g->equations.size(); ++i) {
        if (i) os << ", ";
        os << g->equations[i].first << "' = ";
        print_term(os, g->equations[i].second, 0);
      }
      if (g->domain->kind != Formula::Kind::True) {
        os << " & ";
        print_formula(os, g->domain, 0);
      }
      os << "}";
      return;
    }
    case Game::Kind::Seq:
      paren_game(os, g->left, 3);  // right-assoc: a;(b;c) prints a; b; c
      os << "; ";
      paren_game(os, g->right, 2);
      return;
    case Game::Kind::Choice:
    case Game::Kind::DChoice:
      paren_game(os, g->left, 1);  // left-assoc
      os << (g->kind == Game::Kind::Choice ? " ++ " : " -- ");
      paren_game(os, g->right, 2);
      return;
    case Game::Kind::Repeat:
      os << "{";
      print_game(os, g->left, 0);
      os << "}*";
      return;
    case Game::Kind::DRepeat:
      os << "{";
      print_game(os, g->left, 0);
      os << "}^x";
      return;
    case Game::Kind::Dual:
      os << "{";
      print_game(os, g->left, 0);
      os << "}^d";
      return;
  }
}

}  // namespace

std::string rel_str(Rel r) {
  switch (r) {
    case Rel::Le: return "<=";
    case Rel::Lt: return "<";
    case Rel::Eq: return "=";
    case Rel::Ne: return "!=";
    case Rel::Gt: return ">";
    case Rel::Ge: return ">=";
  }
  return "?";
}

std::string pretty(const TermPtr& t) {
  std::ostringstream os;
  print_term(os, t, 0);
  return os.str();
}

std::string pretty(const GamePtr& g) {
  std::ostringstream os;
  print_game(os, g, 0);
  return os.str();
}

std::string pretty(const FormulaPtr& f) {
  std::ostringstream os;
  print_formula(os, f, 0);
  return os.str();
}

std::string pretty_file(const CdglFile& file) {
  std::ostringstream os;
  for (const auto& name : file.order) {
    if (auto it = file.consts.find(name); it != file.consts.end()) {
      os << "const " << name << " = " << pretty(it->second) << "\n";
    } else if (auto it2 = file.games.find(name); it2 != file.games.end()) {
      os << "game " << name << " = " << pretty(it2->second) << "\n";
    } else if (auto it3 = file.formulas.find(name); it3 != file.formulas.end()) {
      os << "formula " << name << " = " << pretty(it3->second) << "\n";
    }
  }
  return os.str();
}

}  // namespace cdgl
