#include "cdgl/statics.hpp"

#include <algorithm>

namespace cdgl {

namespace {

VarSet set_union(const VarSet& a, const VarSet& b) {
  VarSet r = a;
  r.insert(b.begin(), b.end());
  return r;
}

VarSet set_minus(const VarSet& a, const VarSet& b) {
  VarSet r;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(r, r.begin()));
  return r;
}

VarSet set_inter(const VarSet& a, const VarSet& b) {
  VarSet r;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(r, r.begin()));
  return r;
}

}  // namespace

VarSet free_vars(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Rational: return {};
    case Term::Kind::Var: return {t->name};
    case Term::Kind::PrimedVar: return {primed(t->name)};
    case Term::Kind::Differential: {
      // (f)' reads f's variables and their primed counterparts.
      VarSet inner = free_vars(t->args[0]);
      VarSet r = inner;
      for (const auto& v : inner)
        if (!is_primed_name(v)) r.insert(primed(v));
      return r;
    }
    default: {
      VarSet r;
      for (const auto& a : t->args) r = set_union(r, free_vars(a));
      return r;
    }
  }
}

VarSet bound_vars(const GamePtr& g) {
  switch (g->kind) {
    case Game::Kind::Test: return {};
    case Game::Kind::Assign:
    case Game::Kind::AssignAny:
      return {g->var};
    case Game::Kind::ODE: {
      VarSet r;
      for (const auto& [x, rhs] : g->equations) {
        r.insert(x);
        r.insert(primed(x));
      }
      return r;
    }
    case Game::Kind::Choice:
    case Game::Kind::DChoice:
    case Game::Kind::Seq:
      return set_union(bound_vars(g->left), bound_vars(g->right));
    case Game::Kind::Repeat:
    case Game::Kind::DRepeat:
    case Game::Kind::Dual:
      return bound_vars(g->left);
  }
  return {};
}

VarSet must_bound_vars(const GamePtr& g) {
  switch (g->kind) {
    case Game::Kind::Test: return {};
    case Game::Kind::Assign:
    case Game::Kind::AssignAny:
      return {g->var};
    case Game::Kind::ODE: return bound_vars(g);
    case Game::Kind::Seq:
      return set_union(must_bound_vars(g->left), must_bound_vars(g->right));
    case Game::Kind::Choice:
      return set_inter(must_bound_vars(g->left), must_bound_vars(g->right));
    case Game::Kind::DChoice:
      // {a^d ∪ b^d}^d: dual is transparent, so this is the Choice case.
      return set_inter(must_bound_vars(g->left), must_bound_vars(g->right));
    case Game::Kind::Repeat:
    case Game::Kind::DRepeat:
      return {};
    case Game::Kind::Dual:
      return must_bound_vars(g->left);
  }
  return {};
}

VarSet free_vars(const GamePtr& g) {
  switch (g->kind) {
    case Game::Kind::Test: return free_vars(g->fml);
    case Game::Kind::Assign: return free_vars(g->term);
    case Game::Kind::AssignAny: return {};
    case Game::Kind::ODE: {
      VarSet r;
      for (const auto& [x, rhs] : g->equations) {
        r.insert(x);
        r = set_union(r, free_vars(rhs));
      }
      return set_union(r, free_vars(g->domain));
    }
    case Game::Kind::Seq:
      return set_union(free_vars(g->left),
                       set_minus(free_vars(g->right), must_bound_vars(g->left)));
    case Game::Kind::Choice:
    case Game::Kind::DChoice:
      return set_union(free_vars(g->left), free_vars(g->right));
    case Game::Kind::Repeat:
    case Game::Kind::DRepeat:
    case Game::Kind::Dual:
      return free_vars(g->left);
  }
  return {};
}

VarSet free_vars(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Cmp:
      return set_union(free_vars(f->lhs), free_vars(f->rhs));
    case Formula::Kind::True:
    case Formula::Kind::False:
      return {};
    case Formula::Kind::Diamond:
    case Formula::Kind::Box:
      return set_union(free_vars(f->game),
                       set_minus(free_vars(f->sub), must_bound_vars(f->game)));
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
    case Formula::Kind::Iff:
      return set_union(free_vars(f->sub), free_vars(f->sub2));
    case Formula::Kind::Not:
      return free_vars(f->sub);
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      // [x:=*]φ / ⟨x:=*⟩φ: x is must-bound.
      return set_minus(free_vars(f->sub), VarSet{f->var});
  }
  return {};
}

VarSet all_vars(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Rational: return {};
    case Term::Kind::Var: return {t->name};
    case Term::Kind::PrimedVar: return {primed(t->name)};
    default: {
      VarSet r;
      for (const auto& a : t->args) r = set_union(r, all_vars(a));
      return r;
    }
  }
}

VarSet all_vars(const GamePtr& g) {
  switch (g->kind) {
    case Game::Kind::Test: return all_vars(g->fml);
    case Game::Kind::Assign: return set_union(VarSet{g->var}, all_vars(g->term));
    case Game::Kind::AssignAny: return {g->var};
    case Game::Kind::ODE: {
      VarSet r = all_vars(g->domain);
      for (const auto& [x, rhs] : g->equations) {
        r.insert(x);
        r.insert(primed(x));
        r = set_union(r, all_vars(rhs));
      }
      return r;
    }
    case Game::Kind::Choice:
    case Game::Kind::DChoice:
    case Game::Kind::Seq:
      return set_union(all_vars(g->left), all_vars(g->right));
    case Game::Kind::Repeat:
    case Game::Kind::DRepeat:
    case Game::Kind::Dual:
      return all_vars(g->left);
  }
  return {};
}

VarSet all_vars(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Cmp: return set_union(all_vars(f->lhs), all_vars(f->rhs));
    case Formula::Kind::True:
    case Formula::Kind::False:
      return {};
    case Formula::Kind::Diamond:
    case Formula::Kind::Box:
      return set_union(all_vars(f->game), all_vars(f->sub));
    case Formula::Kind::And:
    case Formula::Kind::Or:
    case Formula::Kind::Imp:
    case Formula::Kind::Iff:
      return set_union(all_vars(f->sub), all_vars(f->sub2));
    case Formula::Kind::Not:
      return all_vars(f->sub);
    case Formula::Kind::Forall:
    case Formula::Kind::Exists:
      return set_union(VarSet{f->var}, all_vars(f->sub));
  }
  return {};
}

// --- renaming ---------------------------------------------------------------

namespace {
std::string swap_name(const std::string& n, const std::string& x, const std::string& y) {
  if (n == x) return y;
  if (n == y) return x;
  return n;
}
}  // namespace

TermPtr rename(const TermPtr& t, const std::string& x, const std::string& y) {
  switch (t->kind) {
    case Term::Kind::Rational: return t;
    case Term::Kind::Var: return t_var(swap_name(t->name, x, y));
    case Term::Kind::PrimedVar: return t_primed(swap_name(t->name, x, y));
    default: {
      Term copy = *t;
      for (auto& a : copy.args) a = rename(a, x, y);
      return std::make_shared<Term>(std::move(copy));
    }
  }
}

GamePtr rename(const GamePtr& g, const std::string& x, const std::string& y) {
  switch (g->kind) {
    case Game::Kind::Test: return g_test(rename(g->fml, x, y));
    case Game::Kind::Assign:
      return g_assign(swap_name(g->var, x, y), rename(g->term, x, y));
    case Game::Kind::AssignAny:
      return g_assign_any(swap_name(g->var, x, y));
    case Game::Kind::ODE: {
      std::vector<std::pair<std::string, TermPtr>> eqs;
      for (const auto& [v, rhs] : g->equations)
        eqs.emplace_back(swap_name(v, x, y), rename(rhs, x, y));
      return g_ode(std::move(eqs), rename(g->domain, x, y));
    }
    case Game::Kind::Choice:
      return g_choice(rename(g->left, x, y), rename(g->right, x, y));
    case Game::Kind::DChoice:
      return g_dchoice(rename(g->left, x, y), rename(g->right, x, y));
    case Game::Kind::Seq:
      return g_seq(rename(g->left, x, y), rename(g->right, x, y));
    case Game::Kind::Repeat: return g_repeat(rename(g->left, x, y));
    case Game::Kind::DRepeat: return g_drepeat(rename(g->left, x, y));
    case Game::Kind::Dual: return g_dual(rename(g->left, x, y));
  }
  throw std::logic_error("rename: bad game");
}

FormulaPtr rename(const FormulaPtr& f, const std::string& x, const std::string& y) {
  switch (f->kind) {
    case Formula::Kind::Cmp:
      return f_cmp(rename(f->lhs, x, y), f->rel, rename(f->rhs, x, y));
    case Formula::Kind::True:
    case Formula::Kind::False:
      return f;
    case Formula::Kind::Diamond:
      return f_diamond(rename(f->game, x, y), rename(f->sub, x, y));
    case Formula::Kind::Box:
      return f_box(rename(f->game, x, y), rename(f->sub, x, y));
    case Formula::Kind::And:
      return f_and(rename(f->sub, x, y), rename(f->sub2, x, y));
    case Formula::Kind::Or:
      return f_or(rename(f->sub, x, y), rename(f->sub2, x, y));
    case Formula::Kind::Imp:
      return f_imp(rename(f->sub, x, y), rename(f->sub2, x, y));
    case Formula::Kind::Iff:
      return f_iff(rename(f->sub, x, y), rename(f->sub2, x, y));
    case Formula::Kind::Not:
      return f_not(rename(f->sub, x, y));
    case Formula::Kind::Forall:
      return f_forall(swap_name(f->var, x, y), rename(f->sub, x, y));
    case Formula::Kind::Exists:
      return f_exists(swap_name(f->var, x, y), rename(f->sub, x, y));
  }
  throw std::logic_error("rename: bad formula");
}

// --- substitution -----------------------------------------------------------

namespace {

struct SubstCtx {
  const Subst& sub;
  // FV of each replacement, cached.
  std::map<std::string, VarSet> fv;

  explicit SubstCtx(const Subst& s) : sub(s) {
    for (const auto& [v, t] : s) fv[v] = free_vars(t);
  }

  // Occurrence of v under binder set B: inadmissible if B meets FV(f_v) ∪ {v}.
  void check(const std::string& v, const VarSet& binders, const char* where) const {
    const VarSet& fvs = fv.at(v);
    for (const auto& b : binders) {
      if (b == v || fvs.count(b)) throw AdmissibilityError(v, b, where);
    }
  }
};

TermPtr subst_t(const TermPtr& t, const SubstCtx& cx, const VarSet& binders);
FormulaPtr subst_f(const FormulaPtr& f, const SubstCtx& cx, const VarSet& binders);
GamePtr subst_g(const GamePtr& g, const SubstCtx& cx, const VarSet& binders);

TermPtr subst_t(const TermPtr& t, const SubstCtx& cx, const VarSet& binders) {
  switch (t->kind) {
    case Term::Kind::Rational: return t;
    case Term::Kind::Var:
    case Term::Kind::PrimedVar: {
      std::string n = t->kind == Term::Kind::Var ? t->name : primed(t->name);
      auto it = cx.sub.find(n);
      if (it == cx.sub.end()) return t;
      cx.check(n, binders, "term");
      return it->second;
    }
    default: {
      Term copy = *t;
      for (auto& a : copy.args) a = subst_t(a, cx, binders);
      return std::make_shared<Term>(std::move(copy));
    }
  }
}

GamePtr subst_g(const GamePtr& g, const SubstCtx& cx, const VarSet& binders) {
  switch (g->kind) {
    case Game::Kind::Test:
      return g_test(subst_f(g->fml, cx, binders));
    case Game::Kind::Assign:
      // The right-hand side is evaluated before the assignment takes effect.
      return g_assign(g->var, subst_t(g->term, cx, binders));
    case Game::Kind::AssignAny:
      return g;
    case Game::Kind::ODE: {
      // Everything inside an ODE is evaluated along the flow, i.e. under
      // the ODE's own binders.
      VarSet inner = binders;
      for (const auto& [x, rhs] : g->equations) {
        inner.insert(x);
        inner.insert(primed(x));
      }
      std::vector<std::pair<std::string, TermPtr>> eqs;
      for (const auto& [x, rhs] : g->equations)
        eqs.emplace_back(x, subst_t(rhs, cx, inner));
      return g_ode(std::move(eqs), subst_f(g->domain, cx, inner));
    }
    case Game::Kind::Choice:
      return g_choice(subst_g(g->left, cx, binders), subst_g(g->right, cx, binders));
    case Game::Kind::DChoice:
      return g_dchoice(subst_g(g->left, cx, binders), subst_g(g->right, cx, binders));
    case Game::Kind::Seq: {
      GamePtr l = subst_g(g->left, cx, binders);
      VarSet after = binders;
      VarSet bv = bound_vars(g->left);
      after.insert(bv.begin(), bv.end());
      return g_seq(l, subst_g(g->right, cx, after));
    }
    case Game::Kind::Repeat:
    case Game::Kind::DRepeat: {
      VarSet inner = binders;
      VarSet bv = bound_vars(g->left);
      inner.insert(bv.begin(), bv.end());
      GamePtr body = subst_g(g->left, cx, inner);
      return g->kind == Game::Kind::Repeat ? g_repeat(body) : g_drepeat(body);
    }
    case Game::Kind::Dual:
      return g_dual(subst_g(g->left, cx, binders));
  }
  throw std::logic_error("subst_g: bad game");
}

FormulaPtr subst_f(const FormulaPtr& f, const SubstCtx& cx, const VarSet& binders) {
  switch (f->kind) {
    case Formula::Kind::Cmp:
      return f_cmp(subst_t(f->lhs, cx, binders), f->rel, subst_t(f->rhs, cx, binders));
    case Formula::Kind::True:
    case Formula::Kind::False:
      return f;
    case Formula::Kind::Diamond:
    case Formula::Kind::Box: {
      GamePtr g2 = subst_g(f->game, cx, binders);
      VarSet after = binders;
      VarSet bv = bound_vars(f->game);
      after.insert(bv.begin(), bv.end());
      FormulaPtr body = subst_f(f->sub, cx, after);
      return f->kind == Formula::Kind::Diamond ? f_diamond(g2, body) : f_box(g2, body);
    }
    case Formula::Kind::And:
      return f_and(subst_f(f->sub, cx, binders), subst_f(f->sub2, cx, binders));
    case Formula::Kind::Or:
      return f_or(subst_f(f->sub, cx, binders), subst_f(f->sub2, cx, binders));
    case Formula::Kind::Imp:
      return f_imp(subst_f(f->sub, cx, binders), subst_f(f->sub2, cx, binders));
    case Formula::Kind::Iff:
      return f_iff(subst_f(f->sub, cx, binders), subst_f(f->sub2, cx, binders));
    case Formula::Kind::Not:
      return f_not(subst_f(f->sub, cx, binders));
    case Formula::Kind::Forall:
    case Formula::Kind::Exists: {
      VarSet inner = binders;
      inner.insert(f->var);
      FormulaPtr body = subst_f(f->sub, cx, inner);
      return f->kind == Formula::Kind::Forall ? f_forall(f->var, body)
                                              : f_exists(f->var, body);
    }
  }
  throw std::logic_error("subst_f: bad formula");
}

}  // namespace

TermPtr substitute(const TermPtr& t, const Subst& sub) {
  SubstCtx cx(sub);
  return subst_t(t, cx, {});
}

FormulaPtr substitute(const FormulaPtr& f, const Subst& sub) {
  SubstCtx cx(sub);
  return subst_f(f, cx, {});
}

GamePtr substitute(const GamePtr& g, const Subst& sub) {
  SubstCtx cx(sub);
  return subst_g(g, cx, {});
}

}  // namespace cdgl
