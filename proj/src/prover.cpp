#include "cdgl/prover.hpp"

#include <algorithm>
#include <cstring>
#include <functional>

#include "cdgl/parser.hpp"
#include "cdgl/printer.hpp"
#include "cdgl/statics.hpp"

namespace cdgl {

// --- rule table ---------------------------------------------------------------

namespace {
struct RuleNameRow { RuleId id; const char* name; };
const RuleNameRow kRuleNames[] = {
    {RuleId::BoxChoiceI, "[u]I"},   {RuleId::BoxChoiceE1, "[u]E1"},
    {RuleId::BoxChoiceE2, "[u]E2"}, {RuleId::DiaChoiceI1, "<u>I1"},
    {RuleId::DiaChoiceI2, "<u>I2"}, {RuleId::DiaChoiceE, "<u>E"},
    {RuleId::DiaTestI, "<?>I"},     {RuleId::DiaTestE1, "<?>E1"},
    {RuleId::DiaTestE2, "<?>E2"},   {RuleId::BoxTestI, "[?]I"},
    {RuleId::BoxTestE, "[?]E"},     {RuleId::Hyp, "hyp"},
    {RuleId::BoxAnyI, "[:*]I"},     {RuleId::BoxAnyE, "[:*]E"},
    {RuleId::DiaAnyI, "<:*>I"},     {RuleId::DiaAnyE, "<:*>E"},
    {RuleId::SeqI, ";I"},           {RuleId::AssignI, ":=I"},
    {RuleId::Mon, "M"},             {RuleId::DualI, "^dI"},
    {RuleId::DiaRepE, "<*>E"},      {RuleId::BoxRepE, "[*]E"},
    {RuleId::DiaRepS, "<*>S"},      {RuleId::BoxRepR, "[*]R"},
    {RuleId::DiaRepG, "<*>G"},      {RuleId::Loop, "loop"},
    {RuleId::FP, "FP"},             {RuleId::DiaRepI, "<*>I"},
    {RuleId::DI, "DI"},             {RuleId::DC, "DC"},
    {RuleId::DW, "DW"},             {RuleId::DG, "DG"},
    {RuleId::DV, "DV"},             {RuleId::BSolve, "bsolve"},
    {RuleId::DSolve, "dsolve"},     {RuleId::GV, "GV"},
    {RuleId::Arith, "arith"},
};
}  // namespace

const char* rule_name(RuleId r) {
  for (const auto& row : kRuleNames)
    if (row.id == r) return row.name;
  return "?";
}

std::optional<RuleId> rule_from_name(const std::string& name) {
  for (const auto& row : kRuleNames)
    if (name == row.name) return row.id;
  return std::nullopt;
}

std::vector<RuleId> rule_table() {
  std::vector<RuleId> out;
  for (const auto& row : kRuleNames) out.push_back(row.id);
  return out;
}

ProofTermPtr mk_proof(ProofTerm p) { return std::make_shared<ProofTerm>(std::move(p)); }

// --- helpers -------------------------------------------------------------------

namespace {

struct Modal {
  bool diamond;
  GamePtr game;
  FormulaPtr post;
};

std::optional<Modal> as_modal(const FormulaPtr& f) {
  if (f->kind == Formula::Kind::Diamond) return Modal{true, f->game, f->sub};
  if (f->kind == Formula::Kind::Box) return Modal{false, f->game, f->sub};
  return std::nullopt;
}

FormulaPtr mk_modal(bool diamond, const GamePtr& g, const FormulaPtr& post) {
  return diamond ? f_diamond(g, post) : f_box(g, post);
}

[[noreturn]] void fail(const std::string& msg) { throw RuleError(msg); }

VarSet seq_vars(const Sequent& s) {
  VarSet r = all_vars(s.goal);
  for (const auto& f : s.ctx) {
    VarSet v = all_vars(f);
    r.insert(v.begin(), v.end());
  }
  return r;
}

std::string base_name(const std::string& v) {
  return is_primed_name(v) ? v.substr(0, v.size() - 1) : v;
}

// Variable reference for a possibly-primed name.
TermPtr var_term(const std::string& v) {
  return is_primed_name(v) ? t_primed(base_name(v)) : t_var(v);
}

void require_fresh(const std::string& y, const VarSet& used, const char* what) {
  if (is_primed_name(y)) fail(std::string(what) + ": fresh name must be unprimed");
  if (used.count(y) || used.count(primed(y)))
    fail(std::string(what) + ": '" + y + "' is not fresh");
}

// z1, z2, ... — least unused index.
std::string least_fresh(const std::string& z, const VarSet& used) {
  for (long k = 1;; ++k) {
    std::string cand = z + std::to_string(k);
    if (!used.count(cand) && !used.count(primed(cand))) return cand;
  }
}

FormulaPtr conj_all(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) return f_true();
  FormulaPtr acc = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) acc = f_and(acc, fs[i]);
  return acc;
}

FormulaPtr disj_all(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) return f_false();
  FormulaPtr acc = fs[0];
  for (size_t i = 1; i < fs.size(); ++i) acc = f_or(acc, fs[i]);
  return acc;
}

std::vector<TermPtr> metric_parts(const TermPtr& m) {
  if (m->kind == Term::Kind::Tuple) return m->args;
  return {m};
}

// a SUCC b: decrease by delta; tuples lexicographically.
FormulaPtr succ_formula(const std::vector<TermPtr>& a, const std::vector<TermPtr>& b,
                        const TermPtr& delta) {
  std::vector<FormulaPtr> cases;
  for (size_t i = 0; i < a.size(); ++i) {
    std::vector<FormulaPtr> conj;
    for (size_t j = 0; j < i; ++j) conj.push_back(f_cmp(a[j], Rel::Ge, b[j]));
    conj.push_back(f_cmp(a[i], Rel::Ge, t_plus(b[i], delta)));
    cases.push_back(conj_all(conj));
  }
  return disj_all(cases);
}

// a SUCCEQ b: componentwise >=.
FormulaPtr succeq_formula(const std::vector<TermPtr>& a, const std::vector<TermPtr>& b) {
  std::vector<FormulaPtr> conj;
  for (size_t i = 0; i < a.size(); ++i) conj.push_back(f_cmp(a[i], Rel::Ge, b[i]));
  return conj_all(conj);
}

bool ground(const TermPtr& t) { return free_vars(t).empty(); }

// Certified positivity of a ground term via interval refinement.
bool certified_positive(const TermPtr& t) {
  if (!ground(t)) return false;
  try {
    CReal v = eval_creal(t, State());
    for (long k = 4; k <= 128; k += 12) {
      Interval iv = v.refine(k);
      if (sgn(iv.lo) > 0) return true;
      if (sgn(iv.hi) <= 0) return false;
    }
  } catch (const EvalError&) {
  }
  return false;
}

FormulaPtr quantify_all(const std::vector<std::string>& vars, FormulaPtr body) {
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = f_forall(*it, body);
  return body;
}

}  // namespace

// --- rule premises ----------------------------------------------------------------

std::vector<Sequent> apply_rule(const Sequent& seq, const ProofTerm& p) {
  const FormulaPtr& goal = seq.goal;
  auto modal = as_modal(goal);
  auto need_modal = [&](bool diamond, Game::Kind k, const char* rule) -> Modal {
    if (!modal || modal->diamond != diamond || modal->game->kind != k)
      fail(std::string(rule) + ": conclusion does not have the required shape, got " +
           pretty(goal));
    return *modal;
  };
  auto need_any_modal = [&](Game::Kind k, const char* rule) -> Modal {
    if (!modal || modal->game->kind != k)
      fail(std::string(rule) + ": conclusion does not have the required shape, got " +
           pretty(goal));
    return *modal;
  };
  auto fml = [&](size_t i, const char* rule) -> FormulaPtr {
    if (p.formulas.size() <= i) fail(std::string(rule) + ": missing formula payload");
    return desugar(p.formulas[i]);
  };
  auto trm = [&](size_t i, const char* rule) -> TermPtr {
    if (p.terms.size() <= i) fail(std::string(rule) + ": missing term payload");
    return p.terms[i];
  };
  auto nam = [&](size_t i, const char* rule) -> std::string {
    if (p.names.size() <= i) fail(std::string(rule) + ": missing name payload");
    return p.names[i];
  };
  auto gam = [&](size_t i, const char* rule) -> GamePtr {
    if (p.games.size() <= i) fail(std::string(rule) + ": missing game payload");
    return desugar_game(p.games[i]);
  };
  auto with = [&](const FormulaPtr& extra) {
    std::vector<FormulaPtr> ctx = seq.ctx;
    ctx.push_back(extra);
    return ctx;
  };

  switch (p.rule) {
    case RuleId::Hyp: {
      if (p.index < 0 || static_cast<size_t>(p.index) >= seq.ctx.size())
        fail("hyp: index out of range");
      if (!formula_eq(seq.ctx[p.index], goal))
        fail("hyp: hypothesis " + std::to_string(p.index) + " is " +
             pretty(seq.ctx[p.index]) + ", not the goal " + pretty(goal));
      return {};
    }
    case RuleId::Arith:
      return {};

    // --- propositional ------------------------------------------------------
    case RuleId::BoxChoiceI: {
      Modal m = need_modal(false, Game::Kind::Choice, "[u]I");
      return {{seq.ctx, f_box(m.game->left, m.post)},
              {seq.ctx, f_box(m.game->right, m.post)}};
    }
    case RuleId::BoxChoiceE1:
    case RuleId::BoxChoiceE2: {
      // conclusion [α]φ (resp. [β]φ); payload is the other branch
      if (!modal || modal->diamond) fail("[u]E: conclusion must be a box modality");
      GamePtr other = gam(0, "[u]E");
      GamePtr both = p.rule == RuleId::BoxChoiceE1 ? g_choice(modal->game, other)
                                                   : g_choice(other, modal->game);
      return {{seq.ctx, f_box(both, modal->post)}};
    }
    case RuleId::DiaChoiceI1: {
      Modal m = need_modal(true, Game::Kind::Choice, "<u>I1");
      return {{seq.ctx, f_diamond(m.game->left, m.post)}};
    }
    case RuleId::DiaChoiceI2: {
      Modal m = need_modal(true, Game::Kind::Choice, "<u>I2");
      return {{seq.ctx, f_diamond(m.game->right, m.post)}};
    }
    case RuleId::DiaChoiceE: {
      FormulaPtr a = fml(0, "<u>E");
      auto am = as_modal(a);
      if (!am || !am->diamond || am->game->kind != Game::Kind::Choice)
        fail("<u>E: payload must be a diamond choice formula");
      return {{seq.ctx, a},
              {with(f_diamond(am->game->left, am->post)), goal},
              {with(f_diamond(am->game->right, am->post)), goal}};
    }
    case RuleId::DiaTestI: {
      Modal m = need_modal(true, Game::Kind::Test, "<?>I");
      return {{seq.ctx, m.game->fml}, {seq.ctx, m.post}};
    }
    case RuleId::DiaTestE1: {
      FormulaPtr psi = fml(0, "<?>E1");
      return {{seq.ctx, f_diamond(g_test(goal), psi)}};
    }
    case RuleId::DiaTestE2: {
      FormulaPtr phi = fml(0, "<?>E2");
      return {{seq.ctx, f_diamond(g_test(phi), goal)}};
    }
    case RuleId::BoxTestI: {
      Modal m = need_modal(false, Game::Kind::Test, "[?]I");
      return {{with(m.game->fml), m.post}};
    }
    case RuleId::BoxTestE: {
      FormulaPtr phi = fml(0, "[?]E");
      return {{seq.ctx, f_box(g_test(phi), goal)}, {seq.ctx, phi}};
    }

    // --- first-order ----------------------------------------------------------
    case RuleId::BoxAnyI: {
      Modal m = need_modal(false, Game::Kind::AssignAny, "[:*]I");
      std::string x = m.game->var, y = nam(0, "[:*]I");
      require_fresh(y, seq_vars(seq), "[:*]I");
      std::vector<FormulaPtr> ctx;
      for (const auto& f : seq.ctx) ctx.push_back(rename(f, x, y));
      return {{ctx, m.post}};
    }
    case RuleId::BoxAnyE: {
      FormulaPtr all = fml(0, "[:*]E");
      auto am = as_modal(all);
      if (!am || am->diamond || am->game->kind != Game::Kind::AssignAny)
        fail("[:*]E: payload must be a universal ([x:=*]) formula");
      TermPtr f = trm(0, "[:*]E");
      FormulaPtr inst;
      try {
        inst = substitute(am->post, am->game->var, f);
      } catch (const AdmissibilityError& e) {
        fail(std::string("[:*]E: ") + e.what());
      }
      if (!formula_eq(desugar(inst), goal))
        fail("[:*]E: instantiated formula " + pretty(inst) + " is not the goal");
      return {{seq.ctx, all}};
    }
    case RuleId::DiaAnyI: {
      // The premise is an honest assignment of the witness, so no
      // substitution (and no admissibility condition) is involved; the
      // example controller's witness mentions plant-bound variables.
      Modal m = need_modal(true, Game::Kind::AssignAny, "<:*>I");
      TermPtr f = trm(0, "<:*>I");
      return {{seq.ctx, f_diamond(g_assign(m.game->var, f), m.post)}};
    }
    case RuleId::DiaAnyE: {
      std::string x = nam(0, "<:*>E");
      FormulaPtr phi = fml(0, "<:*>E");
      if (free_vars(goal).count(x) || free_vars(goal).count(primed(x)))
        fail("<:*>E: " + x + " must not be free in the conclusion");
      FormulaPtr herbrand = desugar(f_forall(x, f_imp(phi, goal)));
      return {{seq.ctx, f_diamond(g_assign_any(x), phi)}, {seq.ctx, herbrand}};
    }
    case RuleId::SeqI: {
      Modal m = need_any_modal(Game::Kind::Seq, ";I");
      return {{seq.ctx, mk_modal(m.diamond, m.game->left,
                                 mk_modal(m.diamond, m.game->right, m.post))}};
    }
    case RuleId::AssignI: {
      Modal m = need_any_modal(Game::Kind::Assign, ":=I");
      std::string x = m.game->var, y = nam(0, ":=I");
      require_fresh(y, seq_vars(seq), ":=I");
      std::vector<FormulaPtr> ctx;
      if (is_primed_name(x)) {
        // Renaming works on base-name transpositions; a primed target can
        // only be handled when nothing needs renaming.
        for (const auto& f : seq.ctx)
          if (free_vars(f).count(x))
            fail(":=I: cannot rename primed assignment target " + x +
                 " occurring in the context");
        if (free_vars(m.game->term).count(x))
          fail(":=I: primed assignment target may not occur in its own rhs");
        ctx = seq.ctx;
        ctx.push_back(f_cmp(var_term(x), Rel::Eq, m.game->term));
      } else {
        for (const auto& f : seq.ctx) ctx.push_back(rename(f, x, y));
        ctx.push_back(f_cmp(var_term(x), Rel::Eq, rename(m.game->term, x, y)));
      }
      return {{ctx, m.post}};
    }
    case RuleId::Mon: {
      if (!modal) fail("M: conclusion must be a modality");
      FormulaPtr phi = fml(0, "M");
      // Γ^α: bound variables of α freshly renamed in the context.
      VarSet used = seq_vars(seq);
      VarSet av = all_vars(phi);
      used.insert(av.begin(), av.end());
      std::set<std::string> bases;
      for (const auto& v : bound_vars(modal->game)) bases.insert(base_name(v));
      std::vector<FormulaPtr> ctx = seq.ctx;
      for (const auto& z : bases) {
        std::string zf = least_fresh(z, used);
        used.insert(zf);
        for (auto& f : ctx) f = rename(f, z, zf);
      }
      ctx.push_back(phi);
      return {{seq.ctx, mk_modal(modal->diamond, modal->game, phi)}, {ctx, modal->post}};
    }
    case RuleId::DualI: {
      Modal m = need_any_modal(Game::Kind::Dual, "^dI");
      return {{seq.ctx, mk_modal(!m.diamond, m.game->left, m.post)}};
    }

    // --- loops ------------------------------------------------------------------
    case RuleId::DiaRepE: {
      FormulaPtr a = fml(0, "<*>E");
      auto am = as_modal(a);
      if (!am || !am->diamond || am->game->kind != Game::Kind::Repeat)
        fail("<*>E: payload must be a diamond repetition formula");
      return {{seq.ctx, a},
              {with(am->post), goal},
              {with(f_diamond(am->game->left, a)), goal}};
    }
    case RuleId::BoxRepE: {
      FormulaPtr a = fml(0, "[*]E");
      auto am = as_modal(a);
      if (!am || am->diamond || am->game->kind != Game::Kind::Repeat)
        fail("[*]E: payload must be a box repetition formula");
      FormulaPtr unrolled =
          desugar(f_and(am->post, f_box(am->game->left, a)));
      if (!formula_eq(unrolled, goal))
        fail("[*]E: goal must be φ ∧ [α][α*]φ for the payload formula");
      return {{seq.ctx, a}};
    }
    case RuleId::DiaRepS: {
      Modal m = need_modal(true, Game::Kind::Repeat, "<*>S");
      return {{seq.ctx, m.post}};
    }
    case RuleId::BoxRepR: {
      Modal m = need_modal(false, Game::Kind::Repeat, "[*]R");
      return {{seq.ctx, desugar(f_and(m.post, f_box(m.game->left, goal)))}};
    }
    case RuleId::DiaRepG: {
      Modal m = need_modal(true, Game::Kind::Repeat, "<*>G");
      return {{seq.ctx, f_diamond(m.game->left, goal)}};
    }
    case RuleId::Loop: {
      Modal m = need_modal(false, Game::Kind::Repeat, "loop");
      FormulaPtr inv = fml(0, "loop");
      return {{seq.ctx, inv},
              {{inv}, f_box(m.game->left, inv)},
              {{inv}, m.post}};
    }
    case RuleId::FP: {
      FormulaPtr a = fml(0, "FP");
      auto am = as_modal(a);
      if (!am || !am->diamond || am->game->kind != Game::Kind::Repeat)
        fail("FP: payload must be a diamond repetition formula");
      return {{seq.ctx, a},
              {{am->post}, goal},
              {{f_diamond(am->game->left, goal)}, goal}};
    }
    case RuleId::DiaRepI: {
      Modal m = need_modal(true, Game::Kind::Repeat, "<*>I");
      FormulaPtr inv = fml(0, "<*>I");
      TermPtr metric = trm(0, "<*>I"), zero = trm(1, "<*>I"), delta = trm(2, "<*>I");
      std::vector<TermPtr> ms = metric_parts(metric), zs = metric_parts(zero);
      if (ms.size() != zs.size())
        fail("<*>I: metric and zero element have different arities");
      if (p.names.size() != ms.size())
        fail("<*>I: need one fresh name per metric component");
      if (!certified_positive(delta))
        fail("<*>I: descent margin delta must be a certified-positive ground term");
      VarSet used = seq_vars(seq);
      for (const auto& t : {metric, zero, delta}) {
        VarSet v = all_vars(t);
        used.insert(v.begin(), v.end());
      }
      VarSet iv = all_vars(inv);
      used.insert(iv.begin(), iv.end());
      std::vector<TermPtr> m0s;
      for (const auto& y : p.names) {
        require_fresh(y, used, "<*>I");
        used.insert(y);
        m0s.push_back(t_var(y));
      }
      std::vector<FormulaPtr> m0eqs;
      for (size_t i = 0; i < ms.size(); ++i)
        m0eqs.push_back(f_cmp(m0s[i], Rel::Eq, ms[i]));
      FormulaPtr bctx = desugar(f_and(succ_formula(ms, zs, delta), conj_all(m0eqs)));
      FormulaPtr bgoal = f_diamond(
          m.game->left, desugar(f_and(inv, succ_formula(m0s, ms, delta))));
      FormulaPtr cctx = desugar(succeq_formula(zs, ms));
      return {{seq.ctx, inv},
              {{inv, bctx}, bgoal},
              {{inv, cctx}, m.post}};
    }

    // --- ODEs ----------------------------------------------------------------------
    case RuleId::DI: {
      Modal m = need_modal(false, Game::Kind::ODE, "DI");
      ODESystem sys;
      try {
        sys = ODESystem::from_game(m.game);
      } catch (const std::invalid_argument& e) {
        fail(std::string("DI: ") + e.what());
      }
      FormulaPtr dphi;
      try {
        dphi = formula_differential(m.post);
      } catch (const NonDifferentiable& e) {
        fail(std::string("DI: ") + e.what());
      }
      FormulaPtr boxed = desugar(dphi);
      for (auto it = sys.equations.rbegin(); it != sys.equations.rend(); ++it)
        boxed = f_box(g_assign(primed(it->first), it->second), boxed);
      std::vector<std::string> xs;
      for (const auto& [x, f] : sys.equations) xs.push_back(x);
      FormulaPtr prem = desugar(quantify_all(xs, f_imp(sys.domain, boxed)));
      return {{seq.ctx, m.post}, {seq.ctx, prem}};
    }
    case RuleId::DC: {
      Modal m = need_modal(false, Game::Kind::ODE, "DC");
      FormulaPtr cut = fml(0, "DC");
      GamePtr strengthened = g_ode(m.game->equations, desugar(f_and(m.game->domain, cut)));
      return {{seq.ctx, f_box(m.game, cut)},
              {seq.ctx, f_box(strengthened, m.post)}};
    }
    case RuleId::DW: {
      Modal m = need_modal(false, Game::Kind::ODE, "DW");
      std::vector<std::string> vs;
      for (const auto& [x, f] : m.game->equations) {
        vs.push_back(x);
        vs.push_back(primed(x));
      }
      FormulaPtr prem = desugar(quantify_all(vs, f_imp(m.game->domain, m.post)));
      return {{seq.ctx, prem}};
    }
    case RuleId::DG: {
      Modal m = need_modal(false, Game::Kind::ODE, "DG");
      std::string y = nam(0, "DG");
      TermPtr a = trm(0, "DG"), b = trm(1, "DG"), w = trm(2, "DG");
      VarSet used = seq_vars(seq);
      require_fresh(y, used, "DG");
      for (const auto& t : {a, b, w})
        if (free_vars(t).count(y) || free_vars(t).count(primed(y)))
          fail("DG: ghost variable may not occur in its own coefficients or witness");
      auto eqs = m.game->equations;
      eqs.emplace_back(y, t_plus(t_times(a, t_var(y)), b));
      GamePtr ghost = g_ode(std::move(eqs), m.game->domain);
      return {{seq.ctx, f_diamond(g_assign(y, w), f_box(ghost, m.post))}};
    }
    case RuleId::DV: {
      Modal m = need_modal(true, Game::Kind::ODE, "DV");
      std::string clock = nam(0, "DV");
      TermPtr dur = trm(0, "DV"), eps = trm(1, "DV"), h = trm(2, "DV"), g = trm(3, "DV");
      VarSet used = seq_vars(seq);
      require_fresh(clock, used, "DV");
      // x, x', t, t' must not be free in d or eps
      VarSet banned;
      for (const auto& [x, f] : m.game->equations) {
        banned.insert(x);
        banned.insert(primed(x));
      }
      banned.insert(clock);
      banned.insert(primed(clock));
      for (const auto& t : {dur, eps})
        for (const auto& v : free_vars(t))
          if (banned.count(v)) fail("DV: duration/rate may not mention " + v);
      // premise 1: <clock:=0; {clock'=1, x'=f & ψ}> clock >= d
      auto eqs = m.game->equations;
      eqs.insert(eqs.begin(), {clock, t_int(1)});
      GamePtr timed = g_ode(eqs, m.game->domain);
      FormulaPtr p1 = f_diamond(g_seq(g_assign(clock, t_int(0)), timed),
                                f_cmp(t_var(clock), Rel::Ge, dur));
      // premise 2: [{x'=f}] (h)' - (g)' >= eps, with expanded differentials
      FormulaPtr deriv;
      try {
        deriv = f_cmp(t_minus(total_differential(expand_differentials(h)),
                              total_differential(expand_differentials(g))),
                      Rel::Ge, eps);
      } catch (const NonDifferentiable& e) {
        fail(std::string("DV: ") + e.what());
      }
      GamePtr freeode = g_ode(m.game->equations, f_true());
      FormulaPtr p2 = f_box(desugar_game(freeode), desugar(deriv));
      // premise 3: ψ, h >= g ⊢ φ
      std::vector<FormulaPtr> p3ctx{m.game->domain, f_cmp(h, Rel::Ge, g)};
      // premise 4: d > 0 ∧ eps > 0 ∧ h - g >= -d*eps
      FormulaPtr p4 = desugar(f_and(
          f_and(f_cmp(dur, Rel::Gt, t_int(0)), f_cmp(eps, Rel::Gt, t_int(0))),
          f_cmp(t_minus(h, g), Rel::Ge, t_neg(t_times(dur, eps)))));
      return {{seq.ctx, desugar(p1)}, {seq.ctx, p2}, {p3ctx, m.post}, {seq.ctx, p4}};
    }
    case RuleId::BSolve:
    case RuleId::DSolve: {
      bool dia = p.rule == RuleId::DSolve;
      const char* rn = dia ? "dsolve" : "bsolve";
      Modal m = need_modal(dia, Game::Kind::ODE, rn);
      ODESystem sys;
      try {
        sys = ODESystem::from_game(m.game);
      } catch (const std::invalid_argument& e) {
        fail(std::string(rn) + ": " + e.what());
      }
      SymbolicSolution sln;
      try {
        sln = solve_nilpotent(sys);  // verified; nilpotent => unique global solution
      } catch (const NotNilpotent& e) {
        fail(std::string(rn) + ": solution side condition not dischargeable: " + e.what());
      }
      std::string tau = nam(0, rn);
      require_fresh(tau, seq_vars(seq), rn);
      for (const auto& [x, f] : sys.equations)
        if (free_vars(m.post).count(primed(x)))
          fail(std::string(rn) + ": " + primed(x) + " must not be free in the postcondition");
      auto subst_at = [&](const FormulaPtr& f, const TermPtr& time) {
        Subst sub;
        for (const auto& [x, rhs] : sys.equations) sub[x] = sln.value_term(x, time);
        try {
          return desugar(substitute(f, sub));
        } catch (const AdmissibilityError& e) {
          fail(std::string(rn) + ": " + e.what());
        }
      };
      if (!dia) {
        // Γ, τ>=0, ψ(sln τ) ⊢ φ(sln τ)
        std::vector<FormulaPtr> ctx = seq.ctx;
        ctx.push_back(f_cmp(t_var(tau), Rel::Ge, t_int(0)));
        ctx.push_back(subst_at(m.game->domain, t_var(tau)));
        return {{ctx, subst_at(m.post, t_var(tau))}};
      }
      TermPtr dur = trm(0, "dsolve");
      if (free_vars(dur).count(tau)) fail("dsolve: duration may not mention the time variable");
      std::vector<FormulaPtr> domctx = seq.ctx;
      domctx.push_back(f_cmp(t_var(tau), Rel::Ge, t_int(0)));
      domctx.push_back(f_cmp(t_var(tau), Rel::Le, dur));
      return {{seq.ctx, f_cmp(dur, Rel::Ge, t_int(0))},
              {domctx, subst_at(m.game->domain, t_var(tau))},
              {seq.ctx, subst_at(m.post, dur)}};
    }

    case RuleId::GV: {
      if (!modal || !modal->diamond) fail("GV: conclusion must be a diamond modality");
      FormulaPtr q = fml(0, "GV");
      VarSet bv = bound_vars(modal->game);
      for (const auto& v : free_vars(modal->post))
        if (bv.count(v))
          fail("GV: postcondition must be constant over the game, but " + v + " is bound");
      return {{seq.ctx, modal->post}, {seq.ctx, f_diamond(modal->game, q)}};
    }
  }
  fail("unknown rule");
}

// --- checking ------------------------------------------------------------------------

namespace {

struct Checker {
  CheckResult result;

  size_t expected_children(RuleId r) {
    switch (r) {
      case RuleId::Hyp:
      case RuleId::Arith:
        return 0;
      case RuleId::BoxChoiceI:
      case RuleId::DiaTestI:
      case RuleId::BoxTestE:
      case RuleId::Mon:
      case RuleId::DiaAnyE:
      case RuleId::DI:
      case RuleId::DC:
      case RuleId::GV:
        return 2;
      case RuleId::DiaChoiceE:
      case RuleId::DiaRepE:
      case RuleId::Loop:
      case RuleId::FP:
      case RuleId::DiaRepI:
      case RuleId::DSolve:
        return 3;
      case RuleId::DV:
        return 4;
      default:
        return 1;
    }
  }

  bool run(const Sequent& seq, const ProofTermPtr& M, const std::string& path) {
    std::vector<Sequent> premises;
    try {
      if (M->children.size() != expected_children(M->rule))
        throw RuleError(std::string(rule_name(M->rule)) + ": expected " +
                        std::to_string(expected_children(M->rule)) + " subproofs, got " +
                        std::to_string(M->children.size()));
      premises = apply_rule(seq, *M);
    } catch (const RuleError& e) {
      result.failure = CheckFailure{M->rule, e.what(), path};
      return false;
    }
    if (M->rule == RuleId::Arith) {
      ArithVerdict v = discharge_arith(seq);
      result.obligations.push_back({seq, v, M->label, path});
      if (v == ArithVerdict::Refuted) {
        result.failure = CheckFailure{RuleId::Arith, "oracle refuted the leaf", path};
        return false;
      }
      return true;
    }
    if (M->rule == RuleId::Hyp) return true;
    for (size_t i = 0; i < premises.size(); ++i) {
      std::string sub = path.empty() ? std::to_string(i) : path + "." + std::to_string(i);
      if (!run(premises[i], M->children[i], sub)) return false;
    }
    return true;
  }
};

}  // namespace

CheckResult check(const std::vector<FormulaPtr>& ctx, const ProofTermPtr& M,
                  const FormulaPtr& phi) {
  Sequent seq;
  for (const auto& f : ctx) seq.ctx.push_back(desugar(f));
  seq.goal = desugar(phi);
  Checker c;
  c.result.checked = c.run(seq, M, "");
  return c.result;
}

// --- the arithmetic oracle ------------------------------------------------------------

namespace {

enum class TV { True, False, Unknown };

TV tv_and(TV a, TV b) {
  if (a == TV::False || b == TV::False) return TV::False;
  if (a == TV::True && b == TV::True) return TV::True;
  return TV::Unknown;
}
TV tv_or(TV a, TV b) {
  if (a == TV::True || b == TV::True) return TV::True;
  if (a == TV::False && b == TV::False) return TV::False;
  return TV::Unknown;
}
TV tv_not(TV a) {
  if (a == TV::True) return TV::False;
  if (a == TV::False) return TV::True;
  return TV::Unknown;
}

// Extended interval with optional endpoints (absent = unbounded).
struct XI {
  std::optional<Rat> lo, hi;
  static XI point(const Rat& r) { return {r, r}; }
  static XI top() { return {std::nullopt, std::nullopt}; }
};

XI xi_neg(const XI& a) {
  XI r;
  if (a.hi) r.lo = -*a.hi;
  if (a.lo) r.hi = -*a.lo;
  return r;
}

XI xi_add(const XI& a, const XI& b) {
  XI r;
  if (a.lo && b.lo) r.lo = *a.lo + *b.lo;
  if (a.hi && b.hi) r.hi = *a.hi + *b.hi;
  return r;
}

// Conservative multiplication: exact only when one side is a point or both
// bounded; otherwise falls back to top unless signs help.
XI xi_mul(const XI& a, const XI& b) {
  if (a.lo && a.hi && b.lo && b.hi) {
    Rat p1 = *a.lo * *b.lo, p2 = *a.lo * *b.hi, p3 = *a.hi * *b.lo, p4 = *a.hi * *b.hi;
    return {std::min(std::min(p1, p2), std::min(p3, p4)),
            std::max(std::max(p1, p2), std::max(p3, p4))};
  }
  // nonneg * nonneg stays nonneg
  XI r = XI::top();
  auto nonneg = [](const XI& x) { return x.lo && sgn(*x.lo) >= 0; };
  auto nonpos = [](const XI& x) { return x.hi && sgn(*x.hi) <= 0; };
  if (nonneg(a) && nonneg(b)) r.lo = Rat(0);
  if (nonpos(a) && nonpos(b)) r.lo = Rat(0);
  if (nonneg(a) && nonpos(b)) r.hi = Rat(0);
  if (nonpos(a) && nonneg(b)) r.hi = Rat(0);
  return r;
}

XI xi_min(const XI& a, const XI& b) {
  XI r;
  if (a.lo && b.lo) r.lo = std::min(*a.lo, *b.lo);
  if (a.hi && b.hi) r.hi = std::min(*a.hi, *b.hi);
  else if (a.hi) r.hi = a.hi;
  else if (b.hi) r.hi = b.hi;
  return r;
}
XI xi_max(const XI& a, const XI& b) {
  XI r;
  if (a.lo && b.lo) r.lo = std::max(*a.lo, *b.lo);
  else if (a.lo) r.lo = a.lo;
  else if (b.lo) r.lo = b.lo;
  if (a.hi && b.hi) r.hi = std::max(*a.hi, *b.hi);
  return r;
}

using BoundsEnv = std::map<std::string, XI>;

std::optional<XI> xi_eval(const TermPtr& t, const BoundsEnv& env) {
  switch (t->kind) {
    case Term::Kind::Rational: return XI::point(t->value);
    case Term::Kind::Var:
    case Term::Kind::PrimedVar: {
      std::string n = t->kind == Term::Kind::Var ? t->name : t->name + "'";
      auto it = env.find(n);
      return it == env.end() ? XI::top() : it->second;
    }
    case Term::Kind::Plus: {
      auto a = xi_eval(t->args[0], env), b = xi_eval(t->args[1], env);
      if (!a || !b) return std::nullopt;
      return xi_add(*a, *b);
    }
    case Term::Kind::Times: {
      auto a = xi_eval(t->args[0], env), b = xi_eval(t->args[1], env);
      if (!a || !b) return std::nullopt;
      return xi_mul(*a, *b);
    }
    case Term::Kind::Neg: {
      auto a = xi_eval(t->args[0], env);
      if (!a) return std::nullopt;
      return xi_neg(*a);
    }
    case Term::Kind::Min: {
      auto a = xi_eval(t->args[0], env), b = xi_eval(t->args[1], env);
      if (!a || !b) return std::nullopt;
      return xi_min(*a, *b);
    }
    case Term::Kind::Max: {
      auto a = xi_eval(t->args[0], env), b = xi_eval(t->args[1], env);
      if (!a || !b) return std::nullopt;
      return xi_max(*a, *b);
    }
    case Term::Kind::Sqrt: {
      auto a = xi_eval(t->args[0], env);
      if (!a) return std::nullopt;
      XI r;
      r.lo = Rat(0);
      if (a->hi) {
        if (sgn(*a->hi) < 0) return std::nullopt;
        Rat lo, hi;
        sqrt_bounds(*a->hi, 64, lo, hi);
        r.hi = hi;
      }
      return r;
    }
    case Term::Kind::Div: {
      auto a = xi_eval(t->args[0], env), b = xi_eval(t->args[1], env);
      if (!a || !b) return std::nullopt;
      // divide by a bounded sign-definite interval via its reciprocal
      if (b->lo && b->hi && (sgn(*b->lo) > 0 || sgn(*b->hi) < 0)) {
        XI recip{Rat(1) / *b->hi, Rat(1) / *b->lo};
        return xi_mul(*a, recip);
      }
      return XI::top();
    }
    default:
      return std::nullopt;
  }
}

struct Oracle {
  BoundsEnv env;
  Subst bindings;
  std::vector<FormulaPtr> facts;  // rewritten context atoms
  bool ctx_captured = true;       // every context atom reflected in env/bindings

  // Chained rewriting with context equations, to a fixpoint.
  TermPtr rewrite(const TermPtr& t) {
    if (bindings.empty()) return t;
    TermPtr cur = t;
    for (size_t i = 0; i <= bindings.size(); ++i) {
      TermPtr next;
      try {
        next = substitute(cur, bindings);
      } catch (const AdmissibilityError&) {
        return cur;
      }
      if (term_eq(next, cur)) break;
      cur = next;
    }
    return cur;
  }

  // True when a context fact syntactically settles l rel r.
  bool fact_implies(const TermPtr& l, Rel rel, const TermPtr& r) {
    for (const auto& f : facts) {
      if (f->kind != Formula::Kind::Cmp) continue;
      bool same = term_eq(f->lhs, l) && term_eq(f->rhs, r);
      bool flipped = term_eq(f->lhs, r) && term_eq(f->rhs, l);
      if (!same && !flipped) continue;
      Rel have = f->rel;
      if (flipped) {
        switch (have) {
          case Rel::Le: have = Rel::Ge; break;
          case Rel::Lt: have = Rel::Gt; break;
          case Rel::Ge: have = Rel::Le; break;
          case Rel::Gt: have = Rel::Lt; break;
          default: break;
        }
      }
      auto implies = [](Rel h, Rel w) {
        if (h == w) return true;
        switch (h) {
          case Rel::Eq: return w == Rel::Le || w == Rel::Ge;
          case Rel::Lt: return w == Rel::Le || w == Rel::Ne;
          case Rel::Gt: return w == Rel::Ge || w == Rel::Ne;
          default: return false;
        }
      };
      if (implies(have, rel)) return true;
    }
    return false;
  }

  // Decide one comparison; exact certifications only.
  TV atom(TermPtr l, Rel rel, TermPtr r) {
    l = rewrite(l);
    r = rewrite(r);
    if (fact_implies(l, rel, r)) return TV::True;
    TermPtr diff = t_minus(l, r);
    try {
      diff = expand_differentials(diff);
    } catch (const NonDifferentiable&) {
      return TV::Unknown;
    }

    // polynomial normalization (catches x >= x+1, x = x, ...)
    if (auto p = Poly::from_term(diff)) {
      if (p->is_zero()) return decide_sign(Rat(0), rel);
      TermPtr nt = p->to_term();
      if (nt->kind == Term::Kind::Rational) return decide_sign(nt->value, rel);
      if (nt->kind == Term::Kind::Neg && nt->args[0]->kind == Term::Kind::Rational)
        return decide_sign(-nt->args[0]->value, rel);
      diff = nt;
    }

    if (term_eq(l, r)) return decide_sign(Rat(0), rel);

    if (free_vars(diff).empty()) return ground_atom(diff, rel);

    // interval bound propagation from the context
    if (auto xi = xi_eval(diff, env)) {
      switch (rel) {
        case Rel::Le:
          if (xi->hi && sgn(*xi->hi) <= 0) return TV::True;
          if (xi->lo && sgn(*xi->lo) > 0) return TV::False;
          break;
        case Rel::Lt:
          if (xi->hi && sgn(*xi->hi) < 0) return TV::True;
          if (xi->lo && sgn(*xi->lo) >= 0) return TV::False;
          break;
        case Rel::Ge:
          if (xi->lo && sgn(*xi->lo) >= 0) return TV::True;
          if (xi->hi && sgn(*xi->hi) < 0) return TV::False;
          break;
        case Rel::Gt:
          if (xi->lo && sgn(*xi->lo) > 0) return TV::True;
          if (xi->hi && sgn(*xi->hi) <= 0) return TV::False;
          break;
        case Rel::Eq:
          if (xi->lo && sgn(*xi->lo) > 0) return TV::False;
          if (xi->hi && sgn(*xi->hi) < 0) return TV::False;
          break;
        case Rel::Ne:
          if (xi->lo && sgn(*xi->lo) > 0) return TV::True;
          if (xi->hi && sgn(*xi->hi) < 0) return TV::True;
          break;
      }
    }
    return TV::Unknown;
  }

  static TV decide_sign(const Rat& d, Rel rel) {
    int s = sgn(d);
    switch (rel) {
      case Rel::Le: return s <= 0 ? TV::True : TV::False;
      case Rel::Lt: return s < 0 ? TV::True : TV::False;
      case Rel::Eq: return s == 0 ? TV::True : TV::False;
      case Rel::Ne: return s != 0 ? TV::True : TV::False;
      case Rel::Gt: return s > 0 ? TV::True : TV::False;
      case Rel::Ge: return s >= 0 ? TV::True : TV::False;
    }
    return TV::Unknown;
  }

  TV ground_atom(const TermPtr& diff, Rel rel) {
    try {
      CReal d = eval_creal(diff, State());
      for (long k = 8; k <= 256; k *= 2) {
        Interval iv = d.refine(k);
        bool zero_in = sgn(iv.lo) <= 0 && sgn(iv.hi) >= 0;
        bool exact_zero = sgn(iv.lo) == 0 && sgn(iv.hi) == 0;
        switch (rel) {
          case Rel::Le:
            if (sgn(iv.hi) <= 0) return TV::True;
            if (sgn(iv.lo) > 0) return TV::False;
            break;
          case Rel::Lt:
            if (sgn(iv.hi) < 0) return TV::True;
            if (sgn(iv.lo) >= 0) return TV::False;
            break;
          case Rel::Ge:
            if (sgn(iv.lo) >= 0) return TV::True;
            if (sgn(iv.hi) < 0) return TV::False;
            break;
          case Rel::Gt:
            if (sgn(iv.lo) > 0) return TV::True;
            if (sgn(iv.hi) <= 0) return TV::False;
            break;
          case Rel::Eq:
            if (exact_zero) return TV::True;
            if (!zero_in) return TV::False;
            break;
          case Rel::Ne:
            if (!zero_in) return TV::True;
            if (exact_zero) return TV::False;
            break;
        }
      }
    } catch (const EvalError&) {
    }
    return TV::Unknown;
  }

  // The decidable epsilon-comparison axiom: f > g ∨ f < g + eps (eps ground
  // positive), in either disjunct order.
  bool eps_axiom(const FormulaPtr& a, const FormulaPtr& b) {
    auto match = [&](const FormulaPtr& gt, const FormulaPtr& lt) {
      if (gt->kind != Formula::Kind::Cmp || lt->kind != Formula::Kind::Cmp) return false;
      if (gt->rel != Rel::Gt || lt->rel != Rel::Lt) return false;
      // gt: f > g ; lt: f < g + eps
      if (!term_eq(rewrite(gt->lhs), rewrite(lt->lhs))) return false;
      TermPtr rhs = rewrite(lt->rhs);
      if (rhs->kind != Term::Kind::Plus) return false;
      if (!term_eq(rewrite(gt->rhs), rhs->args[0])) return false;
      return certified_positive(rhs->args[1]);
    };
    return match(a, b) || match(b, a);
  }

  TV formula(const FormulaPtr& f) {
    switch (f->kind) {
      case Formula::Kind::Cmp: return atom(f->lhs, f->rel, f->rhs);
      case Formula::Kind::Diamond: {
        const GamePtr& g = f->game;
        if (g->kind == Game::Kind::Test)  // conjunction
          return tv_and(formula(g->fml), formula(f->sub));
        if (g->kind == Game::Kind::Choice && g->left->kind == Game::Kind::Test &&
            g->right->kind == Game::Kind::Test) {  // disjunction
          if (eps_axiom(g->left->fml, g->right->fml)) return tv_and(TV::True, formula(f->sub));
          return tv_and(tv_or(formula(g->left->fml), formula(g->right->fml)),
                        formula(f->sub));
        }
        return TV::Unknown;
      }
      case Formula::Kind::Box:
        if (f->game->kind == Game::Kind::Test)  // implication
          return tv_or(tv_not(formula(f->game->fml)), formula(f->sub));
        return TV::Unknown;
      default:
        return TV::Unknown;
    }
  }

  // Flatten conjunction shapes into atoms.
  static void flatten_conj(const FormulaPtr& f, std::vector<FormulaPtr>& out) {
    if (f->kind == Formula::Kind::Diamond && f->game->kind == Game::Kind::Test) {
      flatten_conj(f->game->fml, out);
      flatten_conj(f->sub, out);
      return;
    }
    out.push_back(f);
  }

  void learn_context(const std::vector<FormulaPtr>& ctx) {
    std::vector<FormulaPtr> atoms;
    for (const auto& f : ctx) flatten_conj(f, atoms);

    // binding closure: x = t with x not reachable from t through the
    // bindings made so far (ground terms preferred, any acyclic term works)
    bool changed = true;
    std::set<const Formula*> used;
    for (int pass = 0; pass < 2; ++pass) {
      bool want_ground = pass == 0;
      changed = true;
      while (changed) {
        changed = false;
        for (const auto& a : atoms) {
          if (used.count(a.get())) continue;
          if (a->kind != Formula::Kind::Cmp || a->rel != Rel::Eq) continue;
          auto try_bind = [&](const TermPtr& v, const TermPtr& t) {
            if (v->kind != Term::Kind::Var && v->kind != Term::Kind::PrimedVar) return false;
            std::string n = v->kind == Term::Kind::Var ? v->name : v->name + "'";
            if (bindings.count(n)) return false;
            TermPtr rt = rewrite(t);
            VarSet fv = free_vars(rt);
            if (want_ground && !fv.empty()) return false;
            if (fv.count(n)) return false;
            bindings[n] = rt;
            return true;
          };
          if (try_bind(a->lhs, a->rhs) || try_bind(a->rhs, a->lhs)) {
            used.insert(a.get());
            changed = true;
          }
        }
      }
    }
    for (const auto& a : atoms) {
      if (a->kind == Formula::Kind::Cmp)
        facts.push_back(f_cmp(rewrite(a->lhs), a->rel, rewrite(a->rhs)));
    }

    // bound facts: x rel ground
    for (const auto& a : atoms) {
      if (used.count(a.get())) continue;
      if (a->kind != Formula::Kind::Cmp) { ctx_captured = false; continue; }
      TermPtr l = rewrite(a->lhs), r = rewrite(a->rhs);
      auto learn = [&](const TermPtr& v, Rel rel, const TermPtr& t) {
        if (v->kind != Term::Kind::Var && v->kind != Term::Kind::PrimedVar) return false;
        if (!free_vars(t).empty()) return false;
        TermPtr bound = t;
        try {
          Interval iv = eval_creal(bound, State()).refine(64);
          std::string n = v->kind == Term::Kind::Var ? v->name : v->name + "'";
          XI& xi = env.try_emplace(n, XI::top()).first->second;
          switch (rel) {
            case Rel::Ge:
            case Rel::Gt:
              if (!xi.lo || *xi.lo < iv.lo) xi.lo = iv.lo;
              return true;
            case Rel::Le:
            case Rel::Lt:
              if (!xi.hi || *xi.hi > iv.hi) xi.hi = iv.hi;
              return true;
            case Rel::Eq:
              xi.lo = iv.lo;
              xi.hi = iv.hi;
              return true;
            default:
              return false;
          }
        } catch (const EvalError&) {
          return false;
        }
      };
      Rel rel = a->rel;
      Rel flipped = rel == Rel::Le ? Rel::Ge : rel == Rel::Lt ? Rel::Gt
                   : rel == Rel::Ge ? Rel::Le : rel == Rel::Gt ? Rel::Lt : rel;
      bool ok = learn(l, rel, r) || learn(r, flipped, l);
      if (!ok) ctx_captured = false;
    }
    for (const auto& [n, t] : bindings) {
      try {
        Interval iv = eval_creal(t, State()).refine(64);
        env[n] = XI{iv.lo, iv.hi};
      } catch (const EvalError&) {
      }
    }
  }

  // Are all context atoms ground and certified true / any certified false?
  TV context_truth(const std::vector<FormulaPtr>& ctx) {
    TV acc = TV::True;
    for (const auto& f : ctx) acc = tv_and(acc, formula(f));
    return acc;
  }
};

}  // namespace

ArithVerdict discharge_arith(const Sequent& seq) {
  Oracle o;
  o.learn_context(seq.ctx);
  TV goal = o.formula(seq.goal);
  if (goal == TV::True) return ArithVerdict::Proved;

  TV ctx = o.context_truth(seq.ctx);
  if (ctx == TV::False) return ArithVerdict::Proved;  // vacuous
  if (goal == TV::False && (seq.ctx.empty() || (ctx == TV::True && o.ctx_captured)))
    return ArithVerdict::Refuted;
  return ArithVerdict::Assumed;
}

// --- proof files -------------------------------------------------------------------

namespace {

struct SExpr {
  enum class Kind { List, Atom, Str, Int } kind;
  std::string text;
  long num = 0;
  std::vector<SExpr> items;
  int line = 0, col = 0;
};

struct SLexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;
  explicit SLexer(const std::string& s) : src(s) {}

  void advance() {
    if (pos < src.size()) {
      if (src[pos] == '\n') { ++line; col = 1; } else ++col;
      ++pos;
    }
  }
  void skip_ws() {
    for (;;) {
      while (pos < src.size() && isspace(static_cast<unsigned char>(src[pos]))) advance();
      if (pos + 1 < src.size() && src[pos] == '/' && src[pos + 1] == '/') {
        while (pos < src.size() && src[pos] != '\n') advance();
        continue;
      }
      break;
    }
  }
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(line, col, msg); }

  SExpr parse() {
    skip_ws();
    if (pos >= src.size()) fail("unexpected end of proof file");
    SExpr e;
    e.line = line;
    e.col = col;
    char c = src[pos];
    if (c == '(') {
      advance();
      e.kind = SExpr::Kind::List;
      for (;;) {
        skip_ws();
        if (pos >= src.size()) fail("missing ')'");
        if (src[pos] == ')') { advance(); break; }
        e.items.push_back(parse());
      }
      return e;
    }
    if (c == ')') fail("unexpected ')'");
    if (c == '"') {
      advance();
      e.kind = SExpr::Kind::Str;
      while (pos < src.size() && src[pos] != '"') {
        if (src[pos] == '\\' && pos + 1 < src.size()) advance();
        e.text += src[pos];
        advance();
      }
      if (pos >= src.size()) fail("unterminated string");
      advance();
      return e;
    }
    // atom: up to whitespace or parens
    std::string t;
    while (pos < src.size() && !isspace(static_cast<unsigned char>(src[pos])) &&
           src[pos] != '(' && src[pos] != ')')
      {
        t += src[pos];
        advance();
      }
    bool numeric = !t.empty() && (isdigit(static_cast<unsigned char>(t[0])) ||
                                  (t[0] == '-' && t.size() > 1));
    if (numeric) {
      for (size_t i = 1; i < t.size(); ++i)
        if (!isdigit(static_cast<unsigned char>(t[i]))) { numeric = false; break; }
    }
    if (numeric) {
      e.kind = SExpr::Kind::Int;
      e.num = std::stol(t);
    } else {
      e.kind = SExpr::Kind::Atom;
    }
    e.text = t;
    return e;
  }
};

struct ProofBuilder {
  const CdglFile& env;

  [[noreturn]] void fail(const SExpr& at, const std::string& msg) {
    throw ParseError(at.line, at.col, msg);
  }

  ProofTermPtr build(const SExpr& e) {
    if (e.kind != SExpr::Kind::List || e.items.empty() ||
        e.items[0].kind != SExpr::Kind::Atom)
      fail(e, "expected (rule payload... subproof...)");
    auto rid = rule_from_name(e.items[0].text);
    if (!rid) fail(e.items[0], "unknown rule '" + e.items[0].text + "'");

    ProofTerm p;
    p.rule = *rid;
    std::vector<const SExpr*> payload;
    size_t i = 1;
    for (; i < e.items.size() && e.items[i].kind != SExpr::Kind::List; ++i)
      payload.push_back(&e.items[i]);
    for (; i < e.items.size(); ++i) {
      if (e.items[i].kind != SExpr::Kind::List)
        fail(e.items[i], "payloads must precede subproofs");
      p.children.push_back(build(e.items[i]));
    }

    auto want_int = [&](size_t j) {
      if (j >= payload.size() || payload[j]->kind != SExpr::Kind::Int)
        fail(e, std::string(rule_name(p.rule)) + ": expected an integer payload");
      return payload[j]->num;
    };
    auto want_name = [&](size_t j) {
      if (j >= payload.size() || payload[j]->kind != SExpr::Kind::Atom)
        fail(e, std::string(rule_name(p.rule)) + ": expected a variable name payload");
      return payload[j]->text;
    };
    auto want_term = [&](size_t j) {
      if (j >= payload.size() || payload[j]->kind != SExpr::Kind::Str)
        fail(e, std::string(rule_name(p.rule)) + ": expected a quoted term payload");
      return parse_term(payload[j]->text, &env);
    };
    auto want_formula = [&](size_t j) {
      if (j >= payload.size() || payload[j]->kind != SExpr::Kind::Str)
        fail(e, std::string(rule_name(p.rule)) + ": expected a quoted formula payload");
      return parse_formula(payload[j]->text, &env);
    };
    auto want_game = [&](size_t j) {
      if (j >= payload.size() || payload[j]->kind != SExpr::Kind::Str)
        fail(e, std::string(rule_name(p.rule)) + ": expected a quoted game payload");
      return parse_game(payload[j]->text, &env);
    };
    auto exactly = [&](size_t n) {
      if (payload.size() != n)
        fail(e, std::string(rule_name(p.rule)) + ": expected " + std::to_string(n) +
                    " payload items, got " + std::to_string(payload.size()));
    };

    switch (p.rule) {
      case RuleId::Hyp:
        exactly(1);
        p.index = want_int(0);
        break;
      case RuleId::Arith:
        if (payload.size() > 1) exactly(1);
        if (payload.size() == 1) {
          if (payload[0]->kind != SExpr::Kind::Str) fail(e, "arith: label must be a string");
          p.label = payload[0]->text;
        }
        break;
      case RuleId::BoxChoiceE1:
      case RuleId::BoxChoiceE2:
        exactly(1);
        p.games.push_back(want_game(0));
        break;
      case RuleId::DiaChoiceE:
      case RuleId::DiaTestE1:
      case RuleId::DiaTestE2:
      case RuleId::BoxTestE:
      case RuleId::Mon:
      case RuleId::Loop:
      case RuleId::FP:
      case RuleId::DC:
      case RuleId::GV:
      case RuleId::DiaRepE:
      case RuleId::BoxRepE:
        exactly(1);
        p.formulas.push_back(want_formula(0));
        break;
      case RuleId::BoxAnyI:
      case RuleId::AssignI:
      case RuleId::BSolve:
        exactly(1);
        p.names.push_back(want_name(0));
        break;
      case RuleId::BoxAnyE:
        exactly(2);
        p.formulas.push_back(want_formula(0));
        p.terms.push_back(want_term(1));
        break;
      case RuleId::DiaAnyI:
        exactly(1);
        p.terms.push_back(want_term(0));
        break;
      case RuleId::DiaAnyE:
        exactly(2);
        p.names.push_back(want_name(0));
        p.formulas.push_back(want_formula(1));
        break;
      case RuleId::DiaRepI: {
        if (payload.size() < 5)
          fail(e, "<*>I: expected invariant, metric, zero, delta, fresh name(s)");
        p.formulas.push_back(want_formula(0));
        p.terms.push_back(want_term(1));
        p.terms.push_back(want_term(2));
        p.terms.push_back(want_term(3));
        for (size_t j = 4; j < payload.size(); ++j) p.names.push_back(want_name(j));
        break;
      }
      case RuleId::DG:
        exactly(4);
        p.names.push_back(want_name(0));
        p.terms.push_back(want_term(1));
        p.terms.push_back(want_term(2));
        p.terms.push_back(want_term(3));
        break;
      case RuleId::DV:
        exactly(5);
        p.names.push_back(want_name(0));
        p.terms.push_back(want_term(1));
        p.terms.push_back(want_term(2));
        p.terms.push_back(want_term(3));
        p.terms.push_back(want_term(4));
        break;
      case RuleId::DSolve:
        exactly(2);
        p.names.push_back(want_name(0));
        p.terms.push_back(want_term(1));
        break;
      default:
        exactly(0);
        break;
    }
    return mk_proof(std::move(p));
  }
};

}  // namespace

ProofFile parse_cdglp(const std::string& text, const CdglFile& env) {
  ProofFile out;
  SLexer lx(text);
  ProofBuilder builder{env};
  for (;;) {
    lx.skip_ws();
    if (lx.pos >= text.size()) break;
    SExpr top = lx.parse();
    if (top.kind != SExpr::Kind::List || top.items.size() != 3 ||
        top.items[0].kind != SExpr::Kind::Atom || top.items[0].text != "proves" ||
        top.items[1].kind != SExpr::Kind::Atom)
      throw ParseError(top.line, top.col, "expected (proves <formula-name> <proof>)");
    const std::string& name = top.items[1].text;
    if (!env.formulas.count(name))
      throw ParseError(top.items[1].line, top.items[1].col,
                       "unknown formula '" + name + "'");
    out.proofs.emplace_back(name, builder.build(top.items[2]));
  }
  return out;
}

std::string proof_summary(const ProofTermPtr& p) {
  std::string s = rule_name(p->rule);
  if (!p->children.empty()) {
    s += "(";
    for (size_t i = 0; i < p->children.size(); ++i) {
      if (i) s += " ";
      s += proof_summary(p->children[i]);
    }
    s += ")";
  }
  return s;
}

}  // namespace cdgl
