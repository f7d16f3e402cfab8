#include "cdgl/engine.hpp"

#include <random>

#include "cdgl/ode.hpp"
#include "cdgl/parser.hpp"
#include "cdgl/printer.hpp"
#include "cdgl/statics.hpp"

namespace cdgl {

// --- scripts ---------------------------------------------------------------------

namespace {

Rat parse_rat_or_throw(const std::string& s) {
  auto r = parse_rat(s);
  if (r) return *r;
  throw std::invalid_argument("script: bad rational '" + s + "'");
}

ScriptRule rule_from_json(const nlohmann::json& j) {
  ScriptRule r;
  if (j.contains("fixed")) {
    r.kind = ScriptRule::Kind::Fixed;
    r.fixed = parse_rat_or_throw(j["fixed"].get<std::string>());
  } else if (j.contains("uniform")) {
    r.kind = ScriptRule::Kind::Uniform;
    r.lo = parse_rat_or_throw(j["uniform"][0].get<std::string>());
    r.hi = parse_rat_or_throw(j["uniform"][1].get<std::string>());
    if (r.hi < r.lo) throw std::invalid_argument("script: uniform range is empty");
  } else if (j.contains("table")) {
    r.kind = ScriptRule::Kind::Table;
    for (const auto& v : j["table"]) r.table.push_back(parse_rat_or_throw(v.get<std::string>()));
  } else {
    throw std::invalid_argument("script: rule needs fixed/uniform/table");
  }
  return r;
}

nlohmann::json rule_to_json(const ScriptRule& r) {
  nlohmann::json j;
  switch (r.kind) {
    case ScriptRule::Kind::Fixed:
      j["fixed"] = rat_str(r.fixed);
      break;
    case ScriptRule::Kind::Uniform:
      j["uniform"] = {rat_str(r.lo), rat_str(r.hi)};
      break;
    case ScriptRule::Kind::Table: {
      nlohmann::json t = nlohmann::json::array();
      for (const auto& v : r.table) t.push_back(rat_str(v));
      j["table"] = t;
      break;
    }
  }
  return j;
}

Rat eval_ground_term(const std::string& text, const CdglFile* env) {
  TermPtr t = parse_term(text, env);
  if (!free_vars(t).empty())
    throw std::invalid_argument("script value must be ground: " + text);
  Interval iv = eval_creal(t, State()).refine(80);
  if (iv.lo != iv.hi)
    throw std::invalid_argument("script value must be exactly rational: " + text);
  return iv.lo;
}

}  // namespace

DemonScript DemonScript::from_json(const nlohmann::json& j) {
  DemonScript s;
  if (j.contains("seed")) s.seed = j["seed"].get<uint64_t>();
  if (j.contains("defaults"))
    for (auto it = j["defaults"].begin(); it != j["defaults"].end(); ++it)
      s.defaults[it.key()] = rule_from_json(it.value());
  if (j.contains("decisions"))
    for (const auto& d : j["decisions"]) {
      std::string kind = d.at("kind").get<std::string>();
      s.decisions.emplace_back(kind, rule_from_json(d));
    }
  return s;
}

nlohmann::json DemonScript::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  nlohmann::json d;
  for (const auto& [k, r] : defaults) d[k] = rule_to_json(r);
  j["defaults"] = d;
  nlohmann::json ds = nlohmann::json::array();
  for (const auto& [k, r] : decisions) {
    nlohmann::json e = rule_to_json(r);
    e["kind"] = k;
    ds.push_back(e);
  }
  j["decisions"] = ds;
  return j;
}

DemonScript DemonScript::from_shorthand(const std::string& text, const CdglFile* env) {
  DemonScript s;
  auto c1 = text.find(':');
  if (c1 == std::string::npos)
    throw std::invalid_argument("script shorthand: expected fixed:<v> or uniform:<lo>:<hi>");
  std::string kind = text.substr(0, c1);
  ScriptRule r;
  if (kind == "fixed") {
    r.kind = ScriptRule::Kind::Fixed;
    r.fixed = eval_ground_term(text.substr(c1 + 1), env);
  } else if (kind == "uniform") {
    auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos)
      throw std::invalid_argument("script shorthand: uniform:<lo>:<hi>");
    r.kind = ScriptRule::Kind::Uniform;
    r.lo = eval_ground_term(text.substr(c1 + 1, c2 - c1 - 1), env);
    r.hi = eval_ground_term(text.substr(c2 + 1), env);
  } else {
    throw std::invalid_argument("script shorthand: unknown kind '" + kind + "'");
  }
  s.defaults["ode_duration"] = r;
  // sensible defaults for the remaining decision kinds
  ScriptRule zero;
  zero.kind = ScriptRule::Kind::Fixed;
  zero.fixed = Rat(0);
  s.defaults.emplace("choice", zero);
  s.defaults.emplace("witness", zero);
  ScriptRule go;
  go.kind = ScriptRule::Kind::Fixed;
  go.fixed = Rat(1);
  s.defaults.emplace("repeat_go", go);
  return s;
}

// --- cursors ----------------------------------------------------------------------

namespace {

struct ScriptState {
  DemonScript script;
  std::mt19937_64 rng;
  size_t next = 0;
  std::map<const ScriptRule*, size_t> table_pos;

  explicit ScriptState(const DemonScript& s) : script(s), rng(s.seed) {}

  Rat draw_uniform(const ScriptRule& r) {
    // seeded, reproducible: lo + (hi-lo) * k / 2^30 with k in [1, 2^30]
    uint64_t k = (rng() % (1ull << 30)) + 1;
    return r.lo + (r.hi - r.lo) * Rat(static_cast<unsigned long>(k), 1ul << 30);
  }

  Rat apply(const ScriptRule& r) {
    switch (r.kind) {
      case ScriptRule::Kind::Fixed: return r.fixed;
      case ScriptRule::Kind::Uniform: return draw_uniform(r);
      case ScriptRule::Kind::Table: {
        size_t& pos = table_pos[&r];
        if (pos >= r.table.size())
          throw ScriptExhausted("script table ran out of entries");
        return r.table[pos++];
      }
    }
    throw std::logic_error("bad script rule");
  }

  Rat decide(const std::string& kind) {
    if (next < script.decisions.size()) {
      const auto& [k, r] = script.decisions[next];
      if (k != kind)
        throw StrategyMismatch("script decision " + std::to_string(next) + " answers '" + k +
                               "' but the game asks for '" + kind + "'");
      ++next;
      return apply(r);
    }
    auto it = script.defaults.find(kind);
    if (it == script.defaults.end())
      throw ScriptExhausted("script has no rule for decision kind '" + kind + "'");
    return apply(it->second);
  }
};

struct Cursor {
  enum class Kind { Proof, Script, PostOnly };
  Kind kind = Kind::PostOnly;
  std::string owner;  // "angel" / "demon"
  ProofTermPtr proof;
  std::shared_ptr<ScriptState> script;

  bool is_proof() const { return kind == Kind::Proof; }
};

struct Ctx {
  const RunConfig& cfg;
  PlayTrace& trace;
  long step = 0;

  void event(const std::string& construct, const std::string& decider,
             const std::string& choice, const State& s) {
    trace.events.push_back({step++, construct, decider, choice, s});
  }
};

// Certified-at-precision truth used for all runtime evidence.
bool evidence(const FormulaPtr& f, const State& s, const Ctx& cx) {
  return truth_at(f, s, cx.cfg.precision);
}

// ε-comparison pattern f > g ∨ f < g + eps, for runtime case analysis.
struct EpsPattern {
  TermPtr f, g;
  Rat eps;
  bool first_is_gt;
};

std::optional<EpsPattern> eps_pattern(const FormulaPtr& a, const FormulaPtr& b) {
  auto match = [](const FormulaPtr& gt, const FormulaPtr& lt) -> std::optional<EpsPattern> {
    if (gt->kind != Formula::Kind::Cmp || lt->kind != Formula::Kind::Cmp) return std::nullopt;
    if (gt->rel != Rel::Gt || lt->rel != Rel::Lt) return std::nullopt;
    if (!term_eq(gt->lhs, lt->lhs)) return std::nullopt;
    if (lt->rhs->kind != Term::Kind::Plus) return std::nullopt;
    if (!term_eq(gt->rhs, lt->rhs->args[0])) return std::nullopt;
    const TermPtr& e = lt->rhs->args[1];
    if (!free_vars(e).empty()) return std::nullopt;
    Interval iv = eval_creal(e, State()).refine(64);
    if (sgn(iv.lo) <= 0) return std::nullopt;
    return EpsPattern{gt->lhs, gt->rhs, iv.lo, true};
  };
  if (auto m = match(a, b)) return m;
  if (auto m = match(b, a)) {
    m->first_is_gt = false;
    return m;
  }
  return std::nullopt;
}

[[noreturn]] void unsupported(const ProofTermPtr& p, const std::string& why) {
  throw ExtractionUnsupported(std::string("cannot extract a strategy from ") +
                              rule_name(p->rule) + ": " + why);
}

// Resolve structural wrappers and decidable eliminations so the cursor
// exposes an introduction form for the next game construct.
void peel(Cursor& c, const State& s, Ctx& cx) {
  while (c.is_proof()) {
    const ProofTermPtr& p = c.proof;
    switch (p->rule) {
      case RuleId::Mon:
        c.proof = p->children[0];
        continue;
      case RuleId::GV:
        c.proof = p->children[1];
        continue;
      case RuleId::BoxTestE:  // modus ponens: follow the implication's body
        if (p->children[0]->rule == RuleId::BoxTestI) {
          c.proof = p->children[0]->children[0];
          continue;
        }
        unsupported(p, "major premise is not an introduction");
      case RuleId::DiaTestE1:
        if (p->children[0]->rule == RuleId::DiaTestI) {
          c.proof = p->children[0]->children[0];
          continue;
        }
        unsupported(p, "major premise is not an introduction");
      case RuleId::DiaTestE2:
        if (p->children[0]->rule == RuleId::DiaTestI) {
          c.proof = p->children[0]->children[1];
          continue;
        }
        unsupported(p, "major premise is not an introduction");
      case RuleId::DiaChoiceE: {
        // Case analysis: decidable for the ε-comparison disjunction and for
        // directly introduced choices.
        const ProofTermPtr& a = p->children[0];
        if (a->rule == RuleId::DiaChoiceI1) { c.proof = p->children[1]; continue; }
        if (a->rule == RuleId::DiaChoiceI2) { c.proof = p->children[2]; continue; }
        FormulaPtr payload = p->formulas.empty() ? nullptr : desugar(p->formulas[0]);
        if (payload && payload->kind == Formula::Kind::Diamond &&
            payload->game->kind == Game::Kind::Choice &&
            payload->game->left->kind == Game::Kind::Test &&
            payload->game->right->kind == Game::Kind::Test) {
          const FormulaPtr& f1 = payload->game->left->fml;
          const FormulaPtr& f2 = payload->game->right->fml;
          if (auto pat = eps_pattern(f1, f2)) {
            CmpResult r = cmp_eps(eval_creal(pat->f, s), eval_creal(pat->g, s), pat->eps);
            bool left = pat->first_is_gt ? r == CmpResult::GT : r == CmpResult::LT_PLUS_EPS;
            cx.event("case", c.owner, left ? "left" : "right", s);
            c.proof = left ? p->children[1] : p->children[2];
            continue;
          }
          bool left = evidence(f1, s, cx);
          cx.event("case", c.owner, left ? "left" : "right", s);
          c.proof = left ? p->children[1] : p->children[2];
          continue;
        }
        unsupported(p, "case analysis is not runtime-decidable");
      }
      case RuleId::Hyp:
        unsupported(p, "strategy references a hypothesis");
      case RuleId::DiaRepE:
      case RuleId::FP:
      case RuleId::BoxChoiceE1:
      case RuleId::BoxChoiceE2:
      case RuleId::BoxAnyE:
      case RuleId::BoxRepE:
      case RuleId::DiaAnyE:
        unsupported(p, "elimination form");
      default:
        return;
    }
  }
}

[[noreturn]] void mismatch(const Cursor& c, const char* construct) {
  std::string have = c.is_proof() ? rule_name(c.proof->rule)
                   : c.kind == Cursor::Kind::Script ? "script" : "evidence-only cursor";
  throw StrategyMismatch(std::string(construct) + ": strategy decision shape disagrees (" +
                         have + ")");
}

const ProofTermPtr& expect(Cursor& c, RuleId rule, const char* construct) {
  if (!c.is_proof() || c.proof->rule != rule) mismatch(c, construct);
  return c.proof;
}

State run(const GamePtr& g, Cursor& dia, Cursor& box, State s, Ctx& cx);

// Shared ODE move: the diamond side supplies duration and solution.
State run_ode(const GamePtr& g, Cursor& dia, Cursor& box, State s, Ctx& cx) {
  ODESystem sys = ODESystem::from_game(g);
  SolvesOptions sopt;
  sopt.grid = std::min<long>(cx.cfg.grid, 32);
  sopt.tol = cx.cfg.solves_tol;

  peel(dia, s, cx);
  peel(box, s, cx);

  // duration (term for exact symbolic updates, or rational for sampling)
  TermPtr dur_term;
  bool use_picard = false;
  Rat dur_rat;
  ProofTermPtr continuation;
  if (dia.is_proof()) {
    if (dia.proof->rule == RuleId::DSolve) {
      dur_term = dia.proof->terms[0];
      continuation = dia.proof->children[2];
    } else if (dia.proof->rule == RuleId::DV) {
      // duration may be irrational; play a dyadic approximation of it
      Interval iv = eval_creal(dia.proof->terms[0], s).refine(cx.cfg.precision + 8);
      dur_rat = Rat((iv.lo + iv.hi) / 2);
      dur_rat.canonicalize();
      use_picard = true;
      continuation = dia.proof->children[2];
    } else {
      mismatch(dia, "ode");
    }
  } else if (dia.kind == Cursor::Kind::Script) {
    dur_rat = dia.script->decide("ode_duration");
    if (sgn(dur_rat) < 0) throw SolutionRejected("script chose a negative duration");
    try {
      (void)solve_nilpotent(sys);
    } catch (const NotNilpotent&) {
      use_picard = true;
    }
    if (!use_picard) dur_term = t_rat(dur_rat);
  } else {
    mismatch(dia, "ode");
  }

  State end = s;
  if (!use_picard) {
    SymbolicSolution sol = solve_nilpotent(sys);
    if (!check_solves(sol, s, dur_term ? Rat(0) : dur_rat, sys, sopt))
      throw SolutionRejected("closed-form solution failed check_solves");
    // duration >= 0 evidence
    if (!evidence(f_cmp(dur_term, Rel::Ge, t_int(0)), s, cx))
      throw SolutionRejected("chosen duration is negative");
    // domain sampling throughout [0, d]
    for (long j = 0; j <= sopt.grid; ++j) {
      TermPtr tj = t_times(dur_term, t_rat(Rat(j, sopt.grid)));
      State at = s;
      for (const auto& [x, f] : sys.equations)
        at = at.set(x, eval_creal(sol.value_term(x, tj), s));
      if (!evidence(g->domain, at, cx))
        throw TestFailed(dia.owner, "domain constraint violated along the flow");
    }
    for (const auto& [x, f] : sys.equations)
      end = end.set(x, eval_creal(sol.value_term(x, dur_term), s));
    State base = end;
    for (const auto& [x, f] : sys.equations)
      end = end.set(primed(x), eval_creal(f, base));
  } else {
    SampledSolution sol = picard_solve(sys, s, dur_rat, cx.cfg.precision + 4);
    if (!check_solves(sol, s, dur_rat, sys, sopt))
      throw SolutionRejected("sampled solution failed check_solves");
    for (long j = 0; j <= sopt.grid; ++j) {
      Rat tj = dur_rat * Rat(j, sopt.grid);
      tj.canonicalize();
      if (!evidence(g->domain, sol.sample(tj), cx))
        throw TestFailed(dia.owner, "domain constraint violated along the flow");
    }
    end = sol.sample(dur_rat);
  }

  cx.event("ode", dia.owner,
           dur_term ? pretty(dur_term) : rat_str(dur_rat), end);

  // advance cursors
  if (dia.is_proof()) dia.proof = continuation;
  if (box.is_proof()) {
    if (box.proof->rule == RuleId::BSolve) {
      box.proof = box.proof->children[0];
    } else if (box.proof->rule == RuleId::DI || box.proof->rule == RuleId::DC ||
               box.proof->rule == RuleId::DW || box.proof->rule == RuleId::DG) {
      box.kind = Cursor::Kind::PostOnly;  // invariant reasoning: evidence only
    } else {
      mismatch(box, "ode");
    }
  }
  return end;
}

State run(const GamePtr& g, Cursor& dia, Cursor& box, State s, Ctx& cx) {
  switch (g->kind) {
    case Game::Kind::Test: {
      peel(dia, s, cx);
      peel(box, s, cx);
      bool ok = false;
      try {
        ok = evidence(g->fml, s, cx);
      } catch (const NotEvaluable& e) {
        throw EngineError(std::string("test evidence not evaluable: ") + e.what());
      }
      cx.event("test", dia.owner, ok ? "pass" : "fail", s);
      if (!ok)
        throw TestFailed(dia.owner, dia.owner + " failed the test " + pretty(g->fml));
      if (dia.is_proof()) dia.proof = expect(dia, RuleId::DiaTestI, "test")->children[1];
      if (box.is_proof()) box.proof = expect(box, RuleId::BoxTestI, "test")->children[0];
      return s;
    }
    case Game::Kind::Assign: {
      peel(dia, s, cx);
      peel(box, s, cx);
      State s2 = s.set(g->var, eval_creal(g->term, s));
      cx.event("assign " + g->var, "", pretty(g->term), s2);
      if (dia.is_proof()) dia.proof = expect(dia, RuleId::AssignI, "assign")->children[0];
      if (box.is_proof()) box.proof = expect(box, RuleId::AssignI, "assign")->children[0];
      return s2;
    }
    case Game::Kind::AssignAny: {
      peel(dia, s, cx);
      peel(box, s, cx);
      CReal v;
      std::string shown;
      if (dia.is_proof()) {
        const ProofTermPtr& p = expect(dia, RuleId::DiaAnyI, "assign-any");
        v = eval_creal(p->terms[0], s);
        shown = pretty(p->terms[0]);
        Cursor inner = dia;
        inner.proof = p->children[0];
        peel(inner, s, cx);
        dia.proof = expect(inner, RuleId::AssignI, "assign-any")->children[0];
      } else if (dia.kind == Cursor::Kind::Script) {
        Rat r = dia.script->decide("witness");
        v = CReal(r);
        shown = rat_str(r);
      } else {
        mismatch(dia, "assign-any");
      }
      State s2 = s.set(g->var, v);
      cx.event("assign-any " + g->var, dia.owner, shown, s2);
      if (box.is_proof()) box.proof = expect(box, RuleId::BoxAnyI, "assign-any")->children[0];
      return s2;
    }
    case Game::Kind::ODE:
      return run_ode(g, dia, box, s, cx);
    case Game::Kind::Choice: {
      peel(dia, s, cx);
      peel(box, s, cx);
      bool left;
      if (dia.is_proof()) {
        if (dia.proof->rule == RuleId::DiaChoiceI1) left = true;
        else if (dia.proof->rule == RuleId::DiaChoiceI2) left = false;
        else mismatch(dia, "choice");
        dia.proof = dia.proof->children[0];
      } else if (dia.kind == Cursor::Kind::Script) {
        left = sgn(dia.script->decide("choice")) == 0;
      } else {
        mismatch(dia, "choice");
      }
      cx.event("choice", dia.owner, left ? "left" : "right", s);
      if (box.is_proof())
        box.proof = expect(box, RuleId::BoxChoiceI, "choice")->children[left ? 0 : 1];
      return run(left ? g->left : g->right, dia, box, s, cx);
    }
    case Game::Kind::Seq: {
      peel(dia, s, cx);
      peel(box, s, cx);
      if (dia.is_proof()) dia.proof = expect(dia, RuleId::SeqI, "seq")->children[0];
      if (box.is_proof()) box.proof = expect(box, RuleId::SeqI, "seq")->children[0];
      State mid = run(g->left, dia, box, s, cx);
      return run(g->right, dia, box, mid, cx);
    }
    case Game::Kind::Repeat: {
      long iter = 0;
      for (;;) {
        if (++iter > cx.cfg.repeat_cap)
          throw NonTermination("repeat exceeded the iteration cap of " +
                               std::to_string(cx.cfg.repeat_cap));
        peel(dia, s, cx);
        peel(box, s, cx);
        // the diamond side decides stop/go
        bool go;
        ProofTermPtr body;  // diamond body proof when going
        if (dia.is_proof()) {
          switch (dia.proof->rule) {
            case RuleId::DiaRepS:
              go = false;
              dia.proof = dia.proof->children[0];
              break;
            case RuleId::DiaRepG:
              go = true;
              body = dia.proof->children[0];
              break;
            case RuleId::DiaRepI: {
              // runtime stop test: metric within eps of its zero element
              const ProofTermPtr& p = dia.proof;
              Rat eps = cx.cfg.stop_eps;
              Interval div = eval_creal(p->terms[2], State()).refine(24);
              if (sgn(div.lo) > 0) eps = std::min(eps, Rat(div.lo));
              auto ms = p->terms[0]->kind == Term::Kind::Tuple
                            ? p->terms[0]->args
                            : std::vector<TermPtr>{p->terms[0]};
              auto zs = p->terms[1]->kind == Term::Kind::Tuple
                            ? p->terms[1]->args
                            : std::vector<TermPtr>{p->terms[1]};
              go = false;
              for (size_t i = 0; i < ms.size(); ++i) {
                if (cmp_eps(eval_creal(ms[i], s), eval_creal(zs[i], s), eps) ==
                    CmpResult::GT) {
                  go = true;
                  break;
                }
              }
              if (go) body = p->children[1];
              else dia.proof = p->children[2];
              break;
            }
            default:
              mismatch(dia, "repeat");
          }
        } else if (dia.kind == Cursor::Kind::Script) {
          go = sgn(dia.script->decide("repeat_go")) != 0;
        } else {
          mismatch(dia, "repeat");
        }
        cx.event("repeat", dia.owner, go ? "go" : "stop", s);

        // the box side follows
        ProofTermPtr box_body;
        bool box_loop_node = false;
        if (box.is_proof()) {
          switch (box.proof->rule) {
            case RuleId::Loop:
              if (go) {
                box_body = box.proof->children[1];
                box_loop_node = true;  // stay on the loop node afterwards
              } else {
                box.proof = box.proof->children[2];
              }
              break;
            case RuleId::BoxRepR: {
              Cursor inner = box;
              inner.proof = box.proof->children[0];
              peel(inner, s, cx);
              const ProofTermPtr& pair = expect(inner, RuleId::DiaTestI, "repeat");
              if (go) box.proof = pair->children[1];
              else box.proof = pair->children[0];
              break;
            }
            default:
              mismatch(box, "repeat");
          }
        }

        if (!go) return s;

        if (dia.is_proof()) {
          Cursor round = dia;
          round.proof = body;
          if (box_loop_node) {
            Cursor bround = box;
            bround.proof = box_body;
            s = run(g->left, round, bround, s, cx);
          } else {
            s = run(g->left, round, box, s, cx);
          }
          if (dia.proof->rule == RuleId::DiaRepG) dia.proof = round.proof;
        } else {
          if (box_loop_node) {
            Cursor bround = box;
            bround.proof = box_body;
            s = run(g->left, dia, bround, s, cx);
          } else {
            s = run(g->left, dia, box, s, cx);
          }
        }
      }
    }
    case Game::Kind::Dual: {
      peel(dia, s, cx);
      peel(box, s, cx);
      if (dia.is_proof()) dia.proof = expect(dia, RuleId::DualI, "dual")->children[0];
      if (box.is_proof()) box.proof = expect(box, RuleId::DualI, "dual")->children[0];
      cx.event("dual", "", "swap", s);
      return run(g->left, box, dia, s, cx);
    }
    case Game::Kind::DChoice:
    case Game::Kind::DRepeat:
      throw std::logic_error("play: game not desugared");
  }
  throw std::logic_error("play: bad game");
}

}  // namespace

// --- strategies --------------------------------------------------------------------

Strategy extract(const FormulaPtr& goal0, const ProofTermPtr& proof0,
                 const CheckResult& result, const std::string& name) {
  if (!result.checked)
    throw ExtractionUnsupported("cannot extract from a proof that did not check");
  FormulaPtr goal = desugar(goal0);
  ProofTermPtr p = proof0;
  Strategy s;
  // Peel leading precondition tests [?ψ]... as long as a modality remains
  // (so a proof of [?ψ]φ still extracts as a Demon strategy for the test).
  for (;;) {
    bool wrapper = goal->kind == Formula::Kind::Box &&
                   goal->game->kind == Game::Kind::Test &&
                   p->rule == RuleId::BoxTestI &&
                   (goal->sub->kind == Formula::Kind::Diamond ||
                    goal->sub->kind == Formula::Kind::Box);
    if (!wrapper) break;
    s.preconditions.push_back(goal->game->fml);
    goal = goal->sub;
    p = p->children[0];
  }
  auto modal = goal->kind == Formula::Kind::Diamond || goal->kind == Formula::Kind::Box;
  if (!modal) throw ExtractionUnsupported("goal is not a modality");
  s.role = goal->kind == Formula::Kind::Diamond ? Role::Angel : Role::Demon;
  s.provenance = "proof:" + name;
  s.post = goal->sub;
  s.game = goal->game;
  s.proof = p;
  for (const auto& o : result.obligations)
    if (o.verdict == ArithVerdict::Assumed)
      s.annotations.push_back("assumed " + (o.label.empty() ? "arith@" + o.path : o.label));
  return s;
}

GamePtr strategy_game(const Strategy& s) { return s.game; }

Strategy script_demon(const DemonScript& script, const std::string& id) {
  Strategy s;
  s.role = Role::Demon;
  s.provenance = "script:" + id;
  s.post = f_true();
  s.script = std::make_shared<DemonScript>(script);
  return s;
}

Strategy script_angel(const DemonScript& script, const std::string& id) {
  Strategy s = script_demon(script, id);
  s.role = Role::Angel;
  return s;
}

// --- play -------------------------------------------------------------------------

PlayTrace play(const GamePtr& game0, const Strategy& angel, const Strategy& demon,
               const State& s0, const RunConfig& cfg, PlayTrace* partial) {
  cfg.validate();
  if (angel.role != Role::Angel || demon.role != Role::Demon)
    throw StrategyMismatch("play needs an Angel strategy and a Demon strategy");
  GamePtr game = desugar_game(game0);
  if (angel.game && !game_eq(desugar_game(angel.game), game))
    throw StrategyMismatch("extracted Angel plays a different game than requested");
  if (demon.game && !game_eq(desugar_game(demon.game), game))
    throw StrategyMismatch("extracted Demon plays a different game than requested");

  PlayTrace trace;
  trace.angel_post = angel.post ? desugar(angel.post) : desugar(f_true());
  trace.demon_post = demon.post ? desugar(demon.post) : desugar(f_true());
  for (const auto& a : angel.annotations) trace.annotations.push_back("angel: " + a);
  for (const auto& a : demon.annotations) trace.annotations.push_back("demon: " + a);

  Ctx cx{cfg, trace};

  auto to_cursor = [](const Strategy& st, const char* owner) {
    Cursor c;
    c.owner = owner;
    if (st.proof) {
      c.kind = Cursor::Kind::Proof;
      c.proof = st.proof;
    } else if (st.script) {
      c.kind = Cursor::Kind::Script;
      c.script = std::make_shared<ScriptState>(*st.script);
    } else {
      c.kind = Cursor::Kind::PostOnly;
    }
    return c;
  };
  Cursor as = to_cursor(angel, "angel");
  Cursor ds = to_cursor(demon, "demon");

  // preconditions peeled during extraction must hold at the initial state
  for (const auto& pre : angel.preconditions)
    if (!truth_at(desugar(pre), s0, cfg.precision))
      throw TestFailed("angel", "precondition false at the initial state: " + pretty(pre));
  for (const auto& pre : demon.preconditions)
    if (!truth_at(desugar(pre), s0, cfg.precision))
      throw TestFailed("demon", "precondition false at the initial state: " + pretty(pre));

  cx.event("start", "", "", s0);
  State fin;
  try {
    fin = run(game, as, ds, s0, cx);
  } catch (const EngineError&) {
    if (partial) *partial = trace;
    throw;
  }
  trace.final_state = fin;
  try {
    trace.angel_post_holds = truth_at(trace.angel_post, fin, cfg.precision);
  } catch (const NotEvaluable&) {
    trace.annotations.push_back("angel postcondition not numerically evaluable");
  }
  try {
    trace.demon_post_holds = truth_at(trace.demon_post, fin, cfg.precision);
  } catch (const NotEvaluable&) {
    trace.annotations.push_back("demon postcondition not numerically evaluable");
  }
  cx.event("end", "", "", fin);
  return trace;
}

nlohmann::json PlayTrace::to_json(long precision) const {
  nlohmann::json j;
  auto state_json = [precision](const State& s) {
    nlohmann::json out;
    for (const auto& [name, v] : s.assigned()) {
      Interval iv = v.refine(precision);
      out[name] = {{"lo", rat_str(iv.lo)}, {"hi", rat_str(iv.hi)}};
    }
    return out;
  };
  nlohmann::json evs = nlohmann::json::array();
  for (const auto& e : events) {
    evs.push_back({{"step", e.step},
                   {"construct", e.construct},
                   {"decider", e.decider},
                   {"choice", e.choice},
                   {"state", state_json(e.state)}});
  }
  j["events"] = evs;
  j["final"] = state_json(final_state);
  j["evidence"] = {
      {"angel", {{"formula", pretty(angel_post)}, {"holds", angel_post_holds}}},
      {"demon", {{"formula", pretty(demon_post)}, {"holds", demon_post_holds}}}};
  j["annotations"] = annotations;
  return j;
}

}  // namespace cdgl
