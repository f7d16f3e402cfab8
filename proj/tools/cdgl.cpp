// Command-line front door: check proofs, extract strategies, run plays and
// sweeps, inspect static semantics, format corpus files.
//
// Exit codes: 0 success, 1 logical failure (Failed/Refuted/engine error),
// 2 usage or I/O errors.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "cdgl/engine.hpp"
#include "cdgl/parser.hpp"
#include "cdgl/printer.hpp"
#include "cdgl/prover.hpp"
#include "cdgl/statics.hpp"

using namespace cdgl;

namespace {

constexpr int kExitOk = 0, kExitLogical = 1, kExitUsage = 2;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Loaded {
  CdglFile env;
  std::vector<std::pair<std::string, ProofTermPtr>> proofs;
};

Loaded load(const std::vector<std::string>& paths) {
  Loaded out;
  std::string cdgl_text;
  std::vector<std::string> proof_paths;
  for (const auto& p : paths) {
    if (p.size() > 6 && p.substr(p.size() - 6) == ".cdglp")
      proof_paths.push_back(p);
    else
      cdgl_text += slurp(p) + "\n";
  }
  out.env = parse_cdgl(cdgl_text);
  for (const auto& p : proof_paths) {
    ProofFile pf = parse_cdglp(slurp(p), out.env);
    for (auto& e : pf.proofs) out.proofs.push_back(std::move(e));
  }
  return out;
}

const char* verdict_str(ArithVerdict v) {
  switch (v) {
    case ArithVerdict::Proved: return "Proved";
    case ArithVerdict::Assumed: return "Assumed";
    case ArithVerdict::Refuted: return "Refuted";
  }
  return "?";
}

void print_result(const std::string& name, const CheckResult& r) {
  if (r.checked) {
    std::cout << name << ": Checked (" << r.obligations.size() << " arithmetic leaves, "
              << r.assumed_count() << " assumed)\n";
  } else {
    std::cout << name << ": Failed(" << rule_name(r.failure->rule) << ", "
              << r.failure->reason << ", at " << (r.failure->path.empty() ? "root" : r.failure->path)
              << ")\n";
  }
  for (const auto& o : r.obligations) {
    std::cout << "  [" << verdict_str(o.verdict) << "] "
              << (o.label.empty() ? "(unnamed)" : o.label) << " at "
              << (o.path.empty() ? "root" : o.path) << "\n";
    if (o.verdict == ArithVerdict::Assumed) {
      for (const auto& f : o.seq.ctx) std::cout << "      " << pretty(f) << "\n";
      std::cout << "      ⊢ " << pretty(o.seq.goal) << "\n";
    }
  }
}

nlohmann::json result_json(const std::string& name, const CheckResult& r) {
  nlohmann::json j;
  j["name"] = name;
  j["checked"] = r.checked;
  if (!r.checked) {
    j["failure"] = {{"rule", rule_name(r.failure->rule)},
                    {"reason", r.failure->reason},
                    {"path", r.failure->path}};
  }
  nlohmann::json obs = nlohmann::json::array();
  for (const auto& o : r.obligations) {
    nlohmann::json e;
    e["verdict"] = verdict_str(o.verdict);
    e["label"] = o.label;
    e["path"] = o.path;
    nlohmann::json ctx = nlohmann::json::array();
    for (const auto& f : o.seq.ctx) ctx.push_back(pretty(f));
    e["context"] = ctx;
    e["goal"] = pretty(o.seq.goal);
    obs.push_back(e);
  }
  j["obligations"] = obs;
  return j;
}

State parse_init(const std::string& init, const CdglFile* env) {
  State s;
  if (init.empty()) return s;
  std::istringstream is(init);
  std::string item;
  while (std::getline(is, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--init expects var=value,...");
    std::string name = item.substr(0, eq);
    name.erase(remove_if(name.begin(), name.end(), ::isspace), name.end());
    TermPtr t = parse_term(item.substr(eq + 1), env);
    s = s.set(name, eval_creal(t, State()));
  }
  return s;
}

Strategy make_strategy(const std::string& spec, Role role, const Loaded& loaded,
                       const RunConfig& cfg, bool strict) {
  if (spec.rfind("proof:", 0) == 0) {
    std::string name = spec.substr(6);
    for (const auto& [n, p] : loaded.proofs) {
      if (n != name) continue;
      CheckResult r = check({}, p, loaded.env.formulas.at(n));
      if (!r.checked)
        throw std::runtime_error("proof " + name + " failed: " + r.failure->reason);
      if (strict && r.assumed_count() > 0)
        throw std::runtime_error("proof " + name + " has assumed leaves (strict mode)");
      Strategy s = extract(loaded.env.formulas.at(n), p, r, name);
      if (s.role != role)
        throw std::runtime_error("proof " + name + " extracts to the other role");
      return s;
    }
    throw std::runtime_error("no proof named " + name);
  }
  DemonScript script;
  if (spec.rfind("script:", 0) == 0) {
    script = DemonScript::from_json(nlohmann::json::parse(slurp(spec.substr(7))));
  } else {
    script = DemonScript::from_shorthand(spec, &loaded.env);
    script.seed = cfg.seed;
  }
  return role == Role::Demon ? script_demon(script) : script_angel(script);
}

struct SweepOutcome {
  uint64_t seed;
  bool ok = false;
  std::string error;
  std::string final_summary;
  bool angel_post = false, demon_post = false;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proof checker and strategy-execution engine for constructive hybrid games"};
  app.require_subcommand(1);

  std::string config_path;
  if (const char* envp = getenv("CDGL_CONFIG")) config_path = envp;
  app.add_option("--config", config_path, "config file (key = value lines)");

  RunConfig cfg;
  long precision = -1, repeat_cap = -1, grid = -1;
  long long seed = -1;
  bool strict = false;
  std::string tol;
  app.add_option("--precision", precision, "trace precision k (width 2^-k)");
  app.add_option("--repeat-cap", repeat_cap, "loop iteration guard");
  app.add_option("--grid", grid, "solves / domain sample grid");
  app.add_option("--seed", seed, "script randomness seed");
  app.add_option("--solves-tol", tol, "solution check tolerance (rational)");
  app.add_flag("--strict", strict, "forbid assumed arithmetic leaves");

  std::vector<std::string> files;

  auto* c_check = app.add_subcommand("check", "check proofs against their formulas");
  bool check_json = false;
  c_check->add_flag("--json", check_json, "machine-readable report");
  c_check->add_option("files", files, "corpus (.cdgl) and proof (.cdglp) files")->required();

  auto* c_extract = app.add_subcommand("extract", "check a proof and describe its strategy");
  std::string x_proof;
  c_extract->add_option("--proof", x_proof, "proof name")->required();
  c_extract->add_option("files", files)->required();

  auto* c_play = app.add_subcommand("play", "run a game with chosen strategies");
  std::string p_game, p_angel, p_demon = "uniform:T/2:T", p_out = "trace.json", p_init;
  c_play->add_option("--game", p_game, "game name")->required();
  c_play->add_option("--angel", p_angel, "proof:<name> or script spec")->required();
  c_play->add_option("--demon", p_demon, "script:<file>, fixed:<v>, uniform:<lo>:<hi>");
  c_play->add_option("--out", p_out, "trace output file");
  c_play->add_option("--init", p_init, "initial state, var=value,...");
  c_play->add_option("files", files)->required();

  auto* c_sweep = app.add_subcommand("sweep", "run many seeded plays in parallel");
  std::string s_game, s_angel, s_demon = "uniform:T/2:T", s_dir = "traces", s_init;
  long s_runs = 20;
  long long s_seed_base = 1;
  c_sweep->add_option("--game", s_game)->required();
  c_sweep->add_option("--angel", s_angel)->required();
  c_sweep->add_option("--demon", s_demon);
  c_sweep->add_option("--runs", s_runs);
  c_sweep->add_option("--seed-base", s_seed_base);
  c_sweep->add_option("--out-dir", s_dir);
  c_sweep->add_option("--init", s_init);
  c_sweep->add_option("files", files)->required();

  auto* c_statics = app.add_subcommand("statics", "free/bound/must-bound variable report");
  std::string st_expr, st_name;
  c_statics->add_option("--expr", st_expr, "game or formula text");
  c_statics->add_option("--name", st_name, "declared game/formula name");
  c_statics->add_option("files", files);

  auto* c_fmt = app.add_subcommand("fmt", "reprint a corpus file in canonical form");
  c_fmt->add_option("files", files)->required();

  // global flags may follow the subcommand
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) cfg = RunConfig::from_text(slurp(config_path));
    if (precision > 0) cfg.precision = precision;
    if (repeat_cap > 0) cfg.repeat_cap = repeat_cap;
    if (grid > 0) cfg.grid = grid;
    if (seed >= 0) cfg.seed = static_cast<uint64_t>(seed);
    if (!tol.empty()) {
      auto r = parse_rat(tol);
      if (!r || sgn(*r) <= 0) throw std::runtime_error("bad --solves-tol");
      cfg.solves_tol = *r;
    }
    if (strict) cfg.oracle = OraclePolicy::Strict;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(c_check)) {
      Loaded loaded = load(files);
      if (loaded.proofs.empty()) {
        std::cerr << "error: no proofs to check\n";
        return kExitUsage;
      }
      bool all_ok = true;
      long assumed = 0;
      nlohmann::json report = nlohmann::json::array();
      for (const auto& [name, p] : loaded.proofs) {
        CheckResult r = check({}, p, loaded.env.formulas.at(name));
        if (check_json)
          report.push_back(result_json(name, r));
        else
          print_result(name, r);
        all_ok = all_ok && r.checked;
        assumed += r.assumed_count();
      }
      if (check_json) std::cout << report.dump(2) << "\n";
      if (!all_ok) return kExitLogical;
      if (cfg.oracle == OraclePolicy::Strict && assumed > 0) {
        std::cout << "strict mode: " << assumed << " assumed leaves\n";
        return kExitLogical;
      }
      return kExitOk;
    }

    if (app.got_subcommand(c_extract)) {
      Loaded loaded = load(files);
      Strategy s;
      bool found = false;
      for (const auto& [name, p] : loaded.proofs) {
        if (name != x_proof) continue;
        CheckResult r = check({}, p, loaded.env.formulas.at(name));
        if (!r.checked) {
          print_result(name, r);
          return kExitLogical;
        }
        s = extract(loaded.env.formulas.at(name), p, r, name);
        found = true;
      }
      if (!found) {
        std::cerr << "error: no proof named " << x_proof << "\n";
        return kExitUsage;
      }
      std::cout << "role: " << (s.role == Role::Angel ? "Angel" : "Demon") << "\n";
      std::cout << "provenance: " << s.provenance << "\n";
      std::cout << "game: " << pretty(s.game) << "\n";
      std::cout << "postcondition: " << pretty(s.post) << "\n";
      for (const auto& pre : s.preconditions)
        std::cout << "requires: " << pretty(pre) << "\n";
      std::cout << "decisions: " << proof_summary(s.proof) << "\n";
      for (const auto& a : s.annotations) std::cout << "note: " << a << "\n";
      return kExitOk;
    }

    if (app.got_subcommand(c_play)) {
      Loaded loaded = load(files);
      if (!loaded.env.games.count(p_game)) {
        std::cerr << "error: no game named " << p_game << "\n";
        return kExitUsage;
      }
      Strategy angel = make_strategy(p_angel, Role::Angel, loaded, cfg,
                                     cfg.oracle == OraclePolicy::Strict);
      Strategy demon = make_strategy(p_demon, Role::Demon, loaded, cfg,
                                     cfg.oracle == OraclePolicy::Strict);
      State s0 = parse_init(p_init, &loaded.env);
      PlayTrace partial;
      try {
        PlayTrace t = play(loaded.env.games.at(p_game), angel, demon, s0, cfg, &partial);
        std::ofstream out(p_out);
        out << t.to_json(cfg.precision).dump(2) << "\n";
        std::cout << "final state:\n";
        for (const auto& [name, v] : t.final_state.assigned()) {
          Interval iv = v.refine(cfg.precision);
          std::cout << "  " << name << " ∈ " << interval_str(iv) << "\n";
        }
        std::cout << "angel post " << pretty(t.angel_post) << ": "
                  << (t.angel_post_holds ? "holds" : "VIOLATED") << "\n";
        std::cout << "demon post " << pretty(t.demon_post) << ": "
                  << (t.demon_post_holds ? "holds" : "VIOLATED") << "\n";
        std::cout << "trace written to " << p_out << "\n";
        return t.angel_post_holds && t.demon_post_holds ? kExitOk : kExitLogical;
      } catch (const EngineError& e) {
        std::ofstream out(p_out);
        out << partial.to_json(cfg.precision).dump(2) << "\n";
        std::cerr << "engine error: " << e.what() << " (trace prefix in " << p_out << ")\n";
        return kExitLogical;
      }
    }

    if (app.got_subcommand(c_sweep)) {
      Loaded loaded = load(files);
      if (!loaded.env.games.count(s_game)) {
        std::cerr << "error: no game named " << s_game << "\n";
        return kExitUsage;
      }
      std::filesystem::create_directories(s_dir);
      Strategy angel0 = make_strategy(s_angel, Role::Angel, loaded, cfg,
                                      cfg.oracle == OraclePolicy::Strict);
      State s0 = parse_init(s_init, &loaded.env);
      std::vector<SweepOutcome> outcomes(s_runs);
      std::vector<std::thread> pool;
      long workers = std::min<long>(s_runs, 8);
      std::atomic<long> next{0};
      for (long w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (;;) {
            long i = next++;
            if (i >= s_runs) return;
            uint64_t run_seed = static_cast<uint64_t>(s_seed_base) + i;
            SweepOutcome& oc = outcomes[i];
            oc.seed = run_seed;
            try {
              RunConfig c = cfg;
              c.seed = run_seed;
              Strategy demon = make_strategy(s_demon, Role::Demon, loaded, c, false);
              if (demon.script) demon.script->seed = run_seed;
              PlayTrace t = play(loaded.env.games.at(s_game), angel0, demon, s0, c);
              std::ofstream out(s_dir + "/trace_" + std::to_string(run_seed) + ".json");
              out << t.to_json(c.precision).dump(2) << "\n";
              oc.ok = t.angel_post_holds && t.demon_post_holds;
              oc.angel_post = t.angel_post_holds;
              oc.demon_post = t.demon_post_holds;
              std::ostringstream fs;
              for (const auto& [name, v] : t.final_state.assigned()) {
                if (is_primed_name(name)) continue;
                Interval iv = v.refine(c.precision);
                fs << name << "∈" << interval_str(iv.round_out(20)) << " ";
              }
              oc.final_summary = fs.str();
            } catch (const std::exception& e) {
              oc.error = e.what();
            }
          }
        });
      }
      for (auto& th : pool) th.join();
      bool all_ok = true;
      for (const auto& oc : outcomes) {
        if (!oc.error.empty()) {
          std::cout << "seed " << oc.seed << ": ERROR " << oc.error << "\n";
          all_ok = false;
        } else {
          std::cout << "seed " << oc.seed << ": " << (oc.ok ? "ok" : "POSTCONDITION VIOLATED")
                    << "  " << oc.final_summary << "\n";
          all_ok = all_ok && oc.ok;
        }
      }
      return all_ok ? kExitOk : kExitLogical;
    }

    if (app.got_subcommand(c_statics)) {
      CdglFile env;
      if (!files.empty()) env = load(files).env;
      GamePtr game;
      FormulaPtr fml;
      if (!st_name.empty()) {
        if (env.games.count(st_name)) game = env.games.at(st_name);
        else if (env.formulas.count(st_name)) fml = env.formulas.at(st_name);
        else {
          std::cerr << "error: no declaration named " << st_name << "\n";
          return kExitUsage;
        }
      } else if (!st_expr.empty()) {
        try {
          game = parse_game(st_expr, &env);
        } catch (const ParseError&) {
          fml = parse_formula(st_expr, &env);
        }
      } else {
        std::cerr << "error: statics needs --expr or --name\n";
        return kExitUsage;
      }
      auto show = [](const char* label, const VarSet& vs) {
        std::cout << label << " = {";
        bool first = true;
        for (const auto& v : vs) {
          if (!first) std::cout << ", ";
          std::cout << v;
          first = false;
        }
        std::cout << "}\n";
      };
      if (game) {
        show("FV", free_vars(game));
        show("BV", bound_vars(game));
        show("MBV", must_bound_vars(game));
      } else {
        show("FV", free_vars(fml));
      }
      return kExitOk;
    }

    if (app.got_subcommand(c_fmt)) {
      for (const auto& f : files) std::cout << pretty_file(parse_cdgl(slurp(f)));
      return kExitOk;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitLogical;
  }
  return kExitUsage;
}
