#pragma once

#include <json.hpp>

#include "cdgl/config.hpp"
#include "cdgl/prover.hpp"
#include "cdgl/state.hpp"

namespace cdgl {

// ---------------------------------------------------------------------------
// Engine errors.
// ---------------------------------------------------------------------------
struct EngineError : std::runtime_error {
  explicit EngineError(const std::string& m) : std::runtime_error(m) {}
};
struct StrategyMismatch : EngineError {
  explicit StrategyMismatch(const std::string& m) : EngineError(m) {}
};
struct SolutionRejected : EngineError {
  explicit SolutionRejected(const std::string& m) : EngineError(m) {}
};
struct NonTermination : EngineError {
  explicit NonTermination(const std::string& m) : EngineError(m) {}
};
struct ScriptExhausted : EngineError {
  explicit ScriptExhausted(const std::string& m) : EngineError(m) {}
};
struct TestFailed : EngineError {
  std::string by;  // "angel" or "demon"
  TestFailed(std::string who, const std::string& m) : EngineError(m), by(std::move(who)) {}
};
struct ExtractionUnsupported : EngineError {
  explicit ExtractionUnsupported(const std::string& m) : EngineError(m) {}
};

// ---------------------------------------------------------------------------
// Demon scripts: declarative responses at Dual-boundary decision points.
// ---------------------------------------------------------------------------
struct ScriptRule {
  enum class Kind { Fixed, Uniform, Table };
  Kind kind = Kind::Fixed;
  Rat fixed;
  Rat lo, hi;               // Uniform (seeded, reproducible)
  std::vector<Rat> table;   // Table: by use index
};

struct DemonScript {
  uint64_t seed = 0;
  std::map<std::string, ScriptRule> defaults;  // by decision kind
  std::vector<std::pair<std::string, ScriptRule>> decisions;  // in order

  // {"seed": n, "defaults": {...}, "decisions": [...]}; rules are
  // {"fixed": "1/2"} | {"uniform": ["1/2","1"]} | {"table": ["1","2"]}.
  static DemonScript from_json(const nlohmann::json& j);
  // "fixed:T/2" / "uniform:T/2:T" shorthand (terms over file constants).
  static DemonScript from_shorthand(const std::string& text, const CdglFile* env);
  nlohmann::json to_json() const;
};

// ---------------------------------------------------------------------------
// Strategies: proof-extracted or scripted decision procedures.
// ---------------------------------------------------------------------------
enum class Role { Angel, Demon };

struct Strategy {
  Role role;
  std::string provenance;  // "proof:<name>" or "script:<id>"
  FormulaPtr post;         // postcondition this strategy pursues (desugared)
  GamePtr game;            // for extracted strategies: the game they play
  std::vector<FormulaPtr> preconditions;  // peeled [?ψ] tests
  // exactly one of:
  ProofTermPtr proof;                     // extracted
  std::shared_ptr<DemonScript> script;    // scripted
  std::vector<std::string> annotations;   // assumed arithmetic leaves
};

// Extraction from a checked proof of ⟨α⟩φ or [α]φ (possibly under leading
// [?ψ] precondition tests, which are peeled and checked at the initial
// state when the play starts). `result` must have checked successfully.
Strategy extract(const FormulaPtr& goal, const ProofTermPtr& proof,
                 const CheckResult& result, const std::string& name = "proof");

// The game the extracted strategy plays (after peeling precondition tests).
GamePtr strategy_game(const Strategy& s);

Strategy script_demon(const DemonScript& script, const std::string& id = "script");
Strategy script_angel(const DemonScript& script, const std::string& id = "script");

// ---------------------------------------------------------------------------
// Play: big-step interpreter pitting Angel against Demon.
// ---------------------------------------------------------------------------
struct TraceEvent {
  long step;
  std::string construct;
  std::string decider;  // "angel" / "demon" / ""
  std::string choice;
  State state;
};

struct PlayTrace {
  std::vector<TraceEvent> events;
  State final_state;
  bool angel_post_holds = false;
  bool demon_post_holds = false;
  FormulaPtr angel_post, demon_post;
  std::vector<std::string> annotations;

  nlohmann::json to_json(long precision) const;
};

// On engine errors the exception propagates; when `partial` is given the
// events recorded so far are copied there first (trace prefix).
PlayTrace play(const GamePtr& game, const Strategy& angel, const Strategy& demon,
               const State& s, const RunConfig& cfg, PlayTrace* partial = nullptr);

}  // namespace cdgl
