#pragma once

#include <cstdint>
#include <string>

#include "cdgl/rational.hpp"

namespace cdgl {

enum class OraclePolicy { IntervalThenAssume, Strict };

// Runtime knobs; serializes to/from a small key = value config file.
struct RunConfig {
  long precision = 53;           // trace / report precision k
  long repeat_cap = 1000000;     // loop guard
  OraclePolicy oracle = OraclePolicy::IntervalThenAssume;
  Rat solves_tol = Rat(1, 1 << 20);
  long grid = 128;               // domain / solves sample grid
  uint64_t seed = 0;
  Rat stop_eps = Rat(1, 1 << 22);  // metric-zero comparison width for <*>I

  void validate() const;  // all numeric fields positive
  std::string to_text() const;
  static RunConfig from_text(const std::string& text);
};

}  // namespace cdgl
