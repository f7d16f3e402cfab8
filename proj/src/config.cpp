#include "cdgl/config.hpp"

#include <sstream>
#include <stdexcept>

namespace cdgl {

void RunConfig::validate() const {
  if (precision <= 0 || repeat_cap <= 0 || grid <= 0)
    throw std::invalid_argument("config: numeric fields must be positive");
  if (sgn(solves_tol) <= 0 || sgn(stop_eps) <= 0)
    throw std::invalid_argument("config: tolerances must be positive");
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "precision = " << precision << "\n";
  os << "repeat_cap = " << repeat_cap << "\n";
  os << "oracle = " << (oracle == OraclePolicy::Strict ? "strict" : "interval-then-assume")
     << "\n";
  os << "solves_tol = " << rat_str(solves_tol) << "\n";
  os << "grid = " << grid << "\n";
  os << "seed = " << seed << "\n";
  os << "stop_eps = " << rat_str(stop_eps) << "\n";
  return os.str();
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto slashes = line.find("//");
    if (slashes != std::string::npos) line = line.substr(0, slashes);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r");
      size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    auto num = [&]() {
      auto r = parse_rat(val);
      if (!r) throw std::invalid_argument("config line " + std::to_string(lineno) +
                                          ": bad value '" + val + "'");
      return *r;
    };
    if (key == "precision") cfg.precision = static_cast<long>(num().get_num().get_si());
    else if (key == "repeat_cap") cfg.repeat_cap = static_cast<long>(num().get_num().get_si());
    else if (key == "oracle") {
      if (val == "strict") cfg.oracle = OraclePolicy::Strict;
      else if (val == "interval-then-assume") cfg.oracle = OraclePolicy::IntervalThenAssume;
      else throw std::invalid_argument("config: unknown oracle policy '" + val + "'");
    } else if (key == "solves_tol") cfg.solves_tol = num();
    else if (key == "grid") cfg.grid = static_cast<long>(num().get_num().get_si());
    else if (key == "seed") cfg.seed = static_cast<uint64_t>(num().get_num().get_ui());
    else if (key == "stop_eps") cfg.stop_eps = num();
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

}  // namespace cdgl
