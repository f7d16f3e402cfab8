#pragma once

#include <stdexcept>
#include <string>

#include "cdgl/syntax.hpp"

namespace cdgl {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(int l, int c, const std::string& msg)
      : std::runtime_error("parse error at " + std::to_string(l) + ":" +
                           std::to_string(c) + ": " + msg),
        line(l), col(c) {}
};

// Standalone expression parsing. `env` (optional) supplies named constants,
// games, and formulas for reference splicing.
TermPtr parse_term(const std::string& text, const CdglFile* env = nullptr);
GamePtr parse_game(const std::string& text, const CdglFile* env = nullptr);
FormulaPtr parse_formula(const std::string& text, const CdglFile* env = nullptr);

// Whole `.cdgl` file: const/game/formula declarations, `//` comments.
CdglFile parse_cdgl(const std::string& text);

}  // namespace cdgl
