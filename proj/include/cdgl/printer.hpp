#pragma once

#include <string>

#include "cdgl/syntax.hpp"

namespace cdgl {

// Minimal-paren concrete syntax; parse(pretty(e)) is structurally e.
std::string pretty(const TermPtr& t);
std::string pretty(const GamePtr& g);
std::string pretty(const FormulaPtr& f);
std::string pretty_file(const CdglFile& file);

std::string rel_str(Rel r);

}  // namespace cdgl
