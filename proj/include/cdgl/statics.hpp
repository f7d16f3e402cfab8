#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "cdgl/syntax.hpp"

namespace cdgl {

// Variable sets track primed and unprimed names as distinct members;
// a primed variable is spelled with a trailing apostrophe ("x'").
using VarSet = std::set<std::string>;

inline std::string primed(const std::string& x) { return x + "'"; }
inline bool is_primed_name(const std::string& x) { return !x.empty() && x.back() == '\''; }

VarSet free_vars(const TermPtr& t);
VarSet free_vars(const FormulaPtr& f);
VarSet free_vars(const GamePtr& g);
VarSet bound_vars(const GamePtr& g);
VarSet must_bound_vars(const GamePtr& g);

// Every variable occurring anywhere (free, bound, or in binder position);
// used for freshness side conditions.
VarSet all_vars(const TermPtr& t);
VarSet all_vars(const FormulaPtr& f);
VarSet all_vars(const GamePtr& g);

// Transposition renaming x <-> y (their primed forms swap in tandem).
// Involutive; renames binder positions too.
TermPtr rename(const TermPtr& t, const std::string& x, const std::string& y);
FormulaPtr rename(const FormulaPtr& f, const std::string& x, const std::string& y);
GamePtr rename(const GamePtr& g, const std::string& x, const std::string& y);

struct AdmissibilityError : std::runtime_error {
  std::string var;     // variable being replaced
  std::string binder;  // offending bound variable
  AdmissibilityError(const std::string& v, const std::string& b, const std::string& where)
      : std::runtime_error("substitution of '" + v + "' is inadmissible: occurrence under binder of '" +
                           b + "' in " + where),
        var(v), binder(b) {}
};

// Capture-free replacement of variable x by term f. Throws
// AdmissibilityError when x occurs under a binder of FV(f) ∪ {x}.
using Subst = std::map<std::string, TermPtr>;
TermPtr substitute(const TermPtr& t, const Subst& sub);
FormulaPtr substitute(const FormulaPtr& f, const Subst& sub);
GamePtr substitute(const GamePtr& g, const Subst& sub);

inline TermPtr substitute(const TermPtr& t, const std::string& x, const TermPtr& f) {
  return substitute(t, Subst{{x, f}});
}
inline FormulaPtr substitute(const FormulaPtr& e, const std::string& x, const TermPtr& f) {
  return substitute(e, Subst{{x, f}});
}
inline GamePtr substitute(const GamePtr& g, const std::string& x, const TermPtr& f) {
  return substitute(g, Subst{{x, f}});
}

}  // namespace cdgl
