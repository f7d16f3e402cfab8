#include "cdgl/parser.hpp"

#include <cctype>
#include <optional>
#include <set>
#include <vector>

namespace cdgl {

namespace {

enum class Tok {
  End, Ident, Number, Prime,
  Plus, Minus, Star, Slash, LParen, RParen, Comma, Semi, Question,
  LBrace, RBrace, LBracket, RBracket,
  Lt, Gt, Le, Ge, Eq, Ne, Assign, Arrow, DArrow, Amp, Bar, Bang,
  PlusPlus, MinusMinus, PostDual, PostDRepeat,
};

struct Token {
  Tok kind;
  std::string text;
  Rat number;
  int line, col;
};

const std::set<std::string> kKeywords = {
    "const", "game", "formula", "min", "max", "sqrt",
    "true", "false", "forall", "exists"};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line, col, msg); }

  void advance(size_t n) {
    for (size_t i = 0; i < n && pos < src.size(); ++i, ++pos) {
      if (src[pos] == '\n') { ++line; col = 1; } else { ++col; }
    }
  }

  void skip_ws() {
    for (;;) {
      while (pos < src.size() && isspace(static_cast<unsigned char>(src[pos]))) advance(1);
      if (pos + 1 < src.size() && src[pos] == '/' && src[pos + 1] == '/') {
        while (pos < src.size() && src[pos] != '\n') advance(1);
        continue;
      }
      break;
    }
  }

  bool starts(const char* s) const {
    size_t n = strlen(s);
    return src.compare(pos, n, s) == 0;
  }

  Token next() {
    skip_ws();
    Token t;
    t.line = line;
    t.col = col;
    if (pos >= src.size()) { t.kind = Tok::End; return t; }
    char c = src[pos];
    if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos;
      while (pos < src.size() &&
             (isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
        advance(1);
      t.text = src.substr(start, pos - start);
      if (pos < src.size() && src[pos] == '\'') {
        advance(1);
        t.kind = Tok::Ident;
        t.text += "'";  // primed identifier, prime kept in text
        return t;
      }
      t.kind = Tok::Ident;
      return t;
    }
    if (isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos;
      while (pos < src.size() && isdigit(static_cast<unsigned char>(src[pos]))) advance(1);
      if (pos + 1 < src.size() && src[pos] == '.' &&
          isdigit(static_cast<unsigned char>(src[pos + 1]))) {
        advance(1);
        while (pos < src.size() && isdigit(static_cast<unsigned char>(src[pos]))) advance(1);
      }
      t.text = src.substr(start, pos - start);
      auto r = parse_rat(t.text);
      if (!r) fail("bad number literal '" + t.text + "'");
      t.kind = Tok::Number;
      t.number = *r;
      return t;
    }
    struct Sym { const char* s; Tok k; };
    static const Sym syms[] = {
        {"<->", Tok::DArrow}, {"<=", Tok::Le}, {">=", Tok::Ge}, {"!=", Tok::Ne},
        {":=", Tok::Assign},  {"->", Tok::Arrow}, {"++", Tok::PlusPlus},
        {"--", Tok::MinusMinus}, {"^d", Tok::PostDual}, {"^x", Tok::PostDRepeat},
        {"+", Tok::Plus}, {"-", Tok::Minus}, {"*", Tok::Star}, {"/", Tok::Slash},
        {"(", Tok::LParen}, {")", Tok::RParen}, {",", Tok::Comma}, {";", Tok::Semi},
        {"?", Tok::Question}, {"{", Tok::LBrace}, {"}", Tok::RBrace},
        {"[", Tok::LBracket}, {"]", Tok::RBracket}, {"<", Tok::Lt}, {">", Tok::Gt},
        {"=", Tok::Eq}, {"&", Tok::Amp}, {"|", Tok::Bar}, {"!", Tok::Bang},
        {"'", Tok::Prime},
    };
    for (const auto& s : syms) {
      if (starts(s.s)) {
        t.kind = s.k;
        t.text = s.s;
        advance(strlen(s.s));
        return t;
      }
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

struct Parser {
  std::vector<Token> toks;
  size_t idx = 0;
  const CdglFile* env;

  Parser(const std::string& text, const CdglFile* e) : env(e) {
    Lexer lx(text);
    for (;;) {
      Token t = lx.next();
      toks.push_back(t);
      if (t.kind == Tok::End) break;
    }
  }

  const Token& peek(size_t ahead = 0) const {
    size_t i = idx + ahead;
    return i < toks.size() ? toks[i] : toks.back();
  }
  Token take() { return toks[std::min(idx++, toks.size() - 1)]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool eat(Tok k) {
    if (at(k)) { ++idx; return true; }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(peek().line, peek().col, msg);
  }
  void expect(Tok k, const char* what) {
    if (!eat(k)) fail(std::string("expected ") + what);
  }

  bool ident_is(const std::string& s) const {
    return at(Tok::Ident) && peek().text == s;
  }

  void check_name(const std::string& name) {
    if (kKeywords.count(name)) fail("'" + name + "' is a reserved word");
  }

  // --- terms ---------------------------------------------------------------

  TermPtr term() { return term_add(); }

  TermPtr term_add() {
    TermPtr t = term_mul();
    for (;;) {
      if (eat(Tok::Plus)) t = t_plus(t, term_mul());
      else if (eat(Tok::Minus)) t = t_minus(t, term_mul());
      else return t;
    }
  }

  TermPtr term_mul() {
    TermPtr t = term_unary();
    for (;;) {
      if (eat(Tok::Star)) t = t_times(t, term_unary());
      else if (eat(Tok::Slash)) t = t_div(t, term_unary());
      else return t;
    }
  }

  TermPtr term_unary() {
    if (eat(Tok::Minus)) return t_neg(term_unary());
    return term_atom();
  }

  TermPtr term_atom() {
    if (at(Tok::Number)) return t_rat(take().number);
    if (at(Tok::Ident)) {
      std::string name = peek().text;
      if (name == "min" || name == "max") {
        take();
        expect(Tok::LParen, "'('");
        TermPtr a = term();
        expect(Tok::Comma, "','");
        TermPtr b = term();
        expect(Tok::RParen, "')'");
        return name == "min" ? t_min(a, b) : t_max(a, b);
      }
      if (name == "sqrt") {
        take();
        expect(Tok::LParen, "'('");
        TermPtr a = term();
        expect(Tok::RParen, "')'");
        return t_sqrt(a);
      }
      if (kKeywords.count(name)) fail("'" + name + "' cannot appear in a term");
      take();
      if (!name.empty() && name.back() == '\'')
        return t_primed(name.substr(0, name.size() - 1));
      if (env) {
        auto it = env->consts.find(name);
        if (it != env->consts.end()) return it->second;
      }
      return t_var(name);
    }
    if (eat(Tok::LParen)) {
      TermPtr first = term();
      std::vector<TermPtr> items{first};
      while (eat(Tok::Comma)) items.push_back(term());
      expect(Tok::RParen, "')'");
      TermPtr out = items.size() == 1 ? first : t_tuple(std::move(items));
      if (eat(Tok::Prime)) return t_differential(out);
      return out;
    }
    fail("expected a term");
  }

  // --- formulas ------------------------------------------------------------

  FormulaPtr formula() { return fml_iff(); }

  FormulaPtr fml_iff() {
    FormulaPtr a = fml_imp();
    while (eat(Tok::DArrow)) a = f_iff(a, fml_imp());
    return a;
  }

  FormulaPtr fml_imp() {
    FormulaPtr a = fml_or();
    if (eat(Tok::Arrow)) return f_imp(a, fml_imp());  // right-assoc
    return a;
  }

  FormulaPtr fml_or() {
    FormulaPtr a = fml_and();
    while (eat(Tok::Bar)) a = f_or(a, fml_and());
    return a;
  }

  FormulaPtr fml_and() {
    FormulaPtr a = fml_unary();
    while (eat(Tok::Amp)) a = f_and(a, fml_unary());
    return a;
  }

  FormulaPtr fml_unary() {
    if (eat(Tok::Bang)) return f_not(fml_unary());
    if (ident_is("forall") || ident_is("exists")) {
      bool univ = take().text == "forall";
      if (!at(Tok::Ident)) fail("expected a variable after quantifier");
      std::string x = take().text;
      check_name(x);
      FormulaPtr body = fml_unary();
      return univ ? f_forall(x, body) : f_exists(x, body);
    }
    if (at(Tok::Lt)) {
      take();
      GamePtr g = game();
      expect(Tok::Gt, "'>' closing the diamond modality");
      return f_diamond(g, fml_unary());
    }
    if (at(Tok::LBracket)) {
      take();
      GamePtr g = game();
      expect(Tok::RBracket, "']' closing the box modality");
      return f_box(g, fml_unary());
    }
    return fml_atom();
  }

  FormulaPtr fml_atom() {
    if (ident_is("true")) { take(); return f_true(); }
    if (ident_is("false")) { take(); return f_false(); }
    // Formula name reference.
    if (env && at(Tok::Ident) && env->formulas.count(peek().text) &&
        !is_cmp_start_after_ident()) {
      return env->formulas.at(take().text);
    }
    // Parenthesized formula vs comparison both may start with '('; try a
    // comparison first, falling back to a grouped formula.
    size_t save = idx;
    if (at(Tok::LParen)) {
      try {
        return comparison();
      } catch (const ParseError&) {
        idx = save;
      }
      expect(Tok::LParen, "'('");
      FormulaPtr f = formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    return comparison();
  }

  // After an identifier that names a formula, a comparison operator or a
  // term operator means the identifier is being used as a term variable.
  bool is_cmp_start_after_ident() const {
    switch (peek(1).kind) {
      case Tok::Le: case Tok::Lt: case Tok::Eq: case Tok::Ne:
      case Tok::Gt: case Tok::Ge: case Tok::Plus: case Tok::Minus:
      case Tok::Star: case Tok::Slash:
        return true;
      default:
        return false;
    }
  }

  FormulaPtr comparison() {
    TermPtr l = term();
    Rel r;
    if (eat(Tok::Le)) r = Rel::Le;
    else if (eat(Tok::Lt)) r = Rel::Lt;
    else if (eat(Tok::Eq)) r = Rel::Eq;
    else if (eat(Tok::Ne)) r = Rel::Ne;
    else if (eat(Tok::Gt)) r = Rel::Gt;
    else if (eat(Tok::Ge)) r = Rel::Ge;
    else fail("expected a comparison operator");
    return f_cmp(l, r, term());
  }

  // --- games ---------------------------------------------------------------

  GamePtr game() { return game_choice(); }

  GamePtr game_choice() {
    GamePtr g = game_seq();
    for (;;) {
      if (eat(Tok::PlusPlus)) g = g_choice(g, game_seq());
      else if (eat(Tok::MinusMinus)) g = g_dchoice(g, game_seq());
      else return g;
    }
  }

  GamePtr game_seq() {
    GamePtr g = game_postfix();
    if (eat(Tok::Semi)) return g_seq(g, game_seq());  // right-assoc
    return g;
  }

  GamePtr game_postfix() {
    GamePtr g = game_atom();
    for (;;) {
      if (eat(Tok::Star)) g = g_repeat(g);
      else if (eat(Tok::PostDual)) g = g_dual(g);
      else if (eat(Tok::PostDRepeat)) g = g_drepeat(g);
      else return g;
    }
  }

  bool brace_is_ode() const {
    // After '{': IDENT' = ...  (the lexer folds the prime into the ident).
    return at(Tok::Ident) && !peek().text.empty() && peek().text.back() == '\'' &&
           peek(1).kind == Tok::Eq;
  }

  GamePtr game_atom() {
    if (eat(Tok::Question)) return g_test(formula());
    if (eat(Tok::LBrace)) {
      if (brace_is_ode()) {
        std::vector<std::pair<std::string, TermPtr>> eqs;
        for (;;) {
          if (!at(Tok::Ident)) fail("expected x' = rhs in ODE");
          std::string n = take().text;
          if (n.empty() || n.back() != '\'') fail("ODE left-hand sides must be primed");
          n.pop_back();
          check_name(n);
          for (const auto& e : eqs)
            if (e.first == n) fail("duplicate ODE variable '" + n + "'");
          expect(Tok::Eq, "'='");
          eqs.emplace_back(n, term());
          if (eat(Tok::Comma)) continue;
          break;
        }
        FormulaPtr dom = f_true();
        if (eat(Tok::Amp)) dom = formula();
        expect(Tok::RBrace, "'}' closing the ODE");
        return g_ode(std::move(eqs), dom);
      }
      GamePtr g = game();
      expect(Tok::RBrace, "'}'");
      return g;
    }
    if (at(Tok::Ident)) {
      std::string name = peek().text;
      if (env && env->games.count(name)) {
        take();
        return env->games.at(name);
      }
      if (peek(1).kind == Tok::Assign) {
        take();
        check_name(name);
        if (!name.empty() && name.back() == '\'') fail("cannot assign to a primed variable");
        take();  // :=
        if (eat(Tok::Star)) return g_assign_any(name);
        return g_assign(name, term());
      }
      fail("'" + name + "' is not a game name or assignment");
    }
    fail("expected a game");
  }

  // --- declarations ----------------------------------------------------------

  CdglFile file() {
    CdglFile out;
    env = &out;
    while (!at(Tok::End)) {
      if (!at(Tok::Ident)) fail("expected a declaration (const/game/formula)");
      std::string kw = take().text;
      if (kw != "const" && kw != "game" && kw != "formula")
        fail("expected 'const', 'game', or 'formula', got '" + kw + "'");
      if (!at(Tok::Ident)) fail("expected a name after '" + kw + "'");
      std::string name = take().text;
      check_name(name);
      if (out.consts.count(name) || out.games.count(name) || out.formulas.count(name))
        fail("duplicate declaration '" + name + "'");
      expect(Tok::Eq, "'='");
      if (kw == "const") {
        // Constants are ground terms (typically literals or quotients).
        TermPtr t = term();
        out.consts[name] = t;
      } else if (kw == "game") {
        out.games[name] = game();
      } else {
        out.formulas[name] = formula();
      }
      out.order.push_back(name);
    }
    return out;
  }
};

}  // namespace

TermPtr parse_term(const std::string& text, const CdglFile* env) {
  Parser p(text, env);
  TermPtr t = p.term();
  if (!p.at(Tok::End)) p.fail("trailing input after term");
  return t;
}

GamePtr parse_game(const std::string& text, const CdglFile* env) {
  Parser p(text, env);
  GamePtr g = p.game();
  if (!p.at(Tok::End)) p.fail("trailing input after game");
  return g;
}

FormulaPtr parse_formula(const std::string& text, const CdglFile* env) {
  Parser p(text, env);
  FormulaPtr f = p.formula();
  if (!p.at(Tok::End)) p.fail("trailing input after formula");
  return f;
}

CdglFile parse_cdgl(const std::string& text) {
  Parser p(text, nullptr);
  return p.file();
}

}  // namespace cdgl
