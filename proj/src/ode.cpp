#include "cdgl/ode.hpp"

#include <algorithm>
#include <mutex>

#include "cdgl/printer.hpp"
#include "cdgl/statics.hpp"

namespace cdgl {

// --- ODESystem ---------------------------------------------------------------

ODESystem ODESystem::from_game(const GamePtr& ode) {
  if (ode->kind != Game::Kind::ODE)
    throw std::invalid_argument("from_game: not an ODE");
  ODESystem s{ode->equations, ode->domain};
  s.validate();
  return s;
}

void ODESystem::validate() const {
  std::set<std::string> seen;
  for (const auto& [x, rhs] : equations) {
    if (!seen.insert(x).second)
      throw std::invalid_argument("ODE variable '" + x + "' repeated");
    for (const auto& v : free_vars(rhs))
      if (is_primed_name(v))
        throw std::invalid_argument("ODE right-hand side mentions primed variable " + v);
  }
  for (const auto& v : free_vars(domain))
    if (is_primed_name(v))
      throw std::invalid_argument("ODE domain mentions primed variable " + v);
}

// --- Poly --------------------------------------------------------------------

void Poly::add_monomial(const Monomial& m, const Rat& c) {
  if (sgn(c) == 0) return;
  auto it = coeffs_.find(m);
  if (it == coeffs_.end()) {
    coeffs_[m] = c;
  } else {
    it->second += c;
    if (sgn(it->second) == 0) coeffs_.erase(it);
  }
}

Poly Poly::constant(const Rat& c) {
  Poly p;
  Rat cc = c;
  cc.canonicalize();
  p.add_monomial({}, cc);
  return p;
}

Poly Poly::variable(const std::string& x) {
  Poly p;
  p.add_monomial({{x, 1}}, Rat(1));
  return p;
}

Poly Poly::operator+(const Poly& o) const {
  Poly r = *this;
  for (const auto& [m, c] : o.coeffs_) r.add_monomial(m, c);
  return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + o.scale(Rat(-1)); }

Poly Poly::operator*(const Poly& o) const {
  Poly r;
  for (const auto& [m1, c1] : coeffs_) {
    for (const auto& [m2, c2] : o.coeffs_) {
      Monomial m = m1;
      for (const auto& [v, e] : m2) m[v] += e;
      r.add_monomial(m, c1 * c2);
    }
  }
  return r;
}

Poly Poly::scale(const Rat& c) const {
  Poly r;
  if (sgn(c) == 0) return r;
  for (const auto& [m, k] : coeffs_) r.coeffs_[m] = k * c;
  return r;
}

Poly Poly::partial(const std::string& x) const {
  Poly r;
  for (const auto& [m, c] : coeffs_) {
    auto it = m.find(x);
    if (it == m.end()) continue;
    Monomial m2 = m;
    unsigned e = it->second;
    if (e == 1) m2.erase(x); else m2[x] = e - 1;
    r.add_monomial(m2, c * Rat(static_cast<long>(e)));
  }
  return r;
}

Poly Poly::subst(const std::map<std::string, Poly>& sub) const {
  Poly r;
  for (const auto& [m, c] : coeffs_) {
    Poly term = Poly::constant(c);
    for (const auto& [v, e] : m) {
      auto it = sub.find(v);
      Poly base = it != sub.end() ? it->second : Poly::variable(v);
      for (unsigned i = 0; i < e; ++i) term = term * base;
    }
    r = r + term;
  }
  return r;
}

unsigned Poly::degree() const {
  unsigned d = 0;
  for (const auto& [m, c] : coeffs_) {
    unsigned t = 0;
    for (const auto& [v, e] : m) t += e;
    d = std::max(d, t);
  }
  return d;
}

std::optional<Poly> Poly::from_term(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Rational: return Poly::constant(t->value);
    case Term::Kind::Var: return Poly::variable(t->name);
    case Term::Kind::Plus: {
      auto a = from_term(t->args[0]), b = from_term(t->args[1]);
      if (!a || !b) return std::nullopt;
      return *a + *b;
    }
    case Term::Kind::Times: {
      auto a = from_term(t->args[0]), b = from_term(t->args[1]);
      if (!a || !b) return std::nullopt;
      return *a * *b;
    }
    case Term::Kind::Neg: {
      auto a = from_term(t->args[0]);
      if (!a) return std::nullopt;
      return a->scale(Rat(-1));
    }
    case Term::Kind::Div: {
      auto a = from_term(t->args[0]), b = from_term(t->args[1]);
      if (!a || !b) return std::nullopt;
      // division by a nonzero constant only
      TermPtr bt = b->to_term();
      if (bt->kind == Term::Kind::Rational && sgn(bt->value) != 0)
        return a->scale(Rat(1) / bt->value);
      if (bt->kind == Term::Kind::Neg && bt->args[0]->kind == Term::Kind::Rational &&
          sgn(bt->args[0]->value) != 0)
        return a->scale(Rat(-1) / bt->args[0]->value);
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

TermPtr Poly::to_term() const {
  if (coeffs_.empty()) return t_int(0);
  TermPtr acc;
  for (const auto& [m, c] : coeffs_) {
    TermPtr mono = t_rat(c);
    bool trivial_coeff = c == Rat(1) && !m.empty();
    if (trivial_coeff) mono = nullptr;
    for (const auto& [v, e] : m) {
      for (unsigned i = 0; i < e; ++i) {
        TermPtr vt = t_var(v);
        mono = mono ? t_times(mono, vt) : vt;
      }
    }
    acc = acc ? t_plus(acc, mono) : mono;
  }
  return acc;
}

// --- nilpotent solving --------------------------------------------------------

namespace {

// Time derivative along the system: D(p) = sum_i dp/dx_i * f_i.
Poly lie_derivative(const Poly& p, const std::vector<std::pair<std::string, Poly>>& rhs) {
  Poly r;
  for (const auto& [x, f] : rhs) r = r + p.partial(x) * f;
  return r;
}

constexpr unsigned kNilpotentBound = 100;

}  // namespace

SymbolicSolution solve_nilpotent(const ODESystem& sys) {
  sys.validate();
  std::vector<std::pair<std::string, Poly>> rhs;
  for (const auto& [x, f] : sys.equations) {
    auto p = Poly::from_term(f);
    if (!p) throw NotNilpotent("right-hand side of " + x + "' is not polynomial");
    rhs.emplace_back(x, *p);
  }

  SymbolicSolution sol;
  sol.time_var = "$t";
  Rat factorial(1);
  for (const auto& [x, f] : rhs) {
    std::vector<Poly> cs;
    Poly g = Poly::variable(x);
    Rat fact(1);
    unsigned n = 0;
    while (!g.is_zero()) {
      if (n > kNilpotentBound)
        throw NotNilpotent("differentiation of " + x + " did not reach zero");
      cs.push_back(g.scale(Rat(1) / fact));
      g = lie_derivative(g, rhs);
      ++n;
      fact *= Rat(static_cast<long>(n));
    }
    if (cs.empty()) cs.push_back(Poly());
    sol.coeffs[x] = std::move(cs);
  }

  // Verify by symbolic differentiation: d/dt sol_i = f_i ∘ sol.
  std::map<std::string, Poly> as_poly;
  Poly timep = Poly::variable(sol.time_var);
  for (const auto& [x, cs] : sol.coeffs) {
    Poly p;
    Poly tp = Poly::constant(Rat(1));
    for (const auto& c : cs) {
      p = p + c * tp;
      tp = tp * timep;
    }
    as_poly[x] = p;
  }
  for (const auto& [x, f] : rhs) {
    Poly lhs = as_poly[x].partial(sol.time_var);
    Poly rhs_composed = f.subst(as_poly);
    if (!(lhs == rhs_composed))
      throw std::logic_error("nilpotent solution failed its differentiation check");
  }
  return sol;
}

TermPtr SymbolicSolution::value_term(const std::string& var, const TermPtr& time) const {
  auto it = coeffs.find(var);
  if (it == coeffs.end()) throw std::invalid_argument("no solution for " + var);
  const auto& cs = it->second;
  TermPtr acc;
  TermPtr tp;  // time^n, built incrementally
  for (size_t n = 0; n < cs.size(); ++n) {
    if (cs[n].is_zero()) {
      tp = n == 0 ? nullptr : (tp ? t_times(tp, time) : time);
      continue;
    }
    TermPtr c = cs[n].to_term();
    TermPtr item;
    if (n == 0) {
      item = c;
    } else {
      tp = tp ? t_times(tp, time) : time;
      bool unit = c->kind == Term::Kind::Rational && c->value == Rat(1);
      item = unit ? tp : t_times(c, tp);
    }
    acc = acc ? t_plus(acc, item) : item;
  }
  return acc ? acc : t_int(0);
}

unsigned SymbolicSolution::degree() const {
  unsigned d = 0;
  for (const auto& [x, cs] : coeffs) d = std::max(d, static_cast<unsigned>(cs.size()));
  return d == 0 ? 0 : d - 1;
}

// --- interval evaluation of terms over boxes ----------------------------------

namespace {

using Box = std::map<std::string, Interval>;

Interval eval_box(const TermPtr& t, const Box& box, long bits) {
  switch (t->kind) {
    case Term::Kind::Rational: return Interval::point(t->value);
    case Term::Kind::Var: {
      auto it = box.find(t->name);
      if (it == box.end()) return Interval::point(Rat(0));
      return it->second;
    }
    case Term::Kind::PrimedVar: {
      auto it = box.find(t->name + "'");
      if (it == box.end()) return Interval::point(Rat(0));
      return it->second;
    }
    case Term::Kind::Plus:
      return (eval_box(t->args[0], box, bits) + eval_box(t->args[1], box, bits)).round_out(bits);
    case Term::Kind::Times:
      return (eval_box(t->args[0], box, bits) * eval_box(t->args[1], box, bits)).round_out(bits);
    case Term::Kind::Div:
      return (eval_box(t->args[0], box, bits) / eval_box(t->args[1], box, bits)).round_out(bits);
    case Term::Kind::Min:
      return imin(eval_box(t->args[0], box, bits), eval_box(t->args[1], box, bits));
    case Term::Kind::Max:
      return imax(eval_box(t->args[0], box, bits), eval_box(t->args[1], box, bits));
    case Term::Kind::Neg: return -eval_box(t->args[0], box, bits);
    case Term::Kind::Sqrt: return isqrt(eval_box(t->args[0], box, bits), bits);
    default:
      throw NotEvaluable("cannot evaluate term over a box: " + pretty(t));
  }
}

Interval eval_poly_box(const Poly& p, const Box& box, long bits) {
  return eval_box(p.to_term(), box, bits);
}

Rat mag(const Interval& iv) { return std::max(abs(iv.lo), abs(iv.hi)); }

// Bound on |d f / d x| over the box (Clarke-style for min/max).
Interval partial_bound(const TermPtr& t, const std::string& x, const Box& box, long bits);

Interval hull2(const Interval& a, const Interval& b) { return a.hull(b); }

Interval partial_bound(const TermPtr& t, const std::string& x, const Box& box, long bits) {
  switch (t->kind) {
    case Term::Kind::Rational: return Interval::point(Rat(0));
    case Term::Kind::Var:
      return Interval::point(t->name == x ? Rat(1) : Rat(0));
    case Term::Kind::PrimedVar:
      return Interval::point(t->name + "'" == x ? Rat(1) : Rat(0));
    case Term::Kind::Plus:
      return partial_bound(t->args[0], x, box, bits) + partial_bound(t->args[1], x, box, bits);
    case Term::Kind::Times: {
      Interval u = eval_box(t->args[0], box, bits), v = eval_box(t->args[1], box, bits);
      return u * partial_bound(t->args[1], x, box, bits) +
             v * partial_bound(t->args[0], x, box, bits);
    }
    case Term::Kind::Div: {
      Interval u = eval_box(t->args[0], box, bits), v = eval_box(t->args[1], box, bits);
      Interval du = partial_bound(t->args[0], x, box, bits);
      Interval dv = partial_bound(t->args[1], x, box, bits);
      return (du * v - u * dv) / (v * v);
    }
    case Term::Kind::Neg: return -partial_bound(t->args[0], x, box, bits);
    case Term::Kind::Min:
    case Term::Kind::Max:
      return hull2(partial_bound(t->args[0], x, box, bits),
                   partial_bound(t->args[1], x, box, bits));
    case Term::Kind::Sqrt: {
      Interval u = eval_box(t->args[0], box, bits);
      if (sgn(u.lo) <= 0)
        throw LipschitzBoundFailure("sqrt argument not bounded away from zero on the box");
      Interval du = partial_bound(t->args[0], x, box, bits);
      return du / (Interval::point(Rat(2)) * isqrt(u, bits));
    }
    default:
      throw NotEvaluable("cannot bound partial of: " + pretty(t));
  }
}

}  // namespace

// --- validated integration -----------------------------------------------------

struct SampledSolution::Impl {
  ODESystem sys;
  State s0;
  Rat d;

  struct StepModel {
    Rat t0, h;
    // per var: Taylor coefficients (interval) and remainder coefficient for
    // the (m+1)-st power of the local time offset
    std::map<std::string, std::vector<Interval>> coeff;
    std::map<std::string, Interval> rem;
    unsigned order = 0;
  };
  struct Run {
    std::vector<StepModel> steps;
    Rat err;  // max end width
  };

  std::mutex mu;
  std::map<long, std::shared_ptr<Run>> runs;  // by precision

  // Taylor coefficient polynomials, shared by all runs (poly rhs only).
  bool polynomial = false;
  std::vector<std::pair<std::string, Poly>> rhs_poly;
  // var -> c_0..c_{m+1}; grown on demand
  std::map<std::string, std::vector<Poly>> taylor;
  unsigned taylor_order = 0;

  std::set<std::string> param_vars;  // free vars that are not ODE vars

  explicit Impl(ODESystem s, State st, Rat dd) : sys(std::move(s)), s0(std::move(st)), d(std::move(dd)) {
    polynomial = true;
    for (const auto& [x, f] : sys.equations) {
      auto p = Poly::from_term(f);
      if (!p) { polynomial = false; break; }
      rhs_poly.emplace_back(x, *p);
    }
    std::set<std::string> odevars;
    for (const auto& [x, f] : sys.equations) odevars.insert(x);
    for (const auto& [x, f] : sys.equations)
      for (const auto& v : free_vars(f))
        if (!odevars.count(v)) param_vars.insert(v);
  }

  void grow_taylor(unsigned order) {
    if (!polynomial) return;
    if (taylor_order >= order && !taylor.empty()) return;
    taylor.clear();
    for (const auto& [x, f] : rhs_poly) {
      std::vector<Poly> cs;
      Poly g = Poly::variable(x);
      Rat fact(1);
      for (unsigned n = 0; n <= order + 1; ++n) {
        cs.push_back(g.scale(Rat(1) / fact));
        if (g.is_zero()) break;
        g = lie_derivative_pub(g);
        fact *= Rat(static_cast<long>(n + 1));
      }
      taylor[x] = std::move(cs);
    }
    taylor_order = order;
  }

  Poly lie_derivative_pub(const Poly& p) {
    Poly r;
    for (const auto& [x, f] : rhs_poly) r = r + p.partial(x) * f;
    return r;
  }

  // Interval rhs evaluation at a box.
  std::vector<Interval> F(const Box& box, long bits) {
    std::vector<Interval> out;
    for (const auto& [x, f] : sys.equations) out.push_back(eval_box(f, box, bits));
    return out;
  }

  Rat lipschitz(const Box& box, long bits) {
    Rat L(0);
    for (const auto& [x, f] : sys.equations) {
      Rat row(0);
      for (const auto& [y, g] : sys.equations) row += mag(partial_bound(f, y, box, bits));
      L = std::max(L, row);
    }
    return L;
  }

  // A-priori box for one step: X0 + [0,h]·F(B) ⊆ B by inflation.
  Box apriori(const Box& x0, const Rat& h, long bits) {
    Box b = x0;
    // initial guess: widen by |f|*h + slack
    std::vector<Interval> f0 = F(x0, bits);
    size_t i = 0;
    Rat slack = pow2(-8);
    for (const auto& [x, rhs] : sys.equations) {
      Rat r = mag(f0[i]) * h * 2 + slack;
      b[x] = Interval(x0.at(x).lo - r, x0.at(x).hi + r);
      ++i;
    }
    for (int tries = 0; tries < 40; ++tries) {
      std::vector<Interval> fb = F(b, bits);
      Box cand = x0;
      bool inside = true;
      i = 0;
      for (const auto& [x, rhs] : sys.equations) {
        Rat lo = std::min(Rat(0), Rat(fb[i].lo * h)), hi = std::max(Rat(0), Rat(fb[i].hi * h));
        Interval next(x0.at(x).lo + lo, x0.at(x).hi + hi);
        if (!b.at(x).contains(next)) inside = false;
        cand[x] = next;
        ++i;
      }
      if (inside) return b;
      // inflate towards the candidate
      i = 0;
      for (const auto& [x, rhs] : sys.equations) {
        Interval grown = b.at(x).hull(cand.at(x));
        Rat w = grown.width() / 4 + slack;
        b[x] = Interval(grown.lo - w, grown.hi + w);
        ++i;
      }
    }
    throw LipschitzBoundFailure("no invariant a-priori box found for step");
  }

  // One integration run at target precision k; returns max end width.
  // The lock covers the whole computation (shared Taylor tables).
  std::shared_ptr<Run> integrate(long k) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = runs.find(k);
    if (it != runs.end()) return it->second;
    long bits = k + 16;
    unsigned order = polynomial ? std::min<unsigned>(20, 6 + static_cast<unsigned>(k) / 3) : 1;

    for (int attempt = 0; attempt < 6; ++attempt, bits += 16) {
      Box x0;
      for (const auto& [x, f] : sys.equations)
        x0[x] = s0.get(x).refine(bits).round_out(bits + 8);
      for (const auto& p : param_vars)
        x0[p] = s0.get(p).refine(bits).round_out(bits + 8);

      // Lipschitz constant on a coarse whole-interval box to pick N.
      Rat L(1);
      try {
        Box whole = apriori(x0, d, 24);
        L = std::max(Rat(1, 1024), lipschitz(whole, 24));
      } catch (const LipschitzBoundFailure&) {
        // fall back to per-step boxes with conservative subdivision
        L = Rat(4);
      }
      // subdivision with contraction rate L*d/N <= 1/2
      long N = 1;
      while (Rat(N) < L * d * 2 * (attempt + 1)) N *= 2;
      if (!polynomial) N = std::max<long>(N, 1L << std::min<long>(k / 2 + 4, 14));

      try {
        auto run = std::make_shared<Run>();
        Rat h = d / N;
        Box cur = x0;
        Rat errmax(0);
        if (polynomial) grow_taylor(order);
        for (long stepi = 0; stepi < N; ++stepi) {
          StepModel sm;
          sm.t0 = h * stepi;
          sm.h = h;
          Box b = apriori(cur, h, bits);
          if (polynomial) {
            sm.order = order;
            for (const auto& [x, cs] : taylor) {
              std::vector<Interval> ci;
              unsigned m = std::min<unsigned>(order, cs.size() ? cs.size() - 1 : 0);
              for (unsigned n = 0; n <= m && n < cs.size(); ++n)
                ci.push_back(eval_poly_box(cs[n], cur, bits).round_out(bits + 8));
              sm.coeff[x] = std::move(ci);
              // Lagrange remainder: c_{m+1} on the a-priori box
              if (cs.size() > m + 1)
                sm.rem[x] = eval_poly_box(cs[m + 1], b, 24);
              else
                sm.rem[x] = Interval::point(Rat(0));
            }
          } else {
            // first-order mean value form: x0 + t*F(B)
            sm.order = 0;
            std::vector<Interval> fb = F(b, bits);
            size_t i = 0;
            for (const auto& [x, f] : sys.equations) {
              sm.coeff[x] = {cur.at(x)};
              sm.rem[x] = fb[i];
              ++i;
            }
          }
          run->steps.push_back(sm);
          // advance: evaluate model at local time h
          Box next;
          for (const auto& [x, cs] : sm.coeff) {
            Interval v = eval_model(sm, x, h);
            next[x] = v.round_out(bits + 8);
            errmax = std::max(errmax, v.width());
          }
          for (const auto& p : param_vars) next[p] = cur.at(p);
          cur = next;
        }
        run->err = errmax;
        if (errmax <= pow2(-k)) {
          runs[k] = run;
          return run;
        }
        order = std::min<unsigned>(24, order + 6);
      } catch (const LipschitzBoundFailure&) {
        if (attempt == 5) throw;
      }
    }
    throw LipschitzBoundFailure("integration did not reach the requested width");
  }

  static Interval eval_model(const StepModel& sm, const std::string& x, const Rat& dt) {
    const auto& cs = sm.coeff.at(x);
    Interval acc = Interval::point(Rat(0));
    Interval tp = Interval::point(Rat(1));
    Interval dtv = Interval::point(dt);
    for (const auto& c : cs) {
      acc = acc + c * tp;
      tp = tp * dtv;
    }
    // remainder multiplies the next power
    acc = acc + sm.rem.at(x) * tp;
    return acc;
  }

  Interval sample(const std::string& var, const Rat& t, long k) {
    if (t < 0 || t > d) throw std::invalid_argument("sample time outside [0,d]");
    auto run = integrate(k);
    if (run->steps.empty()) {  // d == 0
      return s0.get(var).refine(k);
    }
    // find the step containing t
    size_t idx = run->steps.size() - 1;
    for (size_t i = 0; i < run->steps.size(); ++i) {
      const auto& sm = run->steps[i];
      if (t <= sm.t0 + sm.h) { idx = i; break; }
    }
    const auto& sm = run->steps[idx];
    if (sm.coeff.count(var)) return eval_model(sm, var, t - sm.t0);
    // parameters stay constant
    return s0.get(var).refine(k);
  }
};

SampledSolution::SampledSolution(ODESystem sys, State s0, Rat d, long k)
    : impl_(std::make_shared<Impl>(sys, s0, d)), sys_(std::move(sys)), s0_(std::move(s0)),
      d_(std::move(d)), k_(k) {
  if (sgn(d_) < 0) throw std::invalid_argument("negative duration");
  if (sgn(d_) > 0) impl_->integrate(k);  // establishes feasibility eagerly
}

Interval SampledSolution::sample_interval(const std::string& var, const Rat& t, long k) const {
  if (sgn(d_) == 0) return s0_.get(var).refine(k);
  return impl_->sample(var, t, k);
}

State SampledSolution::sample(const Rat& t) const {
  State s = s0_;
  auto impl = impl_;
  Rat tt = t;
  for (const auto& [x, f] : sys_.equations) {
    std::string var = x;
    if (sgn(d_) == 0) continue;  // state unchanged at duration 0
    s = s.set(x, CReal::from_fn([impl, var, tt](long k) { return impl->sample(var, tt, k); }));
  }
  // primed variables read the rhs at the sampled state
  State base = s;
  for (const auto& [x, f] : sys_.equations) {
    s = s.set(x + "'", eval_creal(f, base));
  }
  return s;
}

SampledSolution picard_solve(const ODESystem& sys, const State& s0, const Rat& d, long k) {
  return SampledSolution(sys, s0, d, k);
}

// --- check_solves ---------------------------------------------------------------

namespace {

// |v| <= tol certified at adequate precision.
bool within_tol(const CReal& v, const Rat& tol) {
  long k = 4;
  while (pow2(-k) > tol / 4) ++k;
  Interval iv = v.refine(k);
  return iv.lo >= -tol && iv.hi <= tol;
}

bool sampled_check(const std::function<State(const Rat&)>& sample, const State& s,
                   const Rat& d, const ODESystem& sys, const SolvesOptions& opt) {
  // initial values agree
  State at0 = sample(Rat(0));
  for (const auto& [x, f] : sys.equations) {
    if (!within_tol(at0.get(x) - s.get(x), opt.tol)) return false;
  }
  if (sgn(d) == 0) return true;
  Rat delta = d * pow2(-opt.fd_shift);
  for (long j = 0; j <= opt.grid; ++j) {
    Rat t = d * Rat(j) / Rat(opt.grid);
    bool backward = t + delta > d;
    Rat t2 = backward ? Rat(t - delta) : Rat(t + delta);
    State st = sample(t), st2 = sample(t2);
    for (const auto& [x, f] : sys.equations) {
      CReal fd = (st2.get(x) - st.get(x)) / CReal(backward ? -delta : delta);
      CReal rhs = eval_creal(f, st);
      if (!within_tol(fd - rhs, opt.tol)) return false;
    }
  }
  return true;
}

}  // namespace

bool check_solves(const SymbolicSolution& sol, const State& s, const Rat& d,
                  const ODESystem& sys, const SolvesOptions& opt) {
  if (sgn(d) < 0) return false;
  // initial-value condition: value at time 0 equals the state
  for (const auto& [x, f] : sys.equations) {
    auto it = sol.coeffs.find(x);
    if (it == sol.coeffs.end()) return false;
    TermPtr c0 = it->second.empty() ? t_int(0) : it->second[0].to_term();
    if (!within_tol(eval_creal(c0, s) - s.get(x), opt.tol)) return false;
  }

  // derivative condition, exactly when the rhs is polynomial
  bool all_poly = true;
  std::map<std::string, Poly> sol_poly;
  Poly timep = Poly::variable(sol.time_var);
  for (const auto& [x, cs] : sol.coeffs) {
    Poly p;
    Poly tp = Poly::constant(Rat(1));
    for (const auto& c : cs) {
      p = p + c * tp;
      tp = tp * timep;
    }
    sol_poly[x] = p;
  }
  for (const auto& [x, f] : sys.equations) {
    auto fp = Poly::from_term(f);
    if (!fp) { all_poly = false; break; }
  }
  if (all_poly) {
    for (const auto& [x, f] : sys.equations) {
      Poly lhs = sol_poly[x].partial(sol.time_var);
      Poly rhs = Poly::from_term(f)->subst(sol_poly);
      if (!(lhs == rhs)) return false;
    }
    return true;
  }

  // fall back to the sampled check, substituting explicit times
  auto sample = [&](const Rat& t) {
    State st = s;
    for (const auto& [x, cs] : sol.coeffs) {
      TermPtr v = sol.value_term(x, t_rat(t));
      st = st.set(x, eval_creal(v, s));
    }
    return st;
  };
  return sampled_check(sample, s, d, sys, opt);
}

bool check_solves(const SampledSolution& sol, const State& s, const Rat& d,
                  const ODESystem& sys, const SolvesOptions& opt) {
  if (sgn(d) < 0 || d > sol.duration()) return false;
  auto sample = [&](const Rat& t) { return sol.sample(t); };
  return sampled_check(sample, s, d, sys, opt);
}

// --- differentials ----------------------------------------------------------------

namespace {
bool is_zero_term(const TermPtr& t) {
  return t->kind == Term::Kind::Rational && sgn(t->value) == 0;
}
bool is_one_term(const TermPtr& t) {
  return t->kind == Term::Kind::Rational && t->value == Rat(1);
}
TermPtr s_plus(const TermPtr& a, const TermPtr& b) {
  if (is_zero_term(a)) return b;
  if (is_zero_term(b)) return a;
  return t_plus(a, b);
}
TermPtr s_times(const TermPtr& a, const TermPtr& b) {
  if (is_zero_term(a) || is_zero_term(b)) return t_int(0);
  if (is_one_term(a)) return b;
  if (is_one_term(b)) return a;
  return t_times(a, b);
}
}  // namespace

TermPtr symbolic_partial(const TermPtr& t, const std::string& x) {
  switch (t->kind) {
    case Term::Kind::Rational: return t_int(0);
    case Term::Kind::Var: return t->name == x ? t_int(1) : t_int(0);
    case Term::Kind::PrimedVar: return t_int(0);
    case Term::Kind::Plus:
      return s_plus(symbolic_partial(t->args[0], x), symbolic_partial(t->args[1], x));
    case Term::Kind::Times:
      return s_plus(s_times(symbolic_partial(t->args[0], x), t->args[1]),
                    s_times(t->args[0], symbolic_partial(t->args[1], x)));
    case Term::Kind::Div: {
      // (u/v)' = (u'v - uv') / v^2
      TermPtr u = t->args[0], v = t->args[1];
      TermPtr du = symbolic_partial(u, x), dv = symbolic_partial(v, x);
      TermPtr num = t_minus(s_times(du, v), s_times(u, dv));
      if (is_zero_term(du) && is_zero_term(dv)) return t_int(0);
      return t_div(num, t_times(v, v));
    }
    case Term::Kind::Neg: return t_neg(symbolic_partial(t->args[0], x));
    case Term::Kind::Sqrt: {
      TermPtr du = symbolic_partial(t->args[0], x);
      if (is_zero_term(du)) return t_int(0);
      return t_div(du, t_times(t_int(2), t));
    }
    case Term::Kind::Min:
    case Term::Kind::Max:
      throw NonDifferentiable("min/max is not differentiable: " + pretty(t));
    case Term::Kind::Differential:
      throw NonDifferentiable("nested differential: " + pretty(t));
    case Term::Kind::Tuple:
      throw NonDifferentiable("tuple is not differentiable: " + pretty(t));
  }
  throw std::logic_error("symbolic_partial: bad term");
}

TermPtr total_differential(const TermPtr& t) {
  TermPtr acc = t_int(0);
  for (const auto& v : free_vars(t)) {
    if (is_primed_name(v)) continue;
    acc = s_plus(acc, s_times(symbolic_partial(t, v), t_primed(v)));
  }
  return acc;
}

TermPtr expand_differentials(const TermPtr& t) {
  if (t->kind == Term::Kind::Differential)
    return total_differential(expand_differentials(t->args[0]));
  if (t->args.empty()) return t;
  Term copy = *t;
  for (auto& a : copy.args) a = expand_differentials(a);
  return std::make_shared<Term>(std::move(copy));
}

FormulaPtr formula_differential(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Cmp: {
      TermPtr dl = total_differential(expand_differentials(f->lhs));
      TermPtr dr = total_differential(expand_differentials(f->rhs));
      switch (f->rel) {
        case Rel::Eq: return f_cmp(dl, Rel::Eq, dr);
        case Rel::Ge: return f_cmp(dl, Rel::Ge, dr);
        case Rel::Gt: return f_cmp(dl, Rel::Gt, dr);
        case Rel::Le: return f_cmp(dr, Rel::Ge, dl);
        case Rel::Lt: return f_cmp(dr, Rel::Gt, dl);
        case Rel::Ne:
          throw NonDifferentiable("(φ)' undefined for !=");
      }
      break;
    }
    case Formula::Kind::And:
    case Formula::Kind::Or:
      // (φ∧ψ)' = (φ∨ψ)' = (φ)' ∧ (ψ)'
      return f_and(formula_differential(f->sub), formula_differential(f->sub2));
    case Formula::Kind::Diamond:
      // desugared conjunction/disjunction shapes
      if (f->game->kind == Game::Kind::Test)
        return f_and(formula_differential(f->game->fml), formula_differential(f->sub));
      if (f->game->kind == Game::Kind::Choice && f->game->left->kind == Game::Kind::Test &&
          f->game->right->kind == Game::Kind::Test)
        return f_and(formula_differential(f->game->left->fml),
                     formula_differential(f->game->right->fml));
      break;
    default:
      break;
  }
  throw NonDifferentiable("(φ)' undefined for: " + pretty(f));
}

Interval differential_eval(const TermPtr& t, const State& s, long k) {
  TermPtr d = total_differential(expand_differentials(t));
  return eval_term(d, s, k);
}

}  // namespace cdgl
