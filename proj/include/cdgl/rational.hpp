#pragma once

#include <gmpxx.h>
#include <optional>
#include <stdexcept>
#include <string>

namespace cdgl {

using Rat = mpq_class;
using Int = mpz_class;

inline Rat rat_of_long(long n) { return Rat(n); }

// 2^k for k possibly negative.
inline Rat pow2(long k) {
  Int one = 1;
  if (k >= 0) {
    Int num = one << static_cast<unsigned long>(k);
    return Rat(num);
  }
  Int den = one << static_cast<unsigned long>(-k);
  Rat r(one, den);
  r.canonicalize();
  return r;
}

// Parse "p/q", "p", or an exact decimal like "3.25" / "-0.5".
inline std::optional<Rat> parse_rat(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::string t = s;
  bool neg = false;
  if (t[0] == '+' || t[0] == '-') {
    neg = t[0] == '-';
    t = t.substr(1);
  }
  if (t.empty()) return std::nullopt;
  auto slash = t.find('/');
  Rat r;
  try {
    if (slash != std::string::npos) {
      std::string num = t.substr(0, slash), den = t.substr(slash + 1);
      if (num.empty() || den.empty()) return std::nullopt;
      for (char c : num) if (!isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      for (char c : den) if (!isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      Int n(num), d(den);
      if (d == 0) return std::nullopt;
      r = Rat(n, d);
      r.canonicalize();
    } else {
      auto dot = t.find('.');
      if (dot == std::string::npos) {
        for (char c : t) if (!isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        r = Rat(Int(t));
      } else {
        std::string whole = t.substr(0, dot), frac = t.substr(dot + 1);
        if (whole.empty() && frac.empty()) return std::nullopt;
        for (char c : whole) if (!isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        for (char c : frac) if (!isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        Int w = whole.empty() ? Int(0) : Int(whole);
        Int f = frac.empty() ? Int(0) : Int(frac);
        Int scale = 1;
        for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
        r = Rat(w * scale + f, scale);
        r.canonicalize();
      }
    }
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  if (neg) r = -r;
  return r;
}

// Canonical "p/q" (or "p" when integral). Used for JSON interval endpoints.
inline std::string rat_str(const Rat& r) { return r.get_str(); }

// True when r has an exact finite decimal expansion (denominator 2^a 5^b).
inline bool is_decimal_rat(const Rat& r) {
  Int d = r.get_den();
  while (d % 2 == 0) d /= 2;
  while (d % 5 == 0) d /= 5;
  return d == 1;
}

// Exact decimal rendering; requires is_decimal_rat.
inline std::string decimal_str(const Rat& r) {
  Rat a = abs(r);
  Int den = a.get_den();
  unsigned twos = 0, fives = 0;
  while (den % 2 == 0) { den /= 2; ++twos; }
  while (den % 5 == 0) { den /= 5; ++fives; }
  unsigned digits = std::max(twos, fives);
  Int scale = 1;
  for (unsigned i = 0; i < digits; ++i) scale *= 10;
  Int units = a.get_num() * (scale / a.get_den());
  std::string s = units.get_str();
  std::string out;
  if (digits == 0) {
    out = s;
  } else {
    while (s.size() <= digits) s = "0" + s;
    out = s.substr(0, s.size() - digits) + "." + s.substr(s.size() - digits);
  }
  if (sgn(r) < 0) out = "-" + out;
  return out;
}

inline long floor_div(const Int& a, const Int& b) {
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q.get_si();
}

// floor(r * 2^bits) as an Int.
inline Int scaled_floor(const Rat& r, long bits) {
  Rat s = r * pow2(bits);
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), s.get_num().get_mpz_t(), s.get_den().get_mpz_t());
  return q;
}

inline Int scaled_ceil(const Rat& r, long bits) {
  Rat s = r * pow2(bits);
  Int q;
  mpz_cdiv_q(q.get_mpz_t(), s.get_num().get_mpz_t(), s.get_den().get_mpz_t());
  return q;
}

// Directed dyadic sqrt bounds: lo <= sqrt(r) <= hi, hi - lo <= 2^-bits.
// Exact (lo == hi) for perfect-square rationals. Requires r >= 0.
inline void sqrt_bounds(const Rat& r, long bits, Rat& lo, Rat& hi) {
  if (sgn(r) < 0) throw std::domain_error("sqrt_bounds: negative argument");
  if (sgn(r) == 0) {
    lo = hi = Rat(0);
    return;
  }
  if (mpz_perfect_square_p(r.get_num().get_mpz_t()) &&
      mpz_perfect_square_p(r.get_den().get_mpz_t())) {
    Int rn, rd;
    mpz_sqrt(rn.get_mpz_t(), r.get_num().get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), r.get_den().get_mpz_t());
    lo = hi = Rat(rn, rd);
    lo.canonicalize();
    hi.canonicalize();
    return;
  }
  Int scaled = scaled_floor(r, 2 * bits);  // floor(r * 4^bits)
  Int root;
  mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
  Rat denom = pow2(bits);
  lo = Rat(root) / denom;
  hi = Rat(root + 1) / denom;
  lo.canonicalize();
  hi.canonicalize();
}

// Total bit size of a rational, used to decide when to round intervals.
inline size_t rat_bits(const Rat& r) {
  return mpz_sizeinbase(r.get_num().get_mpz_t(), 2) +
         mpz_sizeinbase(r.get_den().get_mpz_t(), 2);
}

}  // namespace cdgl
