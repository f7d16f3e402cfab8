#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>

#include "cdgl/rational.hpp"

namespace cdgl {

struct EvalError : std::runtime_error {
  explicit EvalError(const std::string& msg) : std::runtime_error(msg) {}
};
struct DivisionNearZero : EvalError {
  explicit DivisionNearZero(const std::string& msg) : EvalError(msg) {}
};
struct SqrtOfNegative : EvalError {
  explicit SqrtOfNegative(const std::string& msg) : EvalError(msg) {}
};

// Closed interval with exact rational endpoints.
struct Interval {
  Rat lo, hi;

  Interval() : lo(0), hi(0) {}
  Interval(Rat l, Rat h) : lo(std::move(l)), hi(std::move(h)) {
    if (lo > hi) throw std::logic_error("Interval: lo > hi");
  }
  static Interval point(const Rat& r) { return Interval(r, r); }

  Rat width() const { return hi - lo; }
  bool contains(const Rat& r) const { return lo <= r && r <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }

  Interval intersect(const Interval& o) const {
    Rat l = std::max(lo, o.lo), h = std::min(hi, o.hi);
    if (l > h) throw std::logic_error("Interval: empty intersection");
    return Interval(l, h);
  }
  Interval hull(const Interval& o) const {
    return Interval(std::min(lo, o.lo), std::max(hi, o.hi));
  }

  // Round endpoints outward to denominator 2^bits when they have grown large.
  // Keeps rational sizes bounded; enlarges width by at most 2^(1-bits).
  Interval round_out(long bits) const {
    Interval r = *this;
    if (rat_bits(lo) > static_cast<size_t>(bits) + 64) {
      r.lo = Rat(scaled_floor(lo, bits)) / pow2(bits);
      r.lo.canonicalize();
    }
    if (rat_bits(hi) > static_cast<size_t>(bits) + 64) {
      r.hi = Rat(scaled_ceil(hi, bits)) / pow2(bits);
      r.hi.canonicalize();
    }
    return r;
  }
};

inline Interval operator+(const Interval& a, const Interval& b) {
  return Interval(a.lo + b.lo, a.hi + b.hi);
}
inline Interval operator-(const Interval& a) { return Interval(-a.hi, -a.lo); }
inline Interval operator-(const Interval& a, const Interval& b) { return a + (-b); }

inline Interval operator*(const Interval& a, const Interval& b) {
  Rat p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return Interval(std::min(std::min(p1, p2), std::min(p3, p4)),
                  std::max(std::max(p1, p2), std::max(p3, p4)));
}

// Requires 0 outside b.
inline Interval operator/(const Interval& a, const Interval& b) {
  if (sgn(b.lo) <= 0 && sgn(b.hi) >= 0)
    throw DivisionNearZero("interval division: divisor contains zero");
  Rat p1 = a.lo / b.lo, p2 = a.lo / b.hi, p3 = a.hi / b.lo, p4 = a.hi / b.hi;
  return Interval(std::min(std::min(p1, p2), std::min(p3, p4)),
                  std::max(std::max(p1, p2), std::max(p3, p4)));
}

inline Interval imin(const Interval& a, const Interval& b) {
  return Interval(std::min(a.lo, b.lo), std::min(a.hi, b.hi));
}
inline Interval imax(const Interval& a, const Interval& b) {
  return Interval(std::max(a.lo, b.lo), std::max(a.hi, b.hi));
}

// sqrt enclosure; hard error only when the argument is certainly negative.
// Arguments straddling zero are clipped at zero, so sqrt stays total there.
inline Interval isqrt(const Interval& a, long bits) {
  if (sgn(a.hi) < 0) throw SqrtOfNegative("sqrt of certainly negative value");
  Rat lo_arg = sgn(a.lo) < 0 ? Rat(0) : a.lo;
  Rat l1, h1, l2, h2;
  sqrt_bounds(lo_arg, bits, l1, h1);
  sqrt_bounds(a.hi, bits, l2, h2);
  return Interval(l1, h2);
}

inline std::string interval_str(const Interval& i) {
  return "[" + rat_str(i.lo) + ", " + rat_str(i.hi) + "]";
}

}  // namespace cdgl
