#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "cdgl/interval.hpp"

namespace cdgl {

// Precision-on-demand real: refine(k) yields a nested interval of width
// <= 2^-k containing the value. Nodes memoize their tightest known
// enclosure; the memo only shrinks, which gives the nesting invariant.
// Safe for concurrent refinement (per-node mutex).
class CReal {
 public:
  struct Node {
    std::mutex mu;
    bool has_best = false;
    Interval best;
    long best_k = -1;

    virtual ~Node() = default;
    virtual Interval compute(long k) = 0;

    Interval refine(long k) {
      std::lock_guard<std::mutex> lock(mu);
      if (has_best && best_k >= k) return best;
      Interval iv = compute(k);
      if (has_best) iv = iv.intersect(best);
      best = iv;
      has_best = true;
      best_k = std::max(best_k, k);
      return best;
    }
  };

  CReal() : node_(make_const(Rat(0))) {}
  explicit CReal(const Rat& r) : node_(make_const(r)) {}
  explicit CReal(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  Interval refine(long k) const { return node_->refine(std::max(0L, k)); }

  static CReal from_rat(const Rat& r) { return CReal(r); }
  // Arbitrary refinement function; fn(k) must return width <= 2^-k.
  static CReal from_fn(std::function<Interval(long)> fn);

  CReal operator+(const CReal& o) const;
  CReal operator-() const;
  CReal operator-(const CReal& o) const { return *this + (-o); }
  CReal operator*(const CReal& o) const;
  CReal operator/(const CReal& o) const;  // DivisionNearZero on ~0 divisor
  CReal min(const CReal& o) const;
  CReal max(const CReal& o) const;
  CReal sqrt() const;  // SqrtOfNegative on certainly negative value

 private:
  static std::shared_ptr<Node> make_const(const Rat& r);
  std::shared_ptr<Node> node_;
};

enum class CmpResult { GT, LT_PLUS_EPS };

// Decidable epsilon comparison: GT certifies a > b, LT_PLUS_EPS certifies
// a < b + eps. Total for eps > 0, even with a and b the same value.
CmpResult cmp_eps(const CReal& a, const CReal& b, const Rat& eps);

}  // namespace cdgl
