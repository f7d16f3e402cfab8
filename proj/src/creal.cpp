#include "cdgl/creal.hpp"

namespace cdgl {

namespace {

using NodePtr = std::shared_ptr<CReal::Node>;

struct ConstNode final : CReal::Node {
  Rat value;
  explicit ConstNode(Rat v) : value(std::move(v)) {}
  Interval compute(long) override { return Interval::point(value); }
};

struct FnNode final : CReal::Node {
  std::function<Interval(long)> fn;
  explicit FnNode(std::function<Interval(long)> f) : fn(std::move(f)) {}
  Interval compute(long k) override { return fn(k); }
};

struct AddNode final : CReal::Node {
  NodePtr a, b;
  AddNode(NodePtr x, NodePtr y) : a(std::move(x)), b(std::move(y)) {}
  Interval compute(long k) override {
    Interval iv = (a->refine(k + 2) + b->refine(k + 2)).round_out(k + 4);
    return iv;
  }
};

struct NegNode final : CReal::Node {
  NodePtr a;
  explicit NegNode(NodePtr x) : a(std::move(x)) {}
  Interval compute(long k) override { return -a->refine(k); }
};

struct MulNode final : CReal::Node {
  NodePtr a, b;
  MulNode(NodePtr x, NodePtr y) : a(std::move(x)), b(std::move(y)) {}
  Interval compute(long k) override {
    for (long p = k + 3;; p += 16) {
      Interval iv = (a->refine(p) * b->refine(p)).round_out(k + 4);
      if (iv.width() <= pow2(-k)) return iv;
    }
  }
};

struct DivNode final : CReal::Node {
  NodePtr a, b;
  long effort_bits;
  DivNode(NodePtr x, NodePtr y, long effort)
      : a(std::move(x)), b(std::move(y)), effort_bits(effort) {}
  Interval compute(long k) override {
    // Refine the divisor away from zero first, up to the effort bound.
    long p = k + 3;
    Interval bi = b->refine(p);
    while (sgn(bi.lo) <= 0 && sgn(bi.hi) >= 0) {
      if (p > k + effort_bits)
        throw DivisionNearZero("divisor straddles zero at effort bound");
      p += 16;
      bi = b->refine(p);
    }
    for (;; p += 16) {
      Interval iv = (a->refine(p) / b->refine(p)).round_out(k + 4);
      if (iv.width() <= pow2(-k)) return iv;
    }
  }
};

struct MinNode final : CReal::Node {
  NodePtr a, b;
  bool is_min;
  MinNode(NodePtr x, NodePtr y, bool mn) : a(std::move(x)), b(std::move(y)), is_min(mn) {}
  Interval compute(long k) override {
    Interval x = a->refine(k + 1), y = b->refine(k + 1);
    return is_min ? imin(x, y) : imax(x, y);
  }
};

struct SqrtNode final : CReal::Node {
  NodePtr a;
  explicit SqrtNode(NodePtr x) : a(std::move(x)) {}
  Interval compute(long k) override {
    for (long p = 2 * k + 4;; p += 16) {
      Interval iv = isqrt(a->refine(p), k + 2).round_out(k + 4);
      if (iv.width() <= pow2(-k)) return iv;
    }
  }
};

constexpr long kDivEffortBits = 4096;

}  // namespace

std::shared_ptr<CReal::Node> CReal::make_const(const Rat& r) {
  return std::make_shared<ConstNode>(r);
}

CReal CReal::from_fn(std::function<Interval(long)> fn) {
  return CReal(std::make_shared<FnNode>(std::move(fn)));
}

CReal CReal::operator+(const CReal& o) const {
  return CReal(std::make_shared<AddNode>(node_, o.node_));
}
CReal CReal::operator-() const { return CReal(std::make_shared<NegNode>(node_)); }
CReal CReal::operator*(const CReal& o) const {
  return CReal(std::make_shared<MulNode>(node_, o.node_));
}
CReal CReal::operator/(const CReal& o) const {
  return CReal(std::make_shared<DivNode>(node_, o.node_, kDivEffortBits));
}
CReal CReal::min(const CReal& o) const {
  return CReal(std::make_shared<MinNode>(node_, o.node_, true));
}
CReal CReal::max(const CReal& o) const {
  return CReal(std::make_shared<MinNode>(node_, o.node_, false));
}
CReal CReal::sqrt() const { return CReal(std::make_shared<SqrtNode>(node_)); }

CmpResult cmp_eps(const CReal& a, const CReal& b, const Rat& eps) {
  if (sgn(eps) <= 0) throw std::invalid_argument("cmp_eps: eps must be positive");
  CReal d = a - b;
  // Final precision: width <= eps/2048, so LT_PLUS_EPS implies a < b + eps
  // with lots of slack and GT is preferred whenever positivity is certified.
  long kfinal = 12;
  while (pow2(-kfinal) > eps / 2048) ++kfinal;
  for (long k = 2; k < kfinal; k += 6) {
    if (sgn(d.refine(k).lo) > 0) return CmpResult::GT;
  }
  Interval iv = d.refine(kfinal);
  if (sgn(iv.lo) > 0) return CmpResult::GT;
  return CmpResult::LT_PLUS_EPS;
}

}  // namespace cdgl
