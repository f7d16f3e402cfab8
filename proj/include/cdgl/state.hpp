#pragma once

#include <map>
#include <memory>
#include <string>

#include "cdgl/creal.hpp"

namespace cdgl {

// Total map from variable names (primed names included) to constructive
// reals; unassigned variables read 0. Persistent: set() returns a new
// state, old states stay valid.
class State {
 public:
  State() : vars_(std::make_shared<Map>()) {}

  CReal get(const std::string& x) const {
    auto it = vars_->find(x);
    return it == vars_->end() ? CReal(Rat(0)) : it->second;
  }

  State set(const std::string& x, CReal v) const {
    auto m = std::make_shared<Map>(*vars_);
    (*m)[x] = std::move(v);
    return State(std::move(m));
  }

  const std::map<std::string, CReal>& assigned() const { return *vars_; }

 private:
  using Map = std::map<std::string, CReal>;
  explicit State(std::shared_ptr<Map> m) : vars_(std::move(m)) {}
  std::shared_ptr<const Map> vars_;
};

}  // namespace cdgl
