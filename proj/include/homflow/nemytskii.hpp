#pragma once
// Cell-wise perturbation maps u(x) -> F(x, u(x)) with a declared uniform
// Lipschitz bound in the second argument.

#include <cstdint>
#include <functional>
#include <string>

#include "homflow/grid.hpp"

namespace homflow {

class CaratheodoryMap {
 public:
  // a -> omega * a
  static CaratheodoryMap linear(double omega);
  // a -> omega * tanh(a); bound omega is attained at a = 0
  static CaratheodoryMap saturating(double omega);
  // arbitrary rule; the caller vouches for the bound (see verify_lipschitz)
  static CaratheodoryMap custom(double omega, std::string label,
                                std::function<double(int, double)> rule);

  double omega() const { return omega_; }
  const std::string& label() const { return label_; }
  double eval(int cell, double a) const { return rule_(cell, a); }
  GridFunction apply(const GridFunction& u) const;

 private:
  CaratheodoryMap(double omega, std::string label, std::function<double(int, double)> rule);

  double omega_;
  std::string label_;
  std::function<double(int, double)> rule_;
};

// Sampled check of the declared bound: random cells and argument pairs in
// [-range, range], requiring |F(c,a) - F(c,b)| <= omega |a - b| up to
// rounding. Throws ConfigError with a witness triple on the first breach.
void verify_lipschitz(const CaratheodoryMap& map, const Domain& dom, int probes, uint64_t seed,
                      double range = 2.0);

}  // namespace homflow
