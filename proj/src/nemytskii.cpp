#include "homflow/nemytskii.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include "homflow/rng.hpp"

namespace homflow {

CaratheodoryMap::CaratheodoryMap(double omega, std::string label,
                                 std::function<double(int, double)> rule)
    : omega_(omega), label_(std::move(label)), rule_(std::move(rule)) {
  if (!(omega_ >= 0.0) || !std::isfinite(omega_))
    throw ConfigError("perturbation: omega must be finite and nonnegative");
  if (!rule_) throw ConfigError("perturbation: rule must be callable");
}

CaratheodoryMap CaratheodoryMap::linear(double omega) {
  return CaratheodoryMap(omega, "linear", [omega](int, double a) { return omega * a; });
}

CaratheodoryMap CaratheodoryMap::saturating(double omega) {
  return CaratheodoryMap(omega, "saturating",
                         [omega](int, double a) { return omega * std::tanh(a); });
}

CaratheodoryMap CaratheodoryMap::custom(double omega, std::string label,
                                        std::function<double(int, double)> rule) {
  return CaratheodoryMap(omega, std::move(label), std::move(rule));
}

GridFunction CaratheodoryMap::apply(const GridFunction& u) const {
  GridFunction out = u;
  for (size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = rule_(static_cast<int>(i), u.values[i]);
  require_finite(out.values, "perturbation output");
  return out;
}

void verify_lipschitz(const CaratheodoryMap& map, const Domain& dom, int probes, uint64_t seed,
                      double range) {
  if (probes < 100) throw ConfigError("verify_lipschitz: need at least 100 probes");
  if (!(range > 0.0)) throw ConfigError("verify_lipschitz: range must be positive");
  Rng rng(seed);
  const int n = dom.cell_count();
  for (int k = 0; k < probes; ++k) {
    const int cell = static_cast<int>(rng.raw() % static_cast<uint64_t>(n));
    const double a = rng.uniform(-range, range);
    const double b = rng.uniform(-range, range);
    const double num = std::fabs(map.eval(cell, a) - map.eval(cell, b));
    const double den = map.omega() * std::fabs(a - b);
    if (num > den * (1.0 + 1e-12) + 1e-300) {
      char msg[256];
      std::snprintf(msg, sizeof(msg),
                    "perturbation '%s' breaks its bound: cell=%d a=%.17g b=%.17g "
                    "|F(a)-F(b)|=%.17g > omega|a-b|=%.17g",
                    map.label().c_str(), cell, a, b, num, den);
      throw ConfigError(msg);
    }
  }
}

}  // namespace homflow
