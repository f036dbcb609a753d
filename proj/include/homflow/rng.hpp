#pragma once
// Deterministic uniform sampling.  std:: distributions are not bit-stable
// across standard libraries, so doubles are derived from raw engine output.

#include <cstdint>
#include <random>

namespace homflow {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }
  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace homflow
