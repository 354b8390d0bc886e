#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace sarplan {

// Seeded RNG whose draws are stable across platforms and library versions:
// every value is derived from raw mt19937_64 output with explicit arithmetic,
// never through std:: distribution objects.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive. Modulo bias is negligible for the
  // small ranges used here.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 gen_;
};

// Fixed-point decimal formatting for CSV output. Deterministic, locale-free.
std::string fmt_double(double v, int digits);

}  // namespace sarplan
