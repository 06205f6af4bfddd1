#ifndef EVENTBERT_RNG_H_
#define EVENTBERT_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace eventbert {

// mt19937_64 with hand-rolled distributions. The standard library's
// distributions are implementation-defined, which would make seeded outputs
// differ between toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t below(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal(double mean, double stddev);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

uint64_t splitmix64(uint64_t x);

// FNV-1a over bytes; used to derive per-item seeds from string ids.
uint64_t fnv1a64(std::string_view bytes);

// Seed for an independent stream keyed by (base seed, label, index).
uint64_t derive_seed(uint64_t base, std::string_view label, uint64_t index = 0);

}  // namespace eventbert

#endif  // EVENTBERT_RNG_H_
