#pragma once

#include <cstdint>
#include <random>

namespace decoysim {

// Named streams for fanning one run seed out to independent generators.
enum class SeedStream : std::uint64_t {
  kNetworkInit = 1,
  kEnvironment = 2,
  kPolicySampling = 3,
  kMinibatchShuffle = 4,
  kEvaluation = 5,
};

// Counter-based split: the same (seed, stream, index) triple always yields
// the same child seed, independent of how many other streams were drawn.
std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream,
                          std::uint64_t index = 0);

// mt19937_64 plus distribution code we own, so streams are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

  // Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace decoysim
