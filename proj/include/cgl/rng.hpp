#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cgl {

// Stateless splitmix64 output function; used to derive stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Folds a list of tokens into the master seed. Adding a token to the list
// yields an unrelated stream, so experiment cells never share or shift each
// other's randomness.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> tokens) {
  std::uint64_t state = mix64(master ^ 0xA0761D6478BD642Full);
  for (std::uint64_t t : tokens) state = mix64(state ^ mix64(t ^ 0xE7037ED1A0B428DBull));
  return state;
}

// Deterministic uniform stream. All sampling in the library goes through
// this; no ambient entropy anywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform double in [0,1) with 53 random bits
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace cgl
