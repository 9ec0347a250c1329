#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <string>
#include <vector>

namespace egs {

// xoshiro256++ seeded through splitmix64. Chosen over std::mt19937 because the
// whole state path is plain integer arithmetic, so streams are identical on
// every platform and standard library. The generator choice is frozen; tests
// are baselined against it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1).
  double next_double();

  // Uniform in (0, 1); safe to feed to log().
  double next_open_double();

  // Uniform in [lo, hi).
  double uniform(double lo, double hi);

  // Uniform integer in [0, n); n >= 1.
  std::uint64_t next_below(std::uint64_t n);

  // Standard Gumbel(0,1) draw: -log(-log(u)).
  double gumbel();

  // Fisher-Yates shuffle, deterministic given the stream position.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i + 1));
      std::swap(v[i], v[j]);
    }
  }

  // Derives an independent stream for a named purpose; `salt` values must be
  // distinct per call site so streams never collide.
  Rng fork(std::uint64_t salt) const;

 private:
  std::array<std::uint64_t, 4> state_{};
  std::uint64_t seed_{};
};

std::uint64_t splitmix64(std::uint64_t& state);

// FNV-1a over a byte string; used for config hashing and stream salts.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(const std::string& s);

}  // namespace egs
