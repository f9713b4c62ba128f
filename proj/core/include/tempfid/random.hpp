#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace tempfid {

/// Seeded random source with platform-independent output.
///
/// std::mt19937_64 output is fully specified by the standard, the standard
/// distributions are not, so bounded integers, uniforms and normals are
/// derived here to keep seeded runs byte-reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer on [0, n). n must be positive.
  std::size_t index(std::size_t n);

  /// Standard normal (Marsaglia polar method).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// Mixes a master seed with a stream id (splitmix64 finalizer). Used to give
/// iterations, subjects and variables independent deterministic streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

template <class T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = rng.index(i);
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

/// k distinct indices from [0, n) by partial Fisher-Yates, in draw order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng);

}  // namespace tempfid
