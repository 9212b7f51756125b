#pragma once

#include "mareg/model_core.hpp"

#include <cstdint>
#include <random>

namespace mareg {

/// Purpose tags that separate the substreams drawn from one master seed.
enum class StreamTag : std::uint64_t {
  basis = 0x6761'6d6d'6100ULL,
  design = 0x6465'7369'676eULL,
  errors = 0x6572'726f'7273ULL,
  replication = 0x7265'706cULL,
  scenario = 0x7363'656eULL,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of substream (tag, index) under `master`. Depends only on its three arguments,
/// so substreams can be created in any order and on any thread.
constexpr std::uint64_t derive_seed(std::uint64_t master, StreamTag tag, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(tag))) + index);
}

/// Seeded normal generator for one substream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master, StreamTag tag, std::uint64_t index)
      : engine_(derive_seed(master, tag, index)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  /// rows x cols matrix of i.i.d. N(0, 1) draws, filled row by row.
  Matrix normal_matrix(Index rows, Index cols);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace mareg
