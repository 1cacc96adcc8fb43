#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace chainbalance {

// A reproducible random stream identified by (master seed, path). Two streams
// with the same identity yield the same sequence no matter which thread or in
// which order they are consumed, which is what makes parallel training
// bit-identical to the sequential build.
class RngStream {
 public:
  using Engine = std::mt19937_64;

  explicit RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path = {});

  // Child stream whose path is this path plus the given components.
  RngStream derive(std::initializer_list<std::uint64_t> components) const;

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  const std::vector<std::uint64_t>& path() const noexcept { return path_; }

  // Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);
  double uniform01();

  Engine& engine() noexcept { return engine_; }

 private:
  std::uint64_t master_seed_;
  std::vector<std::uint64_t> path_;
  Engine engine_;
};

// SplitMix64 finalizer; used to fold path components into a seed.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Stream tags, the first path component of every top-level substream.
namespace stream_tag {
inline constexpr std::uint64_t kChain = 1;
inline constexpr std::uint64_t kRound = 2;
inline constexpr std::uint64_t kFolds = 3;
inline constexpr std::uint64_t kSimulation = 4;
inline constexpr std::uint64_t kTree = 5;
}  // namespace stream_tag

}  // namespace chainbalance
