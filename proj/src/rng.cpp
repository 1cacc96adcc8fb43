#include "chainbalance/rng.hpp"

namespace chainbalance {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t derive_seed(std::uint64_t master, const std::vector<std::uint64_t>& path) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t p : path) {
    h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  }
  return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path)
    : master_seed_(master_seed),
      path_(std::move(path)),
      engine_(derive_seed(master_seed_, path_)) {}

RngStream RngStream::derive(std::initializer_list<std::uint64_t> components) const {
  std::vector<std::uint64_t> child = path_;
  child.insert(child.end(), components.begin(), components.end());
  return RngStream(master_seed_, std::move(child));
}

std::size_t RngStream::uniform_index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

double RngStream::uniform01() {
  // 53 random mantissa bits; avoids implementation-specific generate_canonical.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

}  // namespace chainbalance
