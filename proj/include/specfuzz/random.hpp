#pragma once

#include <cstdint>
#include <vector>

namespace specfuzz::rng {

// splitmix64; used both as a seed-splitting rule and as the generator
// behind every stochastic stage so results do not depend on the standard
// library's distribution implementations.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stage seeds are derived from the master seed as splitmix64 applied to
// master ^ (stage_index * golden); documented in the run manifest.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stage_index) {
  std::uint64_t s = master ^ (0xd1342543de82ef95ULL * (stage_index + 1));
  return splitmix64(s);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, n). Modulo bias is irrelevant at these ranges.
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  std::int64_t int_in(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  bool coin() { return (next_u64() & 1) != 0; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

 private:
  std::uint64_t state_;
};

}  // namespace specfuzz::rng
