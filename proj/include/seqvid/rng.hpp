#pragma once

#include <array>
#include <cstdint>

namespace seqvid {

// FNV-1a, used to derive stream tags from consumer names.
constexpr std::uint64_t stream_tag(const char* name) {
  std::uint64_t h = 1469598103934665603ull;
  for (const char* p = name; *p; ++p) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(*p));
    h *= 1099511628211ull;
  }
  return h;
}

// xoshiro256** with explicit 64-bit seeding (state expanded via splitmix64).
// The generator remembers its seed so that child streams can be derived with
// the fixed rule: child_seed = parent_seed XOR consumer_tag. Identical seed
// and call sequence produce an identical value stream on every platform.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53-bit resolution.
  double next_unit();

  // Uniform on [lo, hi).
  double uniform(double lo, double hi);

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n);

  // Independent child stream for a named consumer.
  Rng split(std::uint64_t tag) const { return Rng(seed_ ^ tag); }
  Rng split(const char* name) const { return split(stream_tag(name)); }

  std::uint64_t seed() const { return seed_; }
  const std::array<std::uint64_t, 4>& state() const { return state_; }
  void restore(std::uint64_t seed, const std::array<std::uint64_t, 4>& state) {
    seed_ = seed;
    state_ = state;
  }

  bool operator==(const Rng& o) const {
    return seed_ == o.seed_ && state_ == o.state_;
  }

 private:
  std::uint64_t seed_ = 0;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace seqvid
