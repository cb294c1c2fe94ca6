#pragma once

#include <cstdint>

namespace ergolab {

// splitmix64 finalizer; the basis for all randomness in the project.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based stream: the value at step k is a pure function of
// (seed, stream, k), so samples can be drawn concurrently from disjoint
// streams without any shared state and results never depend on scheduling.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix64(mix64(seed) ^ (0x9e3779b97f4a7c15ULL * (stream + 1)))) {}

  std::uint64_t next_u64() noexcept { return mix64(key_ ^ (0xd1b54a32d192ed03ULL * ++counter_)); }

  // uniform in [0,1) with 53 random bits
  double next_unit() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n); multiply-shift (bias < n / 2^64, negligible here)
  std::uint64_t next_below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Fixed salts so each estimator owns a disjoint family of streams.
namespace stream_salt {
constexpr std::uint64_t forward_srb = 0x01;
constexpr std::uint64_t inverse_srb = 0x02;
constexpr std::uint64_t folding = 0x03;
constexpr std::uint64_t production = 0x04;
constexpr std::uint64_t sampler = 0x05;
constexpr std::uint64_t lyapunov = 0x06;
constexpr std::uint64_t diagnostics = 0x07;
constexpr std::uint64_t point_keyed = 0x08;
}  // namespace stream_salt

inline std::uint64_t substream(std::uint64_t salt, std::uint64_t index) noexcept {
  return mix64(salt) ^ index;
}

}  // namespace ergolab
