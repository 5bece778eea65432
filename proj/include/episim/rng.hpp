#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace episim {

// Counter-based random streams. Every consumer derives its own stream from
// (run seed, purpose, key...), so draws never depend on scheduling or on how
// locations are partitioned across workers.

enum class RngPurpose : std::uint64_t {
  init_exposed = 0x01,
  contacts = 0x02,
  transmission = 0x03,
  infector_merge = 0x04,
  progression = 0x05,
  behavior = 0x06,
  membership = 0x07,
  population = 0x08,
  generic = 0x09,
};

// splitmix64 finalizer; full-period mixer over 64-bit keys.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a, used to fold identifiers (model names) into stream keys.
constexpr std::uint64_t key_from_string(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Signed step indices (initialization uses -1) map onto the key space as-is.
constexpr std::uint64_t step_key(std::int64_t step) noexcept {
  return static_cast<std::uint64_t>(step);
}

class RngStream {
 public:
  RngStream(std::uint64_t seed, RngPurpose purpose, std::uint64_t k1 = 0,
            std::uint64_t k2 = 0, std::uint64_t k3 = 0) noexcept {
    std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
    h = mix64(h ^ static_cast<std::uint64_t>(purpose));
    h = mix64(h ^ k1);
    h = mix64(h ^ k2);
    h = mix64(h ^ k3);
    state_ = h;
  }

  std::uint64_t next_u64() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // [0, 1)
  double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // (0, 1]; safe as a log() argument.
  double uniform01_open() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  std::uint64_t below(std::uint64_t n) noexcept { return next_u64() % n; }

  // UniformRandomBitGenerator, so std <random> distributions can ride on top.
  using result_type = std::uint64_t;
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept { return next_u64(); }

 private:
  std::uint64_t state_;
};

}  // namespace episim
