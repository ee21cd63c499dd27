// Copyright 2026 The lecho Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>

namespace lecho::rng {

/// Identifier written into every output's metadata.
inline constexpr std::string_view kAlgorithm = "splitmix64-counter/v1";

/// Human-readable description of how per-job seeds are derived.
inline constexpr std::string_view kSeedRule =
    "job_seed = derive(derive(root_seed, fnv1a64(stream_tag)), job_index); "
    "derive(p, s) = splitmix64(p ^ splitmix64(s + 0x632be59bd9b4e019)); "
    "draw k of a stream = splitmix64(job_seed + (k + 1) * 0x9e3779b97f4a7c15)";

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Child seed for stream `stream` of `parent`. Independent of call order.
constexpr std::uint64_t derive(std::uint64_t parent, std::uint64_t stream) noexcept {
  return splitmix64(parent ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive(std::uint64_t parent, std::string_view tag) noexcept {
  return derive(parent, fnv1a64(tag));
}

/// k-th raw 64-bit draw of the counter stream keyed by `seed`.
constexpr std::uint64_t draw(std::uint64_t seed, std::uint64_t k) noexcept {
  // splitmix64 adds the increment itself, so this is state seed + (k+1)*golden.
  return splitmix64(seed + k * kGolden);
}

/// Uniform double in [0, 1) with 53 random bits.
constexpr double uniform01(std::uint64_t seed, std::uint64_t k) noexcept {
  return static_cast<double>(draw(seed, k) >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by 128-bit multiply-shift.
constexpr std::uint64_t below(std::uint64_t seed, std::uint64_t k, std::uint64_t bound) noexcept {
  __extension__ using u128 = unsigned __int128;
  const u128 wide = static_cast<u128>(draw(seed, k)) * static_cast<u128>(bound);
  return static_cast<std::uint64_t>(wide >> 64);
}

}  // namespace lecho::rng
