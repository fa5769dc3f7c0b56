/*
 * Copyright 2026 The OSM-Tree Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef OSM_HASH_HPP
#define OSM_HASH_HPP

#include <cstddef>
#include <cstdint>

namespace osm
{

__extension__ using uint128 = unsigned __int128;

/// floor(a * b / c) without intermediate overflow. Requires c > 0.
constexpr std::uint64_t
mul_div(std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept
{
  return static_cast<std::uint64_t>(static_cast<uint128>(a) * b / c);
}

/// Maps a uniform 64-bit hash onto [0, m) by multiply-high.
constexpr std::uint64_t
reduce_range(std::uint64_t h, std::uint64_t m) noexcept
{
  return static_cast<std::uint64_t>((static_cast<uint128>(h) * m) >> 64);
}

/// MurmurHash3 64-bit finalizer.
constexpr std::uint64_t
fmix64(std::uint64_t k) noexcept
{
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

/// FNV-1a over a byte string; used for schema fingerprints.
constexpr std::uint64_t
fnv1a64(const char *data, std::size_t len) noexcept
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace osm

#endif  // OSM_HASH_HPP
