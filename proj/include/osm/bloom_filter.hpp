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

#ifndef OSM_BLOOM_FILTER_HPP
#define OSM_BLOOM_FILTER_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "osm/entry.hpp"

namespace osm
{

/**
 * Classic Bloom filter over 64-bit keys.
 *
 * Probe positions use double hashing, h1 + i * h2 mod m, with both base
 * hashes derived from the MurmurHash3 finalizer. The bit array holds
 * bits_per_entry * capacity bits rounded up to a whole 64-bit word.
 */
class BloomFilter
{
 public:
  static constexpr double kDefaultBitsPerEntry = 10.0;

  BloomFilter() = default;
  BloomFilter(std::size_t capacity, double bits_per_entry = kDefaultBitsPerEntry, std::uint64_t seed = 0);

  void insert(Key key) noexcept;
  bool contains(Key key) const noexcept;
  void clear() noexcept;

  std::size_t bit_count() const noexcept { return words_.size() * 64; }
  std::uint32_t num_hashes() const noexcept { return num_hashes_; }
  std::size_t inserted_count() const noexcept { return inserted_; }
  std::size_t capacity() const noexcept { return capacity_; }
  double bits_per_entry() const noexcept { return bits_per_entry_; }
  const std::vector<std::uint64_t> &words() const noexcept { return words_; }

  /// (1 - e^{-k n / m})^k for the current fill.
  double expected_fpr() const noexcept;

 private:
  std::vector<std::uint64_t> words_;
  std::uint32_t num_hashes_{0};
  std::size_t inserted_{0};
  std::size_t capacity_{0};
  double bits_per_entry_{kDefaultBitsPerEntry};
  std::uint64_t seed_{0};
};

/// round(ln 2 * bits_per_entry), at least 1.
std::uint32_t optimal_num_hashes(double bits_per_entry) noexcept;

}  // namespace osm

#endif  // OSM_BLOOM_FILTER_HPP
