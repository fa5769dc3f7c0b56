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

#include "osm/bloom_filter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "osm/hash.hpp"

namespace osm
{
std::uint32_t
optimal_num_hashes(double bits_per_entry) noexcept
{
  return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::lround(std::log(2.0) * bits_per_entry)));
}

BloomFilter::BloomFilter(std::size_t capacity, double bits_per_entry, std::uint64_t seed)
    : num_hashes_{optimal_num_hashes(bits_per_entry)},
      capacity_{capacity},
      bits_per_entry_{bits_per_entry},
      seed_{seed}
{
  if (!(bits_per_entry > 0.0)) throw std::invalid_argument("bloom filter needs a positive bits-per-entry");
  const auto bits = static_cast<std::size_t>(std::ceil(bits_per_entry * static_cast<double>(std::max<std::size_t>(capacity, 1))));
  words_.assign((bits + 63) / 64, 0);
}

void
BloomFilter::insert(Key key) noexcept
{
  if (words_.empty()) return;
  const std::uint64_t m = bit_count();
  const std::uint64_t h1 = fmix64(key ^ seed_);
  const std::uint64_t h2 = fmix64(h1 ^ 0x9e3779b97f4a7c15ULL) | 1;
  std::uint64_t h = h1;
  for (std::uint32_t i = 0; i < num_hashes_; ++i, h += h2) {
    const auto bit = reduce_range(h, m);
    words_[bit >> 6] |= std::uint64_t{1} << (bit & 63);
  }
  ++inserted_;
}

bool
BloomFilter::contains(Key key) const noexcept
{
  if (words_.empty()) return false;
  const std::uint64_t m = bit_count();
  const std::uint64_t h1 = fmix64(key ^ seed_);
  const std::uint64_t h2 = fmix64(h1 ^ 0x9e3779b97f4a7c15ULL) | 1;
  std::uint64_t h = h1;
  for (std::uint32_t i = 0; i < num_hashes_; ++i, h += h2) {
    const auto bit = reduce_range(h, m);
    if ((words_[bit >> 6] & (std::uint64_t{1} << (bit & 63))) == 0) return false;
  }
  return true;
}

void
BloomFilter::clear() noexcept
{
  std::fill(words_.begin(), words_.end(), 0);
  inserted_ = 0;
}

double
BloomFilter::expected_fpr() const noexcept
{
  if (words_.empty()) return 0.0;
  const double m = static_cast<double>(bit_count());
  const double k = num_hashes_;
  return std::pow(1.0 - std::exp(-k * static_cast<double>(inserted_) / m), k);
}

}  // namespace osm
