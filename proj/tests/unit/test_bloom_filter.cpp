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

#include <gtest/gtest.h>

#include <cmath>
#include <unordered_set>

#include "osm/bloom_filter.hpp"
#include "osm/random.hpp"

namespace osm
{
namespace
{

TEST(BloomFilter, SizingAndHashCount)
{
  const BloomFilter bf{1000};
  EXPECT_EQ(bf.bit_count(), 10048u);
  EXPECT_EQ(bf.bit_count() % 64, 0u);
  EXPECT_EQ(bf.num_hashes(), 7u);
  EXPECT_EQ(bf.capacity(), 1000u);
  EXPECT_EQ(optimal_num_hashes(10.0), 7u);
  EXPECT_EQ(optimal_num_hashes(0.5), 1u);
  EXPECT_EQ(optimal_num_hashes(16.0), 11u);
  EXPECT_THROW(BloomFilter(10, 0.0), std::invalid_argument);
}

TEST(BloomFilter, FreshFilterIsEmpty)
{
  const BloomFilter bf{100};
  EXPECT_FALSE(bf.contains(5));
  EXPECT_EQ(bf.inserted_count(), 0u);
  const BloomFilter unsized;
  EXPECT_FALSE(unsized.contains(5));
}

TEST(BloomFilter, InsertedKeyIsFound)
{
  BloomFilter bf{100};
  bf.insert(5);
  EXPECT_TRUE(bf.contains(5));
  EXPECT_EQ(bf.inserted_count(), 1u);
}

TEST(BloomFilter, ClearResets)
{
  BloomFilter bf{100};
  for (Key k = 0; k < 100; ++k) bf.insert(k);
  bf.clear();
  EXPECT_EQ(bf.inserted_count(), 0u);
  for (auto w : bf.words()) EXPECT_EQ(w, 0u);
  EXPECT_FALSE(bf.contains(3));
}

TEST(BloomFilter, NoFalseNegatives)
{
  Rng rng{1};
  BloomFilter bf{50000, 10.0, 7};
  std::vector<Key> keys;
  for (int i = 0; i < 50000; ++i) keys.push_back(rng.next());
  for (auto k : keys) bf.insert(k);
  for (auto k : keys) ASSERT_TRUE(bf.contains(k));
}

TEST(BloomFilter, DeterministicPerSeed)
{
  BloomFilter a{1000, 10.0, 3}, b{1000, 10.0, 3}, c{1000, 10.0, 4};
  for (Key k = 0; k < 1000; ++k) {
    a.insert(k * 7);
    b.insert(k * 7);
    c.insert(k * 7);
  }
  EXPECT_EQ(a.words(), b.words());
  EXPECT_NE(a.words(), c.words());
}

// Monte-Carlo false positive rate at design capacity against (1 - e^{-kn/m})^k.
TEST(BloomFilter, FalsePositiveRateAtCapacity)
{
  const std::size_t n = 100000;
  BloomFilter bf{n};
  for (Key k = 0; k < n; ++k) bf.insert(k);
  const double theory = std::pow(1.0 - std::exp(-7.0 * n / static_cast<double>(bf.bit_count())), 7.0);
  EXPECT_NEAR(bf.expected_fpr(), theory, 1e-12);
  EXPECT_NEAR(theory, 0.0082, 0.0005);

  std::size_t positives = 0;
  const std::size_t probes = 100000;
  for (Key k = 0; k < probes; ++k) positives += bf.contains(n + 1'000'000 + k) ? 1 : 0;
  const double fpr = static_cast<double>(positives) / probes;
  EXPECT_LE(fpr, 0.02);
  EXPECT_NEAR(fpr, theory, 0.003);
}

TEST(BloomFilter, SequentialAndRandomKeysBehaveAlike)
{
  Rng rng{9};
  const std::size_t n = 20000;
  BloomFilter bf{n, 10.0, 11};
  std::unordered_set<Key> in;
  while (in.size() < n) in.insert(rng.next());
  for (auto k : in) bf.insert(k);
  std::size_t positives = 0, probes = 0;
  while (probes < 100000) {
    const auto k = rng.next();
    if (in.count(k) != 0) continue;
    ++probes;
    positives += bf.contains(k) ? 1 : 0;
  }
  EXPECT_LE(static_cast<double>(positives) / probes, 0.02);
}

}  // namespace
}  // namespace osm
