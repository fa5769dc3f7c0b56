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

#include "osm/random.hpp"
#include "osm/zonemap.hpp"

namespace osm
{
namespace
{

Zonemap
make(std::initializer_list<Key> keys)
{
  Zonemap zm;
  for (auto k : keys) zm.update(k);
  return zm;
}

TEST(Zonemap, UpdateExtendsBounds)
{
  auto zm = make({7});
  EXPECT_EQ(zm.min(), 7u);
  EXPECT_EQ(zm.max(), 7u);
  zm = make({3, 9});
  zm.update(5);
  EXPECT_EQ(zm.min(), 3u);
  EXPECT_EQ(zm.max(), 9u);
  zm.update(12);
  EXPECT_EQ(zm.max(), 12u);
  EXPECT_EQ(zm.count(), 4u);
}

TEST(Zonemap, Overlaps)
{
  const auto zm = make({3, 9});
  EXPECT_TRUE(zm.overlaps(5));
  EXPECT_TRUE(zm.overlaps(3));
  EXPECT_TRUE(zm.overlaps(9));
  EXPECT_FALSE(zm.overlaps(10));
  EXPECT_FALSE(zm.overlaps(2));
  EXPECT_FALSE(Zonemap{}.overlaps(0));
  EXPECT_TRUE(Zonemap{}.empty());
}

TEST(Zonemap, OverlapsRange)
{
  const auto zm = make({10, 20});
  EXPECT_TRUE(zm.overlaps_range(0, 10));
  EXPECT_TRUE(zm.overlaps_range(20, 30));
  EXPECT_TRUE(zm.overlaps_range(12, 13));
  EXPECT_TRUE(zm.overlaps_range(0, 100));
  EXPECT_FALSE(zm.overlaps_range(0, 9));
  EXPECT_FALSE(zm.overlaps_range(21, 30));
  EXPECT_FALSE(zm.overlaps_range(15, 12));
  EXPECT_FALSE(Zonemap{}.overlaps_range(0, UINT64_MAX));
}

TEST(Zonemap, Reset)
{
  auto zm = make({1, 2});
  zm.reset();
  EXPECT_TRUE(zm.empty());
  EXPECT_EQ(zm, Zonemap{});
}

TEST(ZonemapProperty, NoFalseNegativesAndRebuildIsIdentical)
{
  Rng rng{3};
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<Entry> entries;
    const auto n = 1 + rng.below(100);
    for (std::uint64_t i = 0; i < n; ++i) entries.push_back({rng.below(1000), 0, i});
    Zonemap zm;
    for (const auto &e : entries) zm.update(e.key);
    for (const auto &e : entries) ASSERT_TRUE(zm.overlaps(e.key));
    ASSERT_EQ(Zonemap::of(entries), zm);
    ASSERT_LE(zm.min(), zm.max());
  }
}

}  // namespace
}  // namespace osm
