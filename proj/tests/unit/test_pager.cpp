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

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>

#include <unistd.h>

#include "osm/endian.hpp"
#include "osm/pager.hpp"
#include "osm/random.hpp"

namespace osm
{
namespace
{

class TempPath
{
 public:
  explicit TempPath(const std::string &name)
      : path_{std::filesystem::temp_directory_path() / ("osm_test_pager_" + name + "_" + std::to_string(::getpid()))}
  {
    std::filesystem::remove(path_);
  }
  ~TempPath() { std::filesystem::remove(path_); }
  const std::filesystem::path &path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

PageStoreConfig
file_config(const std::filesystem::path &path, std::size_t pool_pages, std::size_t page_size = 4096)
{
  PageStoreConfig c;
  c.backend = Backend::File;
  c.page_size_bytes = page_size;
  c.bufferpool_bytes = pool_pages * page_size;
  c.file_path = path;
  return c;
}

std::vector<std::byte>
sentinel_page(std::size_t page_size, std::uint64_t tag)
{
  std::vector<std::byte> page(page_size);
  for (std::size_t off = 0; off + 8 <= page_size; off += 8) le::store<std::uint64_t>(page.data() + off, tag * 1000003 + off);
  return page;
}

TEST(PageStoreConfig, Validation)
{
  PageStoreConfig c;
  EXPECT_NO_THROW(c.validate());
  c.page_size_bytes = 1000;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.page_size_bytes = 256;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = PageStoreConfig{};
  c.backend = Backend::File;
  c.file_path = "/tmp/x";
  c.bufferpool_bytes = 4096;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.bufferpool_bytes = 8192;
  EXPECT_NO_THROW(c.validate());
  c.file_path.clear();
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

class BothBackends : public ::testing::TestWithParam<Backend>
{
 protected:
  std::unique_ptr<PageStore>
  open(std::size_t pool_pages = 16)
  {
    if (GetParam() == Backend::Memory) return open_page_store(PageStoreConfig{});
    return open_page_store(file_config(tmp_.path(), pool_pages));
  }

  TempPath tmp_{"both"};
};

TEST_P(BothBackends, WriteThenRead)
{
  auto store = open();
  const auto id = store->allocate();
  const auto page = sentinel_page(store->page_size(), 42);
  store->write(id, page);
  std::vector<std::byte> back(store->page_size());
  store->read(id, back);
  EXPECT_EQ(back, page);
}

TEST_P(BothBackends, FreshPagesAreZeroed)
{
  auto store = open();
  const auto id = store->allocate();
  std::vector<std::byte> back(store->page_size(), std::byte{1});
  store->read(id, back);
  EXPECT_TRUE(std::all_of(back.begin(), back.end(), [](std::byte b) { return b == std::byte{0}; }));
}

TEST_P(BothBackends, UnknownAndFreedPagesRejected)
{
  auto store = open();
  std::vector<std::byte> buf(store->page_size());
  EXPECT_THROW(store->read(12345, buf), PagerError);
  const auto id = store->allocate();
  store->free(id);
  EXPECT_THROW(store->read(id, buf), PagerError);
  EXPECT_THROW(store->free(id), PagerError);
  EXPECT_EQ(store->live_pages(), 0u);
}

TEST_P(BothBackends, IdsAreNeverReused)
{
  auto store = open();
  const auto a = store->allocate();
  store->free(a);
  const auto b = store->allocate();
  EXPECT_NE(a, b);
}

TEST_P(BothBackends, PartialPageWritesRejected)
{
  auto store = open();
  const auto id = store->allocate();
  std::vector<std::byte> small(100);
  EXPECT_THROW(store->write(id, small), PagerError);
  EXPECT_THROW(store->read(id, small), PagerError);
}

TEST_P(BothBackends, ThousandPagesRoundTrip)
{
  auto store = open(8);
  std::vector<PageId> ids;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    ids.push_back(store->allocate());
    store->write(ids.back(), sentinel_page(store->page_size(), i));
  }
  std::vector<std::byte> back(store->page_size());
  for (std::uint64_t i = 0; i < 1000; ++i) {
    store->read(ids[i], back);
    ASSERT_EQ(back, sentinel_page(store->page_size(), i)) << i;
  }
  EXPECT_LE(store->stats().physical_reads, store->stats().logical_reads);
}

TEST_P(BothBackends, GuardWritesInPlace)
{
  auto store = open();
  const auto id = store->allocate();
  {
    PageGuard g{*store, id, true};
    ASSERT_TRUE(g);
    le::store<std::uint64_t>(g.data(), 0xdeadbeef);
    PageGuard moved = std::move(g);
    EXPECT_FALSE(g);
    EXPECT_EQ(moved.id(), id);
  }
  PageGuard r{*store, id, false};
  EXPECT_EQ(le::load<std::uint64_t>(r.data()), 0xdeadbeefu);
}

INSTANTIATE_TEST_SUITE_P(Pager, BothBackends, ::testing::Values(Backend::Memory, Backend::File),
                         [](const auto &info) { return info.param == Backend::Memory ? "Memory" : "File"; });

TEST(FilePageStore, LruEvictionForcesPhysicalRead)
{
  TempPath tmp{"lru"};
  auto store = open_page_store(file_config(tmp.path(), 2));
  const auto p1 = store->allocate();
  const auto p2 = store->allocate();
  const auto p3 = store->allocate();
  std::vector<std::byte> buf(store->page_size());
  store->write(p1, sentinel_page(4096, 1));
  store->write(p2, sentinel_page(4096, 2));
  store->write(p3, sentinel_page(4096, 3));
  const auto before = store->stats().physical_reads;
  store->read(p1, buf);
  EXPECT_EQ(store->stats().physical_reads, before + 1);
  EXPECT_EQ(buf, sentinel_page(4096, 1));
  EXPECT_GT(store->stats().evictions, 0u);
}

TEST(FilePageStore, RecentlyUsedPageSurvives)
{
  TempPath tmp{"recent"};
  auto store = open_page_store(file_config(tmp.path(), 2));
  const auto p1 = store->allocate();
  const auto p2 = store->allocate();
  std::vector<std::byte> buf(store->page_size());
  store->read(p1, buf);
  store->allocate();  // evicts p2, the least recently used
  const auto before = store->stats().physical_reads;
  store->read(p1, buf);
  EXPECT_EQ(store->stats().physical_reads, before);
  store->read(p2, buf);
  EXPECT_EQ(store->stats().physical_reads, before + 1);
}

TEST(FilePageStore, WarmPoolHasNoPhysicalReads)
{
  TempPath tmp{"warm"};
  auto store = open_page_store(file_config(tmp.path(), 64));
  std::vector<PageId> ids;
  for (int i = 0; i < 32; ++i) ids.push_back(store->allocate());
  store->reset_stats();
  std::vector<std::byte> buf(store->page_size());
  for (int rep = 0; rep < 5; ++rep) {
    for (auto id : ids) store->read(id, buf);
  }
  EXPECT_EQ(store->stats().physical_reads, 0u);
  EXPECT_EQ(store->stats().logical_reads, 160u);
}

TEST(FilePageStore, AllPinnedExhaustsPool)
{
  TempPath tmp{"pinned"};
  auto store = open_page_store(file_config(tmp.path(), 2));
  const auto a = store->allocate();
  const auto b = store->allocate();
  PageGuard ga{*store, a, false};
  PageGuard gb{*store, b, false};
  EXPECT_THROW(store->allocate(), PagerError);
}

TEST(FilePageStore, ReadYourWritesUnderRandomEviction)
{
  TempPath tmp{"random"};
  auto store = open_page_store(file_config(tmp.path(), 3, 512));
  Rng rng{77};
  std::map<PageId, std::uint64_t> tags;
  std::vector<PageId> ids;
  for (int i = 0; i < 40; ++i) ids.push_back(store->allocate());
  std::vector<std::byte> buf(store->page_size());
  for (int op = 0; op < 3000; ++op) {
    const auto id = ids[rng.below(ids.size())];
    if (rng.below(2) == 0) {
      const auto tag = rng.next();
      store->write(id, sentinel_page(512, tag));
      tags[id] = tag;
    } else {
      store->read(id, buf);
      if (auto it = tags.find(id); it != tags.end()) {
        ASSERT_EQ(buf, sentinel_page(512, it->second));
      } else {
        ASSERT_TRUE(std::all_of(buf.begin(), buf.end(), [](std::byte b) { return b == std::byte{0}; }));
      }
    }
  }
}

TEST(FilePageStore, ReopenRoundTrip)
{
  TempPath tmp{"reopen"};
  std::vector<PageId> ids;
  {
    auto store = open_page_store(file_config(tmp.path(), 4));
    for (std::uint64_t i = 0; i < 50; ++i) {
      ids.push_back(store->allocate());
      store->write(ids.back(), sentinel_page(4096, i));
    }
    store->set_root(ids[7]);
  }
  auto config = file_config(tmp.path(), 4);
  config.truncate = false;
  auto store = open_page_store(config);
  EXPECT_EQ(store->root(), ids[7]);
  std::vector<std::byte> buf(store->page_size());
  for (std::uint64_t i = 0; i < 50; ++i) {
    store->read(ids[i], buf);
    ASSERT_EQ(buf, sentinel_page(4096, i));
  }
  EXPECT_EQ(std::filesystem::file_size(tmp.path()), 51u * 4096u);
}

TEST(FilePageStore, SuperblockLayout)
{
  TempPath tmp{"super"};
  {
    auto store = open_page_store(file_config(tmp.path(), 4));
    store->allocate();
    store->set_root(1);
  }
  std::ifstream in(tmp.path(), std::ios::binary);
  std::array<char, 32> head{};
  in.read(head.data(), head.size());
  EXPECT_EQ(std::string(head.data(), 8), "OSMPAG01");
  EXPECT_EQ(le::load<std::uint32_t>(reinterpret_cast<std::byte *>(head.data() + 8)), 4096u);
  EXPECT_EQ(le::load<std::uint64_t>(reinterpret_cast<std::byte *>(head.data() + 16)), 2u);
  EXPECT_EQ(le::load<std::uint64_t>(reinterpret_cast<std::byte *>(head.data() + 24)), 1u);
}

TEST(FilePageStore, ReopenRejectsBadMagicAndPageSize)
{
  TempPath tmp{"badmagic"};
  {
    auto store = open_page_store(file_config(tmp.path(), 4));
    store->allocate();
  }
  auto config = file_config(tmp.path(), 4, 8192);
  config.truncate = false;
  EXPECT_THROW(open_page_store(config), PagerError);
  {
    std::fstream f(tmp.path(), std::ios::in | std::ios::out | std::ios::binary);
    f.put('Z');
  }
  config = file_config(tmp.path(), 4);
  config.truncate = false;
  EXPECT_THROW(open_page_store(config), PagerError);
}

}  // namespace
}  // namespace osm
