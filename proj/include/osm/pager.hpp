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

#ifndef OSM_PAGER_HPP
#define OSM_PAGER_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>

namespace osm
{

using PageId = std::uint64_t;
inline constexpr PageId kInvalidPage = UINT64_MAX;

class PagerError : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

enum class Backend { Memory, File };

struct PageStoreConfig {
  std::size_t page_size_bytes{4096};
  Backend backend{Backend::Memory};
  /// File backend only; must hold at least two pages.
  std::size_t bufferpool_bytes{std::size_t{64} << 20};
  std::filesystem::path file_path;
  /// File backend: start a fresh store instead of reopening an existing file.
  bool truncate{true};

  void validate() const;
};

struct PagerStats {
  std::uint64_t logical_reads{0};
  std::uint64_t physical_reads{0};
  std::uint64_t physical_writes{0};
  std::uint64_t evictions{0};
  std::uint64_t allocations{0};
  std::uint64_t frees{0};
};

/**
 * Fixed-size page storage.
 *
 * Pages are accessed in place through fix()/unfix() (see PageGuard); read()
 * and write() are copying conveniences built on the same path. Page ids are
 * never reused within one store lifetime. A store is single-threaded.
 */
class PageStore
{
 public:
  virtual ~PageStore() = default;

  virtual PageId allocate() = 0;
  virtual void free(PageId id) = 0;

  /// Pin a page and return its bytes. `dirty` marks it for write-back.
  virtual std::byte *fix(PageId id, bool dirty) = 0;
  virtual void unfix(PageId id) noexcept = 0;
  /// Mark an already pinned page for write-back.
  virtual void mark_dirty(PageId) {}

  /// Write back dirty pages and the superblock (file backend).
  virtual void flush() {}

  virtual std::uint64_t live_pages() const noexcept = 0;

  void read(PageId id, std::span<std::byte> out);
  void write(PageId id, std::span<const std::byte> bytes);

  PageId root() const noexcept { return root_; }
  void set_root(PageId id) noexcept { root_ = id; }

  std::size_t page_size() const noexcept { return page_size_; }
  const PagerStats &stats() const noexcept { return stats_; }
  void reset_stats() noexcept { stats_ = PagerStats{}; }

 protected:
  explicit PageStore(std::size_t page_size) : page_size_{page_size} {}

  std::size_t page_size_;
  PageId root_{kInvalidPage};
  PagerStats stats_;
};

std::unique_ptr<PageStore> open_page_store(const PageStoreConfig &config);

/// RAII pin on one page.
class PageGuard
{
 public:
  PageGuard() = default;
  PageGuard(PageStore &store, PageId id, bool dirty) : store_{&store}, id_{id}, data_{store.fix(id, dirty)} {}
  PageGuard(const PageGuard &) = delete;
  PageGuard &operator=(const PageGuard &) = delete;
  PageGuard(PageGuard &&other) noexcept { swap(other); }
  PageGuard &
  operator=(PageGuard &&other) noexcept
  {
    if (this != &other) {
      release();
      swap(other);
    }
    return *this;
  }
  ~PageGuard() { release(); }

  void
  release() noexcept
  {
    if (store_ != nullptr) store_->unfix(id_);
    store_ = nullptr;
    data_ = nullptr;
    id_ = kInvalidPage;
  }

  void
  mark_dirty()
  {
    if (store_ != nullptr) store_->mark_dirty(id_);
  }

  PageId id() const noexcept { return id_; }
  std::byte *data() const noexcept { return data_; }
  explicit operator bool() const noexcept { return data_ != nullptr; }

 private:
  void
  swap(PageGuard &other) noexcept
  {
    std::swap(store_, other.store_);
    std::swap(id_, other.id_);
    std::swap(data_, other.data_);
  }

  PageStore *store_{nullptr};
  PageId id_{kInvalidPage};
  std::byte *data_{nullptr};
};

}  // namespace osm

#endif  // OSM_PAGER_HPP
