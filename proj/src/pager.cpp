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

#include "osm/pager.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <array>
#include <bit>
#include <cerrno>
#include <cstring>
#include <list>
#include <unordered_map>
#include <vector>

#include "osm/endian.hpp"

namespace osm
{
namespace
{

constexpr std::array<char, 8> kSuperMagic = {'O', 'S', 'M', 'P', 'A', 'G', '0', '1'};

// Superblock layout (page 0): magic[8] | page_size u32 | pad u32 | page_count u64 | root u64
constexpr std::size_t kOffPageSize = 8;
constexpr std::size_t kOffPageCount = 16;
constexpr std::size_t kOffRoot = 24;

class MemoryPageStore final : public PageStore
{
 public:
  explicit MemoryPageStore(std::size_t page_size) : PageStore{page_size} {}

  PageId
  allocate() override
  {
    pages_.push_back(std::make_unique<std::byte[]>(page_size_));
    ++live_;
    ++stats_.allocations;
    return pages_.size() - 1;
  }

  void
  free(PageId id) override
  {
    check(id);
    pages_[id].reset();
    --live_;
    ++stats_.frees;
  }

  std::byte *
  fix(PageId id, bool) override
  {
    check(id);
    ++stats_.logical_reads;
    return pages_[id].get();
  }

  void unfix(PageId) noexcept override {}

  std::uint64_t live_pages() const noexcept override { return live_; }

 private:
  void
  check(PageId id) const
  {
    if (id >= pages_.size() || !pages_[id]) throw PagerError("unknown page id " + std::to_string(id));
  }

  std::vector<std::unique_ptr<std::byte[]>> pages_;
  std::uint64_t live_{0};
};

class FilePageStore final : public PageStore
{
 public:
  explicit FilePageStore(const PageStoreConfig &config)
      : PageStore{config.page_size_bytes}, path_{config.file_path}
  {
    const bool exists = std::filesystem::exists(path_);
    const int flags = O_RDWR | O_CREAT | ((config.truncate || !exists) ? O_TRUNC : 0);
    fd_ = ::open(path_.c_str(), flags, 0644);
    if (fd_ < 0) throw PagerError("cannot open " + path_.string() + ": " + std::strerror(errno));

    const auto frames = config.bufferpool_bytes / page_size_;
    frames_.resize(frames);
    arena_.resize(frames * page_size_);
    for (std::size_t i = 0; i < frames; ++i) free_frames_.push_back(frames - 1 - i);

    if (config.truncate || !exists) {
      page_count_ = 1;
      write_superblock();
    } else {
      load_superblock();
    }
  }

  ~FilePageStore() override
  {
    try {
      flush();
    } catch (...) {
    }
    ::close(fd_);
  }

  PageId
  allocate() override
  {
    const PageId id = page_count_++;
    freed_.resize(page_count_, false);
    auto &frame = frames_[grab_frame(id)];
    std::memset(frame_bytes(frame), 0, page_size_);
    frame.dirty = true;
    ++stats_.allocations;
    return id;
  }

  void
  free(PageId id) override
  {
    check(id);
    if (auto it = table_.find(id); it != table_.end()) {
      auto &frame = frames_[it->second];
      if (frame.pins > 0) throw PagerError("freeing pinned page " + std::to_string(id));
      lru_.erase(frame.lru_pos);
      free_frames_.push_back(it->second);
      frame = Frame{};
      table_.erase(it);
    }
    freed_[id] = true;
    ++stats_.frees;
  }

  std::byte *
  fix(PageId id, bool dirty) override
  {
    check(id);
    ++stats_.logical_reads;
    std::size_t idx;
    if (auto it = table_.find(id); it != table_.end()) {
      idx = it->second;
      lru_.splice(lru_.begin(), lru_, frames_[idx].lru_pos);
    } else {
      idx = grab_frame(id);
      auto *bytes = frame_bytes(frames_[idx]);
      read_exact(bytes, file_offset(id), id);
      ++stats_.physical_reads;
    }
    auto &frame = frames_[idx];
    ++frame.pins;
    frame.dirty = frame.dirty || dirty;
    return frame_bytes(frame);
  }

  void
  unfix(PageId id) noexcept override
  {
    if (auto it = table_.find(id); it != table_.end() && frames_[it->second].pins > 0) --frames_[it->second].pins;
  }

  void
  mark_dirty(PageId id) override
  {
    if (auto it = table_.find(id); it != table_.end()) frames_[it->second].dirty = true;
  }

  void
  flush() override
  {
    for (auto &frame : frames_) {
      if (frame.id != kInvalidPage && frame.dirty) write_back(frame);
    }
    write_superblock();
  }

  std::uint64_t
  live_pages() const noexcept override
  {
    std::uint64_t live = 0;
    for (std::size_t i = 1; i < freed_.size(); ++i) live += freed_[i] ? 0 : 1;
    return live;
  }

 private:
  struct Frame {
    PageId id{kInvalidPage};
    std::uint32_t pins{0};
    bool dirty{false};
    std::list<std::size_t>::iterator lru_pos;
  };

  std::byte *
  frame_bytes(const Frame &frame)
  {
    return arena_.data() + static_cast<std::size_t>(&frame - frames_.data()) * page_size_;
  }

  off_t
  file_offset(PageId id) const
  {
    return static_cast<off_t>(id * page_size_);
  }

  void
  check(PageId id) const
  {
    if (id == 0 || id >= page_count_ || freed_[id]) throw PagerError("unknown page id " + std::to_string(id));
  }

  /// Claim a frame for `id`, evicting the least recently used unpinned page if needed.
  std::size_t
  grab_frame(PageId id)
  {
    std::size_t idx;
    if (!free_frames_.empty()) {
      idx = free_frames_.back();
      free_frames_.pop_back();
    } else {
      auto victim = lru_.end();
      for (auto it = lru_.rbegin(); it != lru_.rend(); ++it) {
        if (frames_[*it].pins == 0) {
          victim = std::prev(it.base());
          break;
        }
      }
      if (victim == lru_.end()) throw PagerError("bufferpool exhausted: every frame is pinned");
      idx = *victim;
      auto &old = frames_[idx];
      if (old.dirty) write_back(old);
      table_.erase(old.id);
      lru_.erase(victim);
      old = Frame{};
      ++stats_.evictions;
    }
    auto &frame = frames_[idx];
    frame.id = id;
    lru_.push_front(idx);
    frame.lru_pos = lru_.begin();
    table_.emplace(id, idx);
    return idx;
  }

  void
  write_back(Frame &frame)
  {
    write_exact(frame_bytes(frame), file_offset(frame.id));
    frame.dirty = false;
    ++stats_.physical_writes;
  }

  void
  write_exact(const std::byte *src, off_t offset)
  {
    std::size_t done = 0;
    while (done < page_size_) {
      const auto n = ::pwrite(fd_, src + done, page_size_ - done, offset + static_cast<off_t>(done));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw PagerError("write failed on " + path_.string() + ": " + std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
  }

  void
  read_exact(std::byte *dst, off_t offset, PageId id)
  {
    std::size_t done = 0;
    while (done < page_size_) {
      const auto n = ::pread(fd_, dst + done, page_size_ - done, offset + static_cast<off_t>(done));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw PagerError("read failed on " + path_.string() + ": " + std::strerror(errno));
      }
      if (n == 0) throw PagerError("short read of page " + std::to_string(id) + " in " + path_.string());
      done += static_cast<std::size_t>(n);
    }
  }

  void
  write_superblock()
  {
    std::vector<std::byte> page(page_size_);
    std::memcpy(page.data(), kSuperMagic.data(), kSuperMagic.size());
    le::store<std::uint32_t>(page.data() + kOffPageSize, static_cast<std::uint32_t>(page_size_));
    le::store<std::uint64_t>(page.data() + kOffPageCount, page_count_);
    le::store<std::uint64_t>(page.data() + kOffRoot, root_);
    write_exact(page.data(), 0);
  }

  void
  load_superblock()
  {
    std::vector<std::byte> page(page_size_);
    read_exact(page.data(), 0, 0);
    if (std::memcmp(page.data(), kSuperMagic.data(), kSuperMagic.size()) != 0)
      throw PagerError("bad superblock magic in " + path_.string());
    if (le::load<std::uint32_t>(page.data() + kOffPageSize) != page_size_)
      throw PagerError("page size mismatch in " + path_.string());
    page_count_ = le::load<std::uint64_t>(page.data() + kOffPageCount);
    root_ = le::load<std::uint64_t>(page.data() + kOffRoot);
    freed_.assign(page_count_, false);
  }

  std::filesystem::path path_;
  int fd_{-1};
  PageId page_count_{1};
  std::vector<bool> freed_{false};
  std::vector<Frame> frames_;
  std::vector<std::byte> arena_;
  std::vector<std::size_t> free_frames_;
  std::list<std::size_t> lru_;
  std::unordered_map<PageId, std::size_t> table_;
};

}  // namespace

void
PageStoreConfig::validate() const
{
  if (page_size_bytes < 512 || !std::has_single_bit(page_size_bytes))
    throw std::invalid_argument("page size must be a power of two >= 512");
  if (backend == Backend::File) {
    if (bufferpool_bytes / page_size_bytes < 2) throw std::invalid_argument("bufferpool must hold at least two pages");
    if (file_path.empty()) throw std::invalid_argument("file backend needs a file path");
  }
}

void
PageStore::read(PageId id, std::span<std::byte> out)
{
  if (out.size() < page_size_) throw PagerError("read buffer smaller than a page");
  PageGuard guard{*this, id, false};
  std::memcpy(out.data(), guard.data(), page_size_);
}

void
PageStore::write(PageId id, std::span<const std::byte> bytes)
{
  if (bytes.size() != page_size_) throw PagerError("write must cover exactly one page");
  PageGuard guard{*this, id, true};
  std::memcpy(guard.data(), bytes.data(), page_size_);
}

std::unique_ptr<PageStore>
open_page_store(const PageStoreConfig &config)
{
  config.validate();
  if (config.backend == Backend::Memory) return std::make_unique<MemoryPageStore>(config.page_size_bytes);
  return std::make_unique<FilePageStore>(config);
}

}  // namespace osm
