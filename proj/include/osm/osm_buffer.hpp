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

#ifndef OSM_OSM_BUFFER_HPP
#define OSM_OSM_BUFFER_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "osm/bloom_filter.hpp"
#include "osm/entry.hpp"
#include "osm/sorting.hpp"
#include "osm/zonemap.hpp"

namespace osm
{

/// Raised by OsmBuffer::insert when the buffer is already at capacity.
class BufferFullError : public std::logic_error
{
 public:
  using std::logic_error::logic_error;
};

struct BufferConfig {
  /// 5M entries of 8 bytes is a 40MB buffer.
  std::size_t capacity_entries{5'000'000};
  /// Entries per 4KB buffer page at 8 bytes per entry.
  std::size_t page_entries{512};
  double flush_fraction{0.5};
  /// Tail size, as a fraction of capacity, that makes the next read sort it.
  double unsorted_threshold_fraction{0.10};
  bool use_global_bloom{true};
  bool use_page_blooms{true};
  bool query_driven_sorting{true};
  double bloom_bits_per_entry{BloomFilter::kDefaultBitsPerEntry};

  void validate() const;
  std::size_t flush_entries() const noexcept;
  std::size_t sort_threshold_entries() const noexcept;
  std::size_t page_count() const noexcept;
};

struct SortedComponent {
  std::size_t begin{0};
  std::size_t end{0};
  Zonemap zonemap;

  std::size_t size() const noexcept { return end - begin; }
};

/// What one flush cycle emits.
struct FlushPlan {
  /// The flushed entries, ordered by (key, seq).
  std::vector<Entry> entries;
  bool pre_sorted{false};
  /// Maximal runs of strictly ascending keys, as [begin, end) into `entries`.
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  /// Sort of the whole buffer before the flush, when one was needed.
  std::optional<SortStats> flush_sort;
  /// Sort of the retained remainder, when it was not already sorted.
  std::optional<SortStats> remainder_sort;

  std::size_t flush_count() const noexcept { return entries.size(); }
};

enum class BufferSection { Tail, Component, Sorted };

struct BufferHit {
  Value value{};
  BufferSection section{BufferSection::Tail};
};

struct BufferStats {
  std::uint64_t inserts{0};
  std::uint64_t flushes{0};
  std::uint64_t sorts_adaptive{0};
  std::uint64_t sorts_merge{0};
  std::uint64_t sort_ns{0};
  std::uint64_t components_created{0};

  std::uint64_t point_queries{0};
  std::uint64_t buffer_zonemap_skips{0};
  std::uint64_t global_bf_probes{0};
  std::uint64_t global_bf_positives{0};
  std::uint64_t page_zonemap_skips{0};
  std::uint64_t page_bf_probes{0};
  std::uint64_t page_bf_positives{0};
  std::uint64_t pages_scanned{0};
  std::uint64_t interpolation_probes{0};
  std::uint64_t hits_tail{0};
  std::uint64_t hits_component{0};
  std::uint64_t hits_sorted{0};

  std::uint64_t bf_probes() const noexcept { return global_bf_probes + page_bf_probes; }
  std::uint64_t bf_positives() const noexcept { return global_bf_positives + page_bf_positives; }
};

/**
 * Position of the last entry with `key` in a slice sorted by (key, seq).
 *
 * Interpolation search; after 2 * log2(n) probes without converging it falls
 * back to binary search. `probes`, when given, is incremented per probe.
 */
std::optional<std::size_t> interpolation_search(std::span<const Entry> sorted, Key key, std::uint64_t *probes = nullptr);

/**
 * The staging buffer in front of the tree.
 *
 * The entry array is laid out as
 *
 *   [0, sorted_boundary)            sorted section kept from the last flush
 *   components, oldest first        query-driven sorted blocks
 *   [tail_begin, size)              unsorted tail, newest at the end
 *
 * and is cut into fixed pages, each with a zonemap and (for tail entries) a
 * Bloom filter. A global Bloom filter covers the whole tail. The sorted
 * prefix tracks the longest prefix that is sorted and no larger than any
 * later entry; its last page is the last sorted zone and decides how much can
 * be flushed without sorting.
 *
 * Not thread-safe; reads mutate metadata through query-driven sorting.
 */
class OsmBuffer
{
 public:
  explicit OsmBuffer(BufferConfig config);

  /// Append an entry. Returns true when the buffer has become full.
  bool insert(const Entry &entry);

  /// Emit one flush cycle and reorganize the retained entries.
  FlushPlan plan_flush();

  /// Newest version of `key` held in the buffer, or nullopt when the tree must be searched.
  std::optional<BufferHit> point_query(Key key);

  /// Newest version of every buffered key in [lo, hi], ascending by key.
  std::vector<Entry> range_query(Key lo, Key hi) const;

  /// Turn the oldest threshold-sized slice of the tail into a sorted component.
  bool maybe_query_driven_sort();

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool full() const noexcept { return data_.size() >= config_.capacity_entries; }
  std::size_t capacity() const noexcept { return config_.capacity_entries; }
  const BufferConfig &config() const noexcept { return config_; }
  std::span<const Entry> contents() const noexcept { return data_; }

  std::size_t sorted_boundary() const noexcept { return sorted_boundary_; }
  std::size_t tail_begin() const noexcept { return tail_begin_; }
  std::size_t tail_size() const noexcept { return data_.size() - tail_begin_; }
  const std::vector<SortedComponent> &components() const noexcept { return components_; }
  /// Sorted section (when nonempty) plus components.
  std::size_t sorted_run_count() const noexcept;

  /// Length of the longest sorted prefix that no later entry undercuts.
  std::size_t sorted_prefix() const noexcept { return sorted_prefix_; }
  /// Whole pages covered by the sorted prefix (a trailing partial page counts when the prefix is the whole buffer).
  std::size_t sorted_zone_pages() const noexcept;
  std::optional<std::size_t> last_sorted_zone() const noexcept;

  std::uint64_t k_counter() const noexcept { return k_counter_; }
  std::uint64_t l_counter() const noexcept { return l_counter_; }
  std::uint64_t appends_since_flush() const noexcept { return appends_since_flush_; }
  double k_estimate() const noexcept;
  double l_estimate() const noexcept;

  const Zonemap &zonemap() const noexcept { return buffer_zonemap_; }
  const Zonemap &page_zonemap(std::size_t page) const { return page_zonemaps_.at(page); }
  const BloomFilter &page_bloom(std::size_t page) const { return page_blooms_.at(page); }
  const BloomFilter &global_bloom() const noexcept { return global_bloom_; }
  std::size_t page_of(std::size_t position) const noexcept { return position / config_.page_entries; }

  const BufferStats &stats() const noexcept { return stats_; }
  void reset_query_stats() noexcept;

 private:
  SortStats timed_sort(std::span<Entry> range);
  void recompute_sorted_prefix() noexcept;
  void rebuild_global_bloom();
  void rebuild_page_metadata();

  BufferConfig config_;
  std::vector<Entry> data_;
  std::size_t sorted_boundary_{0};
  std::size_t tail_begin_{0};
  std::size_t sorted_prefix_{0};
  std::vector<SortedComponent> components_;

  std::vector<Zonemap> page_zonemaps_;
  std::vector<BloomFilter> page_blooms_;
  BloomFilter global_bloom_;
  Zonemap buffer_zonemap_;

  std::uint64_t k_counter_{0};
  std::uint64_t l_counter_{0};
  std::uint64_t l_cap_{1};
  std::uint64_t appends_since_flush_{0};

  BufferStats stats_;
};

}  // namespace osm

#endif  // OSM_OSM_BUFFER_HPP
