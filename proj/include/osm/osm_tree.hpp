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


#ifndef OSM_OSM_TREE_HPP
#define OSM_OSM_TREE_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "osm/bptree.hpp"
#include "osm/entry.hpp"
#include "osm/osm_buffer.hpp"
#include "osm/pager.hpp"
#include "osm/zonemap.hpp"

namespace osm
{

struct OsmConfig {
  BufferConfig buffer;
  TreeConfig tree;
  PageStoreConfig store;
  /// Time buffer operations and tree searches per call. Flush phases are always timed.
  bool collect_timings{false};

  void validate() const;
};

/// Wall-clock split of where an OsmTree spends its time, in nanoseconds.
struct TimeBreakdown {
  std::uint64_t buffer_ns{0};
  std::uint64_t sort_ns{0};
  std::uint64_t bulk_load_ns{0};
  std::uint64_t top_insert_ns{0};
  std::uint64_t tree_search_ns{0};
  std::uint64_t metadata_ns{0};

  std::uint64_t total() const noexcept
  {
    return buffer_ns + sort_ns + bulk_load_ns + top_insert_ns + tree_search_ns + metadata_ns;
  }
};

struct OsmStats {
  std::uint64_t entries_ingested{0};
  /// Entries emitted by the buffer, before deduplication.
  std::uint64_t entries_flushed{0};
  /// Flushed entries dropped because a newer version of the key was in the same flush.
  std::uint64_t entries_superseded{0};
  std::uint64_t bulk_loaded_entries{0};
  /// Root-to-leaf inserts plus right-most leaf fast-path inserts.
  std::uint64_t top_inserted_entries{0};
  std::uint64_t fast_path_entries{0};
  std::uint64_t flush_cycles{0};
  std::uint64_t pre_sorted_flushes{0};

  std::uint64_t gets{0};
  std::uint64_t scans{0};
  std::uint64_t buffer_hits{0};
  std::uint64_t tree_hits{0};
  std::uint64_t tree_zonemap_skips{0};
  std::uint64_t misses{0};

  TimeBreakdown time;

  std::uint64_t entries_to_tree() const noexcept { return bulk_loaded_entries + top_inserted_entries; }
};

/// Result of the buffer-size bound; see buffer_size_bound.
struct BufferBound {
  bool feasible{false};
  /// Largest admissible buffer fraction p (exclusive); +inf when unbounded, NaN when infeasible.
  double max_fraction{0.0};
  /// Smallest delta strictly above 1 / log_B(N_B).
  double min_delta{0.0};
  double log_b_nb{0.0};
};

/**
 * Upper bound on the buffer size, as a fraction p of the data, for which a
 * buffered lookup is still at most delta times the cost of a tree lookup:
 *
 *   p < 2 (delta log_B(N_B) - 1) / (v + f_G f_p N_B - 1 - 2 log_B(N_B))
 *
 * with N_B tree pages, fanout B, global and per-page filter false positive
 * rates f_G and f_p, and v the cost of a sorted-section probe in pages.
 * Infeasible when delta <= 1 / log_B(N_B).
 */
BufferBound buffer_size_bound(double delta, double pages_in_tree, double fanout, double fpr_global, double fpr_page,
                              double v = 1.0);

/**
 * A B+-tree behind an OSM buffer.
 *
 * Inserts are appended to the buffer. When it fills, a flush emits its oldest
 * sorted portion: entries above the tree maximum are bulk loaded as new
 * right-most leaves, the rest are top-inserted. Reads consult the buffer
 * first (newest version wins) and fall back to the tree.
 *
 * Externally synchronized: reads reorganize the buffer.
 */
class OsmTree
{
 public:
  explicit OsmTree(OsmConfig config = {});

  OsmTree(const OsmTree &) = delete;
  OsmTree &operator=(const OsmTree &) = delete;
  OsmTree(OsmTree &&) = default;
  OsmTree &operator=(OsmTree &&) = default;

  void put(Key key, Value value);
  std::optional<Value> get(Key key);
  /// Newest version of every key in [lo, hi], ascending. Entry::seq is zero for tree-resident keys.
  std::vector<Entry> scan(Key lo, Key hi);

  /// Run one flush cycle now, even when the buffer is not full.
  void flush();
  /// Flush until the buffer is empty.
  void drain();

  const OsmBuffer &buffer() const noexcept { return *buffer_; }
  const BPlusTree &tree() const noexcept { return *tree_; }
  const PageStore &store() const noexcept { return *store_; }
  PageStore &store() noexcept { return *store_; }
  const Zonemap &tree_zonemap() const noexcept { return tree_zonemap_; }
  const OsmConfig &config() const noexcept { return config_; }
  const OsmStats &stats() const noexcept { return stats_; }
  /// Node and entry counts, buffer and pager counters, and the time split as one flat map.
  std::map<std::string, double> stats_map() const;
  /// Zero read-side counters in the tree, buffer and pager.
  void reset_query_stats();

 private:
  void flush_into_tree(FlushPlan plan);

  OsmConfig config_;
  std::unique_ptr<PageStore> store_;
  std::unique_ptr<BPlusTree> tree_;
  std::unique_ptr<OsmBuffer> buffer_;
  Zonemap tree_zonemap_;
  Seq next_seq_{0};
  OsmStats stats_;
};

}  // namespace osm

#endif  // OSM_OSM_TREE_HPP
