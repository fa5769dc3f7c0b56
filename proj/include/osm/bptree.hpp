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

#ifndef OSM_BPTREE_HPP
#define OSM_BPTREE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "osm/entry.hpp"
#include "osm/pager.hpp"

namespace osm
{

/// A violated precondition of a tree operation, e.g. an unsorted bulk-load run.
class TreeContractError : public std::logic_error
{
 public:
  using std::logic_error::logic_error;
};

struct TreeConfig {
  /// Fraction of each bulk-loaded leaf that is filled.
  double leaf_fill_factor{0.95};
  /// Share of entries kept by the left node on a split.
  double split_ratio{0.80};
  /// Apply split_ratio only when the overflowing key is the node maximum; split 50:50 otherwise.
  bool rightmost_split_only{true};

  /// Textbook tree: 50:50 splits everywhere, full bulk-loaded leaves.
  static TreeConfig
  baseline() noexcept
  {
    return TreeConfig{1.0, 0.5, false};
  }

  void validate() const;
};

struct TreeStats {
  std::uint64_t internal_nodes{0};
  std::uint64_t leaf_nodes{0};
  std::uint64_t height{0};
  std::uint64_t splits{0};
  std::uint64_t top_inserted{0};
  std::uint64_t bulk_loaded{0};
  std::uint64_t fast_path_inserted{0};
  /// Inserts that replaced the value of an existing key.
  std::uint64_t upserts{0};
  /// Distinct keys stored.
  std::uint64_t entry_count{0};

  std::uint64_t node_count() const noexcept { return internal_nodes + leaf_nodes; }
};

/**
 * B+-tree of fixed-width 8-byte keys and values stored on a PageStore.
 *
 * Node page layout (little-endian):
 *
 *   offset 0   u16 kind (0 = leaf, 1 = internal)
 *   offset 2   u16 reserved
 *   offset 4   u32 count (keys in the node)
 *   offset 8   u64 next leaf page id (leaves; kInvalidPage at the right end)
 *   offset 16  u64 keys[key capacity]
 *   then       u64 values[key capacity] (leaf) or u64 children[key capacity + 1] (internal)
 *
 * Child i of an internal node holds keys in [key[i-1], key[i]). The root page
 * id lives in the store superblock, so a file-backed tree can be reopened.
 */
class BPlusTree
{
 public:
  explicit BPlusTree(PageStore &store, TreeConfig config = {});

  BPlusTree(const BPlusTree &) = delete;
  BPlusTree &operator=(const BPlusTree &) = delete;

  /// Root-to-leaf insert with upsert semantics.
  void top_insert(Key key, Value value);

  /**
   * Insert into the right-most leaf when key >= that leaf's minimum and the
   * leaf has room (or already holds the key). Returns false otherwise and
   * leaves the tree untouched.
   */
  bool fast_path_insert(Key key, Value value);

  /**
   * Append a run of strictly ascending keys above the current maximum as new
   * right-most leaves filled to leaf_fill_factor.
   */
  void bulk_load_run(std::span<const Entry> run);

  std::optional<Value> search(Key key) const;

  /// All entries with lo <= key <= hi, ascending. Entry::seq is zero.
  std::vector<Entry> scan(Key lo, Key hi) const;

  bool empty() const noexcept { return stats_.entry_count == 0; }
  std::optional<Key> min_key() const;
  std::optional<Key> max_key() const;

  const TreeStats &stats() const noexcept { return stats_; }
  const TreeConfig &config() const noexcept { return config_; }
  std::size_t leaf_capacity() const noexcept { return leaf_cap_; }
  std::size_t internal_capacity() const noexcept { return internal_cap_; }
  /// Children per internal node.
  std::size_t fanout() const noexcept { return internal_cap_ + 1; }
  std::size_t bulk_leaf_target() const noexcept;

  /// Mean entries per leaf over leaf capacity, walking the leaf chain.
  double mean_leaf_occupancy() const;
  /// Entries per leaf in chain order.
  std::vector<std::size_t> leaf_occupancies() const;

  /**
   * Check the structural invariants: sorted node keys, separator bounds,
   * uniform leaf depth, an ordered and complete leaf chain, and occupancy no
   * lower than the configured split ratio allows. Throws std::logic_error.
   */
  void validate() const;

  PageStore &store() const noexcept { return store_; }

 private:
  struct Step {
    PageId page;
    std::size_t child;
  };

  PageGuard new_node(bool leaf);
  std::size_t split_point(std::size_t total, bool at_max) const noexcept;
  void insert_into_parent(std::vector<Step> &path, Key separator, PageId right);
  PageId leaf_for(Key key, std::vector<Step> *path) const;
  void load_existing();

  PageStore &store_;
  TreeConfig config_;
  std::size_t leaf_cap_;
  std::size_t internal_cap_;
  PageId root_{kInvalidPage};
  PageId rightmost_leaf_{kInvalidPage};
  std::optional<Key> max_key_;
  TreeStats stats_;
};

}  // namespace osm

#endif  // OSM_BPTREE_HPP
