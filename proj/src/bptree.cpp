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

#include "osm/bptree.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "osm/endian.hpp"

namespace osm
{
namespace
{

constexpr std::size_t kHeaderBytes = 16;
constexpr std::uint16_t kLeafKind = 0;
constexpr std::uint16_t kInternalKind = 1;

/// In-place view of a node page. `cap` is the key capacity of the node kind.
struct NodeRef {
  std::byte *base;
  std::size_t cap;

  bool is_leaf() const noexcept { return le::load<std::uint16_t>(base) == kLeafKind; }
  std::size_t count() const noexcept { return le::load<std::uint32_t>(base + 4); }
  void set_count(std::size_t c) const noexcept { le::store<std::uint32_t>(base + 4, static_cast<std::uint32_t>(c)); }
  PageId next() const noexcept { return le::load<std::uint64_t>(base + 8); }
  void set_next(PageId id) const noexcept { le::store<std::uint64_t>(base + 8, id); }
  Key *keys() const noexcept { return reinterpret_cast<Key *>(base + kHeaderBytes); }
  /// Values of a leaf or child ids of an internal node.
  std::uint64_t *slots() const noexcept { return reinterpret_cast<std::uint64_t *>(base + kHeaderBytes + 8 * cap); }

  void
  init(bool leaf) const noexcept
  {
    le::store<std::uint16_t>(base, leaf ? kLeafKind : kInternalKind);
    le::store<std::uint16_t>(base + 2, 0);
    set_count(0);
    set_next(kInvalidPage);
  }
};

}  // namespace

void
TreeConfig::validate() const
{
  if (!(leaf_fill_factor >= 0.5 && leaf_fill_factor <= 1.0))
    throw std::invalid_argument("leaf fill factor must lie in [0.5, 1]");
  if (!(split_ratio >= 0.5 && split_ratio < 1.0)) throw std::invalid_argument("split ratio must lie in [0.5, 1)");
}

BPlusTree::BPlusTree(PageStore &store, TreeConfig config)
    : store_{store},
      config_{config},
      leaf_cap_{(store.page_size() - kHeaderBytes) / 16},
      internal_cap_{(store.page_size() - kHeaderBytes - 8) / 16}
{
  config_.validate();
  if (store_.root() != kInvalidPage) load_existing();
}

std::size_t
BPlusTree::bulk_leaf_target() const noexcept
{
  const auto target = static_cast<std::size_t>(std::floor(config_.leaf_fill_factor * static_cast<double>(leaf_cap_)));
  return std::clamp<std::size_t>(target, 1, leaf_cap_);
}

PageGuard
BPlusTree::new_node(bool leaf)
{
  PageGuard g{store_, store_.allocate(), true};
  NodeRef{g.data(), leaf ? leaf_cap_ : internal_cap_}.init(leaf);
  ++(leaf ? stats_.leaf_nodes : stats_.internal_nodes);
  return g;
}

std::size_t
BPlusTree::split_point(std::size_t total, bool at_max) const noexcept
{
  const double ratio = (config_.rightmost_split_only && !at_max) ? 0.5 : config_.split_ratio;
  const auto left = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(total)));
  return std::clamp<std::size_t>(left, 1, total - 1);
}

PageId
BPlusTree::leaf_for(Key key, std::vector<Step> *path) const
{
  PageId id = root_;
  for (;;) {
    PageGuard g{store_, id, false};
    NodeRef node{g.data(), internal_cap_};
    if (node.is_leaf()) return id;
    const auto count = node.count();
    const auto idx = static_cast<std::size_t>(std::upper_bound(node.keys(), node.keys() + count, key) - node.keys());
    if (path != nullptr) path->push_back(Step{id, idx});
    id = node.slots()[idx];
  }
}

void
BPlusTree::top_insert(Key key, Value value)
{
  if (root_ == kInvalidPage) {
    root_ = rightmost_leaf_ = new_node(true).id();
    store_.set_root(root_);
    stats_.height = 1;
  }

  std::vector<Step> path;
  const PageId leaf_id = leaf_for(key, &path);
  PageGuard g{store_, leaf_id, true};
  NodeRef leaf{g.data(), leaf_cap_};
  const auto count = leaf.count();
  auto *keys = leaf.keys();
  auto *vals = leaf.slots();
  const auto pos = static_cast<std::size_t>(std::lower_bound(keys, keys + count, key) - keys);

  ++stats_.top_inserted;
  if (pos < count && keys[pos] == key) {
    vals[pos] = value;
    ++stats_.upserts;
    return;
  }
  ++stats_.entry_count;
  if (!max_key_ || key > *max_key_) max_key_ = key;

  if (count < leaf_cap_) {
    std::memmove(keys + pos + 1, keys + pos, (count - pos) * sizeof(Key));
    std::memmove(vals + pos + 1, vals + pos, (count - pos) * sizeof(Value));
    keys[pos] = key;
    vals[pos] = value;
    leaf.set_count(count + 1);
    return;
  }

  // Overflow: merge into scratch, then divide between this leaf and a new right sibling.
  const auto total = count + 1;
  std::vector<Key> tk(total);
  std::vector<Value> tv(total);
  std::copy(keys, keys + pos, tk.begin());
  std::copy(vals, vals + pos, tv.begin());
  tk[pos] = key;
  tv[pos] = value;
  std::copy(keys + pos, keys + count, tk.begin() + static_cast<std::ptrdiff_t>(pos) + 1);
  std::copy(vals + pos, vals + count, tv.begin() + static_cast<std::ptrdiff_t>(pos) + 1);

  const auto left = split_point(total, pos == count);
  PageGuard rg = new_node(true);
  const PageId right_id = rg.id();
  NodeRef right{rg.data(), leaf_cap_};

  std::copy(tk.begin(), tk.begin() + static_cast<std::ptrdiff_t>(left), keys);
  std::copy(tv.begin(), tv.begin() + static_cast<std::ptrdiff_t>(left), vals);
  leaf.set_count(left);
  std::copy(tk.begin() + static_cast<std::ptrdiff_t>(left), tk.end(), right.keys());
  std::copy(tv.begin() + static_cast<std::ptrdiff_t>(left), tv.end(), right.slots());
  right.set_count(total - left);
  right.set_next(leaf.next());
  leaf.set_next(right_id);
  if (rightmost_leaf_ == leaf_id) rightmost_leaf_ = right_id;
  ++stats_.splits;

  const Key separator = right.keys()[0];
  rg.release();
  g.release();
  insert_into_parent(path, separator, right_id);
}

void
BPlusTree::insert_into_parent(std::vector<Step> &path, Key separator, PageId right_id)
{
  for (;;) {
    if (path.empty()) {
      const PageId old_root = root_;
      PageGuard g = new_node(false);
      root_ = g.id();
      NodeRef node{g.data(), internal_cap_};
      node.keys()[0] = separator;
      node.slots()[0] = old_root;
      node.slots()[1] = right_id;
      node.set_count(1);
      store_.set_root(root_);
      ++stats_.height;
      return;
    }

    const Step step = path.back();
    path.pop_back();
    PageGuard g{store_, step.page, true};
    NodeRef node{g.data(), internal_cap_};
    const auto count = node.count();
    auto *keys = node.keys();
    auto *kids = node.slots();
    const auto pos = step.child;

    if (count < internal_cap_) {
      std::memmove(keys + pos + 1, keys + pos, (count - pos) * sizeof(Key));
      std::memmove(kids + pos + 2, kids + pos + 1, (count - pos) * sizeof(PageId));
      keys[pos] = separator;
      kids[pos + 1] = right_id;
      node.set_count(count + 1);
      return;
    }

    const auto total = count + 1;
    std::vector<Key> tk(total);
    std::vector<PageId> tc(total + 1);
    std::copy(keys, keys + pos, tk.begin());
    tk[pos] = separator;
    std::copy(keys + pos, keys + count, tk.begin() + static_cast<std::ptrdiff_t>(pos) + 1);
    std::copy(kids, kids + pos + 1, tc.begin());
    tc[pos + 1] = right_id;
    std::copy(kids + pos + 1, kids + count + 1, tc.begin() + static_cast<std::ptrdiff_t>(pos) + 2);

    const auto left = split_point(total, pos == count);
    PageGuard sg = new_node(false);
    const PageId sibling = sg.id();
    NodeRef sib{sg.data(), internal_cap_};

    std::copy(tk.begin(), tk.begin() + static_cast<std::ptrdiff_t>(left), keys);
    std::copy(tc.begin(), tc.begin() + static_cast<std::ptrdiff_t>(left) + 1, kids);
    node.set_count(left);
    std::copy(tk.begin() + static_cast<std::ptrdiff_t>(left) + 1, tk.end(), sib.keys());
    std::copy(tc.begin() + static_cast<std::ptrdiff_t>(left) + 1, tc.end(), sib.slots());
    sib.set_count(total - left - 1);
    ++stats_.splits;

    separator = tk[left];
    right_id = sibling;
  }
}

bool
BPlusTree::fast_path_insert(Key key, Value value)
{
  if (rightmost_leaf_ == kInvalidPage) return false;
  PageGuard g{store_, rightmost_leaf_, false};
  NodeRef leaf{g.data(), leaf_cap_};
  const auto count = leaf.count();
  auto *keys = leaf.keys();
  auto *vals = leaf.slots();
  if (count == 0 || key < keys[0]) return false;

  const auto pos = static_cast<std::size_t>(std::lower_bound(keys, keys + count, key) - keys);
  if (pos < count && keys[pos] == key) {
    g.mark_dirty();
    vals[pos] = value;
    ++stats_.upserts;
    ++stats_.fast_path_inserted;
    return true;
  }
  if (count == leaf_cap_) return false;

  g.mark_dirty();
  std::memmove(keys + pos + 1, keys + pos, (count - pos) * sizeof(Key));
  std::memmove(vals + pos + 1, vals + pos, (count - pos) * sizeof(Value));
  keys[pos] = key;
  vals[pos] = value;
  leaf.set_count(count + 1);
  ++stats_.fast_path_inserted;
  ++stats_.entry_count;
  if (!max_key_ || key > *max_key_) max_key_ = key;
  return true;
}

void
BPlusTree::bulk_load_run(std::span<const Entry> run)
{
  if (run.empty()) return;
  for (std::size_t i = 1; i < run.size(); ++i) {
    if (run[i].key <= run[i - 1].key) throw TreeContractError("bulk_load_run: keys are not strictly ascending");
  }
  if (max_key_ && run.front().key <= *max_key_)
    throw TreeContractError("bulk_load_run: run overlaps the keys already in the tree");

  if (root_ == kInvalidPage) {
    root_ = rightmost_leaf_ = new_node(true).id();
    store_.set_root(root_);
    stats_.height = 1;
  }

  // Pin the right-most path, leaf first.
  std::vector<PageGuard> path;
  for (PageId id = root_;;) {
    PageGuard g{store_, id, true};
    NodeRef node{g.data(), internal_cap_};
    const bool leaf = node.is_leaf();
    const PageId child = leaf ? kInvalidPage : node.slots()[node.count()];
    path.push_back(std::move(g));
    if (leaf) break;
    id = child;
  }
  std::reverse(path.begin(), path.end());

  // Hook `child` (whose smallest key is `separator`) under path[level].
  auto append_separator = [&](auto &self, std::size_t level, Key separator, PageId child) -> void {
    if (level == path.size()) {
      const PageId below = path.back().id();
      PageGuard g = new_node(false);
      root_ = g.id();
      NodeRef node{g.data(), internal_cap_};
      node.keys()[0] = separator;
      node.slots()[0] = below;
      node.slots()[1] = child;
      node.set_count(1);
      store_.set_root(root_);
      ++stats_.height;
      path.push_back(std::move(g));
      return;
    }
    NodeRef node{path[level].data(), internal_cap_};
    const auto count = node.count();
    if (count < internal_cap_) {
      node.keys()[count] = separator;
      node.slots()[count + 1] = child;
      node.set_count(count + 1);
      return;
    }
    PageGuard g = new_node(false);
    const PageId fresh = g.id();
    NodeRef{g.data(), internal_cap_}.slots()[0] = child;
    self(self, level + 1, separator, fresh);
    path[level] = std::move(g);
  };

  const auto target = bulk_leaf_target();
  std::size_t i = 0;
  auto fill = [&](NodeRef leaf) {
    auto count = leaf.count();
    const auto take = std::min(run.size() - i, count < target ? target - count : std::size_t{0});
    for (std::size_t j = 0; j < take; ++j, ++i, ++count) {
      leaf.keys()[count] = run[i].key;
      leaf.slots()[count] = run[i].value;
    }
    leaf.set_count(count);
  };

  fill(NodeRef{path[0].data(), leaf_cap_});
  while (i < run.size()) {
    PageGuard g = new_node(true);
    const PageId fresh = g.id();
    NodeRef leaf{g.data(), leaf_cap_};
    fill(leaf);
    NodeRef{path[0].data(), leaf_cap_}.set_next(fresh);
    append_separator(append_separator, 1, leaf.keys()[0], fresh);
    path[0] = std::move(g);
  }

  rightmost_leaf_ = path[0].id();
  stats_.bulk_loaded += run.size();
  stats_.entry_count += run.size();
  max_key_ = run.back().key;
}

std::optional<Value>
BPlusTree::search(Key key) const
{
  if (root_ == kInvalidPage) return std::nullopt;
  PageGuard g{store_, leaf_for(key, nullptr), false};
  NodeRef leaf{g.data(), leaf_cap_};
  const auto count = leaf.count();
  const auto *keys = leaf.keys();
  const auto *it = std::lower_bound(keys, keys + count, key);
  if (it == keys + count || *it != key) return std::nullopt;
  return leaf.slots()[it - keys];
}

std::vector<Entry>
BPlusTree::scan(Key lo, Key hi) const
{
  std::vector<Entry> out;
  if (root_ == kInvalidPage || lo > hi) return out;
  PageId id = leaf_for(lo, nullptr);
  bool first = true;
  while (id != kInvalidPage) {
    PageGuard g{store_, id, false};
    NodeRef leaf{g.data(), leaf_cap_};
    const auto count = leaf.count();
    const auto *keys = leaf.keys();
    std::size_t pos = first ? static_cast<std::size_t>(std::lower_bound(keys, keys + count, lo) - keys) : 0;
    first = false;
    for (; pos < count; ++pos) {
      if (keys[pos] > hi) return out;
      out.push_back(Entry{keys[pos], leaf.slots()[pos], 0});
    }
    id = leaf.next();
  }
  return out;
}

std::optional<Key>
BPlusTree::min_key() const
{
  if (empty()) return std::nullopt;
  PageId id = root_;
  for (;;) {
    PageGuard g{store_, id, false};
    NodeRef node{g.data(), internal_cap_};
    if (node.is_leaf()) return node.keys()[0];
    id = node.slots()[0];
  }
}

std::optional<Key>
BPlusTree::max_key() const
{
  return empty() ? std::nullopt : max_key_;
}

std::vector<std::size_t>
BPlusTree::leaf_occupancies() const
{
  std::vector<std::size_t> out;
  if (root_ == kInvalidPage) return out;
  PageId id = root_;
  for (;;) {
    PageGuard g{store_, id, false};
    NodeRef node{g.data(), internal_cap_};
    if (node.is_leaf()) break;
    id = node.slots()[0];
  }
  while (id != kInvalidPage) {
    PageGuard g{store_, id, false};
    NodeRef leaf{g.data(), leaf_cap_};
    out.push_back(leaf.count());
    id = leaf.next();
  }
  return out;
}

double
BPlusTree::mean_leaf_occupancy() const
{
  const auto occ = leaf_occupancies();
  if (occ.empty()) return 0.0;
  std::uint64_t sum = 0;
  for (auto c : occ) sum += c;
  return static_cast<double>(sum) / (static_cast<double>(occ.size()) * static_cast<double>(leaf_cap_));
}

void
BPlusTree::validate() const
{
  if (root_ == kInvalidPage) return;

  const double share = std::min(config_.split_ratio, 1.0 - config_.split_ratio);
  const auto min_leaf = static_cast<std::size_t>(std::floor(share * static_cast<double>(leaf_cap_ + 1)));
  const auto min_children = static_cast<std::size_t>(std::floor(share * static_cast<double>(internal_cap_ + 1)));

  std::vector<PageId> leaves;
  std::uint64_t entries = 0;
  std::optional<std::size_t> leaf_depth;
  std::uint64_t internal_nodes = 0;

  auto fail = [](const std::string &what, PageId id) {
    throw std::logic_error("tree invariant violated at page " + std::to_string(id) + ": " + what);
  };

  auto visit = [&](auto &self, PageId id, std::optional<Key> lo, std::optional<Key> hi, std::size_t depth,
                   bool is_root, bool rightmost) -> void {
    PageGuard g{store_, id, false};
    NodeRef node{g.data(), internal_cap_};
    const auto count = node.count();
    if (node.is_leaf()) {
      NodeRef leaf{g.data(), leaf_cap_};
      const auto *keys = leaf.keys();
      for (std::size_t i = 0; i < count; ++i) {
        if (i > 0 && keys[i] <= keys[i - 1]) fail("leaf keys not strictly increasing", id);
        if ((lo && keys[i] < *lo) || (hi && keys[i] >= *hi)) fail("leaf key outside separator bounds", id);
      }
      if (!is_root && count == 0) fail("empty leaf", id);
      if (!is_root && !rightmost && count < min_leaf) fail("leaf below minimum occupancy", id);
      if (leaf_depth && *leaf_depth != depth) fail("leaves at different depths", id);
      leaf_depth = depth;
      leaves.push_back(id);
      entries += count;
      return;
    }
    ++internal_nodes;
    const auto *keys = node.keys();
    for (std::size_t i = 0; i < count; ++i) {
      if (i > 0 && keys[i] <= keys[i - 1]) fail("separators not strictly increasing", id);
      if ((lo && keys[i] < *lo) || (hi && keys[i] >= *hi)) fail("separator outside parent bounds", id);
    }
    if (is_root && count == 0) fail("internal root without separators", id);
    if (!is_root && !rightmost && count + 1 < min_children) fail("internal node below minimum occupancy", id);
    std::vector<PageId> kids(node.slots(), node.slots() + count + 1);
    std::vector<Key> seps(keys, keys + count);
    g.release();
    for (std::size_t i = 0; i <= count; ++i) {
      const auto clo = i == 0 ? lo : std::optional<Key>{seps[i - 1]};
      const auto chi = i == count ? hi : std::optional<Key>{seps[i]};
      self(self, kids[i], clo, chi, depth + 1, false, rightmost && i == count);
    }
  };
  visit(visit, root_, std::nullopt, std::nullopt, 1, true, true);

  for (std::size_t i = 0; i < leaves.size(); ++i) {
    PageGuard g{store_, leaves[i], false};
    const auto next = NodeRef{g.data(), leaf_cap_}.next();
    const auto expected = i + 1 < leaves.size() ? leaves[i + 1] : kInvalidPage;
    if (next != expected) fail("leaf chain out of order", leaves[i]);
  }
  if (entries != stats_.entry_count) fail("entry count mismatch", root_);
  if (leaves.size() != stats_.leaf_nodes || internal_nodes != stats_.internal_nodes) fail("node count mismatch", root_);
  if (leaf_depth && *leaf_depth != stats_.height) fail("height mismatch", root_);
  if (leaves.back() != rightmost_leaf_) fail("stale right-most leaf pointer", rightmost_leaf_);
  if (entries > 0) {
    PageGuard g{store_, rightmost_leaf_, false};
    NodeRef leaf{g.data(), leaf_cap_};
    if (leaf.count() == 0 || !max_key_ || leaf.keys()[leaf.count() - 1] != *max_key_) fail("stale maximum key", rightmost_leaf_);
  }
}

void
BPlusTree::load_existing()
{
  root_ = store_.root();
  stats_ = TreeStats{};
  std::vector<std::pair<PageId, std::size_t>> stack{{root_, 1}};
  while (!stack.empty()) {
    const auto [id, depth] = stack.back();
    stack.pop_back();
    PageGuard g{store_, id, false};
    NodeRef node{g.data(), internal_cap_};
    if (node.is_leaf()) {
      ++stats_.leaf_nodes;
      stats_.entry_count += node.count();
      stats_.height = std::max<std::uint64_t>(stats_.height, depth);
      continue;
    }
    ++stats_.internal_nodes;
    for (std::size_t i = 0; i <= node.count(); ++i) stack.emplace_back(node.slots()[i], depth + 1);
  }

  PageId id = root_;
  for (;;) {
    PageGuard g{store_, id, false};
    NodeRef node{g.data(), internal_cap_};
    if (node.is_leaf()) {
      NodeRef leaf{g.data(), leaf_cap_};
      if (leaf.count() > 0) max_key_ = leaf.keys()[leaf.count() - 1];
      break;
    }
    id = node.slots()[node.count()];
  }
  rightmost_leaf_ = id;
}

}  // namespace osm
