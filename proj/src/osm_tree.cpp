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

#include "osm/osm_tree.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace osm
{
namespace
{

using Clock = std::chrono::steady_clock;

std::uint64_t
elapsed_ns(Clock::time_point start) noexcept
{
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count());
}

}  // namespace

void
OsmConfig::validate() const
{
  buffer.validate();
  tree.validate();
  store.validate();
}

BufferBound
buffer_size_bound(double delta, double pages_in_tree, double fanout, double fpr_global, double fpr_page, double v)
{
  if (!(pages_in_tree > 1.0) || !(fanout > 1.0)) throw std::invalid_argument("need more than one tree page and fanout above 1");
  if (!(fpr_global >= 0.0 && fpr_global <= 1.0) || !(fpr_page >= 0.0 && fpr_page <= 1.0))
    throw std::invalid_argument("false positive rates must lie in [0, 1]");
  if (!(v >= 0.0) || std::isnan(delta)) throw std::invalid_argument("v must be non-negative and delta a number");

  BufferBound out;
  out.log_b_nb = std::log(pages_in_tree) / std::log(fanout);
  const double threshold = 1.0 / out.log_b_nb;
  out.min_delta = std::nextafter(threshold, std::numeric_limits<double>::infinity());
  out.feasible = delta > threshold;
  if (!out.feasible) {
    out.max_fraction = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const double num = 2.0 * (delta * out.log_b_nb - 1.0);
  const double den = v + fpr_global * fpr_page * pages_in_tree - 1.0 - 2.0 * out.log_b_nb;
  // A non-positive denominator makes the constraint hold for every p.
  out.max_fraction = den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
  return out;
}

OsmTree::OsmTree(OsmConfig config) : config_{std::move(config)}
{
  config_.validate();
  store_ = open_page_store(config_.store);
  tree_ = std::make_unique<BPlusTree>(*store_, config_.tree);
  buffer_ = std::make_unique<OsmBuffer>(config_.buffer);
  if (auto lo = tree_->min_key()) tree_zonemap_.update(*lo);
  if (auto hi = tree_->max_key()) tree_zonemap_.update(*hi);
}

void
OsmTree::put(Key key, Value value)
{
  ++stats_.entries_ingested;
  bool full;
  if (config_.collect_timings) {
    const auto start = Clock::now();
    full = buffer_->insert(Entry{key, value, next_seq_++});
    stats_.time.buffer_ns += elapsed_ns(start);
  } else {
    full = buffer_->insert(Entry{key, value, next_seq_++});
  }
  if (full) flush();
}

void
OsmTree::flush()
{
  if (buffer_->empty()) return;
  const auto sort_before = buffer_->stats().sort_ns;
  const auto start = Clock::now();
  auto plan = buffer_->plan_flush();
  const auto sort_ns = buffer_->stats().sort_ns - sort_before;
  const auto total = elapsed_ns(start);
  stats_.time.sort_ns += sort_ns;
  stats_.time.metadata_ns += total - std::min(total, sort_ns);
  flush_into_tree(std::move(plan));
}

void
OsmTree::drain()
{
  while (!buffer_->empty()) flush();
}

void
OsmTree::flush_into_tree(FlushPlan plan)
{
  ++stats_.flush_cycles;
  if (plan.pre_sorted) ++stats_.pre_sorted_flushes;
  auto &batch = plan.entries;
  stats_.entries_flushed += batch.size();

  // Ordered by (key, seq): the last entry of each key is its newest version.
  std::size_t kept = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (i + 1 < batch.size() && batch[i + 1].key == batch[i].key) continue;
    batch[kept++] = batch[i];
  }
  stats_.entries_superseded += batch.size() - kept;
  batch.resize(kept);
  if (batch.empty()) return;

  const auto chunk = config_.buffer.page_entries;
  const auto fast_before = tree_->stats().fast_path_inserted;
  std::size_t i = 0;
  while (i < batch.size()) {
    const auto tree_max = tree_->max_key();
    if (!tree_max || batch[i].key > *tree_max) {
      // Keys are strictly ascending, so everything left lies above the tree.
      const auto start = Clock::now();
      tree_->bulk_load_run(std::span<const Entry>{batch}.subspan(i));
      stats_.time.bulk_load_ns += elapsed_ns(start);
      stats_.bulk_loaded_entries += batch.size() - i;
      break;
    }
    // Top-insert up to a page worth of overlapping entries, then re-check.
    const auto start = Clock::now();
    const auto end = std::min(batch.size(), i + chunk);
    for (; i < end && batch[i].key <= *tree_max; ++i) {
      if (!tree_->fast_path_insert(batch[i].key, batch[i].value)) tree_->top_insert(batch[i].key, batch[i].value);
      ++stats_.top_inserted_entries;
    }
    stats_.time.top_insert_ns += elapsed_ns(start);
  }
  stats_.fast_path_entries += tree_->stats().fast_path_inserted - fast_before;

  tree_zonemap_.update(batch.front().key);
  tree_zonemap_.update(batch.back().key);
}

std::optional<Value>
OsmTree::get(Key key)
{
  ++stats_.gets;
  std::optional<BufferHit> hit;
  if (config_.collect_timings) {
    const auto start = Clock::now();
    const auto sort_before = buffer_->stats().sort_ns;
    buffer_->maybe_query_driven_sort();
    const auto sort_ns = buffer_->stats().sort_ns - sort_before;
    hit = buffer_->point_query(key);
    const auto total = elapsed_ns(start);
    stats_.time.sort_ns += sort_ns;
    stats_.time.buffer_ns += total - std::min(total, sort_ns);
  } else {
    buffer_->maybe_query_driven_sort();
    hit = buffer_->point_query(key);
  }
  if (hit) {
    ++stats_.buffer_hits;
    return hit->value;
  }
  if (!tree_zonemap_.overlaps(key)) {
    ++stats_.tree_zonemap_skips;
    ++stats_.misses;
    return std::nullopt;
  }

  std::optional<Value> found;
  if (config_.collect_timings) {
    const auto start = Clock::now();
    found = tree_->search(key);
    stats_.time.tree_search_ns += elapsed_ns(start);
  } else {
    found = tree_->search(key);
  }
  ++(found ? stats_.tree_hits : stats_.misses);
  return found;
}

std::vector<Entry>
OsmTree::scan(Key lo, Key hi)
{
  ++stats_.scans;
  std::vector<Entry> out;
  if (lo > hi) return out;
  buffer_->maybe_query_driven_sort();
  const auto from_buffer = buffer_->range_query(lo, hi);
  std::vector<Entry> from_tree;
  if (tree_zonemap_.overlaps_range(lo, hi)) from_tree = tree_->scan(lo, hi);

  out.reserve(from_buffer.size() + from_tree.size());
  auto b = from_buffer.begin();
  auto t = from_tree.begin();
  while (b != from_buffer.end() || t != from_tree.end()) {
    if (t == from_tree.end() || (b != from_buffer.end() && b->key <= t->key)) {
      if (t != from_tree.end() && t->key == b->key) ++t;
      out.push_back(*b++);
    } else {
      out.push_back(*t++);
    }
  }
  return out;
}

std::map<std::string, double>
OsmTree::stats_map() const
{
  const auto &t = tree_->stats();
  const auto &b = buffer_->stats();
  const auto &p = store_->stats();
  const auto d = [](std::uint64_t v) { return static_cast<double>(v); };
  return {
      {"entries_ingested", d(stats_.entries_ingested)},
      {"entries_flushed", d(stats_.entries_flushed)},
      {"entries_superseded", d(stats_.entries_superseded)},
      {"bulk_loaded_entries", d(stats_.bulk_loaded_entries)},
      {"top_inserted_entries", d(stats_.top_inserted_entries)},
      {"fast_path_entries", d(stats_.fast_path_entries)},
      {"flush_cycles", d(stats_.flush_cycles)},
      {"pre_sorted_flushes", d(stats_.pre_sorted_flushes)},
      {"gets", d(stats_.gets)},
      {"scans", d(stats_.scans)},
      {"buffer_hits", d(stats_.buffer_hits)},
      {"tree_hits", d(stats_.tree_hits)},
      {"tree_zonemap_skips", d(stats_.tree_zonemap_skips)},
      {"misses", d(stats_.misses)},
      {"buffer_occupancy", d(buffer_->size())},
      {"buffer_components", d(buffer_->components().size())},
      {"sorts_adaptive", d(b.sorts_adaptive)},
      {"sorts_merge", d(b.sorts_merge)},
      {"pages_scanned", d(b.pages_scanned)},
      {"bf_probes", d(b.bf_probes())},
      {"bf_positives", d(b.bf_positives())},
      {"interpolation_probes", d(b.interpolation_probes)},
      {"tree_entries", d(t.entry_count)},
      {"tree_height", d(t.height)},
      {"node_count_internal", d(t.internal_nodes)},
      {"node_count_leaf", d(t.leaf_nodes)},
      {"leaf_splits", d(t.splits)},
      {"logical_reads", d(p.logical_reads)},
      {"physical_reads", d(p.physical_reads)},
      {"physical_writes", d(p.physical_writes)},
      {"time_buffer_ns", d(stats_.time.buffer_ns)},
      {"time_sort_ns", d(stats_.time.sort_ns)},
      {"time_bulk_load_ns", d(stats_.time.bulk_load_ns)},
      {"time_top_insert_ns", d(stats_.time.top_insert_ns)},
      {"time_tree_search_ns", d(stats_.time.tree_search_ns)},
      {"time_metadata_ns", d(stats_.time.metadata_ns)},
  };
}

void
OsmTree::reset_query_stats()
{
  stats_.gets = stats_.scans = stats_.buffer_hits = stats_.tree_hits = 0;
  stats_.tree_zonemap_skips = stats_.misses = 0;
  stats_.time.tree_search_ns = 0;
  buffer_->reset_query_stats();
  store_->reset_stats();
}

}  // namespace osm
