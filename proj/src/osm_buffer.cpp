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

#include "osm/osm_buffer.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>

#include "osm/hash.hpp"

namespace osm
{

void
BufferConfig::validate() const
{
  if (capacity_entries < 2) throw std::invalid_argument("buffer capacity must be at least 2 entries");
  if (page_entries == 0) throw std::invalid_argument("buffer page must hold at least one entry");
  if (!(flush_fraction > 0.0 && flush_fraction < 1.0)) throw std::invalid_argument("flush fraction must lie in (0, 1)");
  if (!(unsorted_threshold_fraction > 0.0 && unsorted_threshold_fraction <= 1.0))
    throw std::invalid_argument("unsorted threshold must lie in (0, 1]");
  if (!(bloom_bits_per_entry > 0.0)) throw std::invalid_argument("bloom bits per entry must be positive");
}

std::size_t
BufferConfig::flush_entries() const noexcept
{
  const auto h = static_cast<std::size_t>(std::floor(flush_fraction * static_cast<double>(capacity_entries)));
  return std::max<std::size_t>(1, h);
}

std::size_t
BufferConfig::sort_threshold_entries() const noexcept
{
  const auto t = static_cast<std::size_t>(std::floor(unsorted_threshold_fraction * static_cast<double>(capacity_entries)));
  return std::max<std::size_t>(1, t);
}

std::size_t
BufferConfig::page_count() const noexcept
{
  return (capacity_entries + page_entries - 1) / page_entries;
}

std::optional<std::size_t>
interpolation_search(std::span<const Entry> sorted, Key key, std::uint64_t *probes)
{
  if (sorted.empty()) return std::nullopt;
  std::uint64_t local = 0;
  auto &count = probes != nullptr ? *probes : local;

  const auto budget = 2 * static_cast<std::uint64_t>(std::bit_width(sorted.size()));
  std::size_t lo = 0;
  std::size_t hi = sorted.size() - 1;
  std::uint64_t used = 0;

  auto last_match = [&](std::size_t pos) {
    const auto first = sorted.begin() + static_cast<std::ptrdiff_t>(pos);
    const auto end = sorted.begin() + static_cast<std::ptrdiff_t>(hi) + 1;
    const auto it = std::upper_bound(first, end, key, [](Key k, const Entry &e) { return k < e.key; });
    return static_cast<std::size_t>(it - sorted.begin()) - 1;
  };

  while (lo <= hi) {
    const Key klo = sorted[lo].key;
    const Key khi = sorted[hi].key;
    if (key < klo || key > khi) return std::nullopt;
    if (klo == khi) return hi;
    if (used >= budget) break;

    const auto offset = static_cast<std::size_t>(mul_div(key - klo, hi - lo, khi - klo));
    const auto pos = lo + offset;
    ++used;
    ++count;
    const Key k = sorted[pos].key;
    if (k < key) {
      lo = pos + 1;
    } else if (k > key) {
      if (pos == 0) return std::nullopt;
      hi = pos - 1;
    } else {
      return last_match(pos);
    }
  }
  if (lo > hi) return std::nullopt;

  // Skewed keys: binary search what is left.
  count += static_cast<std::uint64_t>(std::bit_width(hi - lo + 1));
  const auto first = sorted.begin() + static_cast<std::ptrdiff_t>(lo);
  const auto end = sorted.begin() + static_cast<std::ptrdiff_t>(hi) + 1;
  const auto it = std::upper_bound(first, end, key, [](Key k, const Entry &e) { return k < e.key; });
  if (it == first || (it - 1)->key != key) return std::nullopt;
  return static_cast<std::size_t>(it - sorted.begin()) - 1;
}

OsmBuffer::OsmBuffer(BufferConfig config) : config_{config}
{
  config_.validate();
  const auto pages = config_.page_count();
  data_.reserve(config_.capacity_entries);
  page_zonemaps_.resize(pages);
  if (config_.use_page_blooms) {
    page_blooms_.reserve(pages);
    for (std::size_t p = 0; p < pages; ++p) {
      page_blooms_.emplace_back(config_.page_entries, config_.bloom_bits_per_entry, 0x5a5a0000ULL + p);
    }
  }
  if (config_.use_global_bloom) {
    // Before the first flush the tail can span the whole buffer.
    global_bloom_ = BloomFilter{config_.capacity_entries, config_.bloom_bits_per_entry, 0xa5a5a5a5ULL};
  }
  const auto cap = std::ceil(2.0 * kAdaptiveMaxL * static_cast<double>(pages));
  l_cap_ = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(cap));
}

bool
OsmBuffer::insert(const Entry &entry)
{
  if (full()) throw BufferFullError("insert into a full buffer; flush first");

  const auto pos = data_.size();
  const auto page = page_of(pos);
  const bool descent = pos > 0 && entry_less(entry, data_[pos - 1]);
  data_.push_back(entry);
  ++stats_.inserts;
  ++appends_since_flush_;

  page_zonemaps_[page].update(entry.key);
  buffer_zonemap_.update(entry.key);

  if (sorted_boundary_ == pos && !descent) {
    // Still one sorted run from the start: the sorted section grows.
    ++sorted_boundary_;
    ++tail_begin_;
  } else {
    if (config_.use_global_bloom) global_bloom_.insert(entry.key);
    if (config_.use_page_blooms) page_blooms_[page].insert(entry.key);
  }

  if (descent) {
    ++k_counter_;
    if (l_counter_ < l_cap_) {
      // Pages reached going backwards while the zone still holds larger keys.
      std::uint64_t reach = 0;
      for (std::size_t p = page;; --p) {
        if (reach >= l_cap_ || page_zonemaps_[p].max() <= entry.key) break;
        ++reach;
        if (p == 0) break;
      }
      l_counter_ = std::max(l_counter_, reach);
    }
  }

  if (sorted_prefix_ == pos && !descent) {
    ++sorted_prefix_;
  } else if (sorted_prefix_ > 0 && entry_less(entry, data_[sorted_prefix_ - 1])) {
    const auto begin = data_.begin();
    const auto it = std::upper_bound(begin, begin + static_cast<std::ptrdiff_t>(sorted_prefix_), entry, EntryLess{});
    sorted_prefix_ = static_cast<std::size_t>(it - begin);
  }

  return full();
}

std::size_t
OsmBuffer::sorted_zone_pages() const noexcept
{
  if (sorted_prefix_ == data_.size()) return (data_.size() + config_.page_entries - 1) / config_.page_entries;
  return sorted_prefix_ / config_.page_entries;
}

std::optional<std::size_t>
OsmBuffer::last_sorted_zone() const noexcept
{
  const auto z = sorted_zone_pages();
  if (z == 0) return std::nullopt;
  return z - 1;
}

double
OsmBuffer::k_estimate() const noexcept
{
  if (appends_since_flush_ == 0) return 0.0;
  return static_cast<double>(k_counter_) / static_cast<double>(appends_since_flush_);
}

double
OsmBuffer::l_estimate() const noexcept
{
  return std::min(1.0, static_cast<double>(l_counter_) / static_cast<double>(config_.page_count()));
}

std::size_t
OsmBuffer::sorted_run_count() const noexcept
{
  return (sorted_boundary_ > 0 ? 1 : 0) + components_.size();
}

SortStats
OsmBuffer::timed_sort(std::span<Entry> range)
{
  const auto start = std::chrono::steady_clock::now();
  auto stats = sort_entries(range, k_estimate(), l_estimate());
  stats_.sort_ns += static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count());
  ++(stats.algorithm_used == SortAlgorithm::Adaptive ? stats_.sorts_adaptive : stats_.sorts_merge);
  return stats;
}

FlushPlan
OsmBuffer::plan_flush()
{
  FlushPlan plan;
  const auto s = data_.size();
  if (s == 0) return plan;

  const auto half = std::min(config_.flush_entries(), s);
  const auto zone_entries = std::min(sorted_zone_pages() * config_.page_entries, s);
  std::size_t flush_n;
  bool whole_sorted = sorted_prefix_ == s;

  if (zone_entries >= half) {
    flush_n = half;
    plan.pre_sorted = true;
  } else if (zone_entries > 0) {
    flush_n = zone_entries;
    plan.pre_sorted = true;
  } else {
    plan.flush_sort = timed_sort(data_);
    whole_sorted = true;
    flush_n = half;
  }

  plan.entries.assign(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(flush_n));
  data_.erase(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(flush_n));
  if (!whole_sorted && !data_.empty()) plan.remainder_sort = timed_sort(data_);

  for (std::size_t i = 0; i < plan.entries.size();) {
    std::size_t j = i + 1;
    while (j < plan.entries.size() && plan.entries[j].key > plan.entries[j - 1].key) ++j;
    plan.runs.emplace_back(i, j);
    i = j;
  }

  sorted_boundary_ = tail_begin_ = sorted_prefix_ = data_.size();
  components_.clear();
  k_counter_ = l_counter_ = appends_since_flush_ = 0;
  rebuild_page_metadata();
  rebuild_global_bloom();
  ++stats_.flushes;
  return plan;
}

void
OsmBuffer::rebuild_page_metadata()
{
  for (auto &zm : page_zonemaps_) zm.reset();
  for (auto &bf : page_blooms_) bf.clear();
  buffer_zonemap_.reset();
  for (std::size_t i = 0; i < data_.size(); ++i) {
    page_zonemaps_[page_of(i)].update(data_[i].key);
    buffer_zonemap_.update(data_[i].key);
  }
  if (config_.use_page_blooms) {
    for (std::size_t i = tail_begin_; i < data_.size(); ++i) page_blooms_[page_of(i)].insert(data_[i].key);
  }
}

void
OsmBuffer::rebuild_global_bloom()
{
  if (!config_.use_global_bloom) return;
  global_bloom_.clear();
  for (std::size_t i = tail_begin_; i < data_.size(); ++i) global_bloom_.insert(data_[i].key);
}

void
OsmBuffer::recompute_sorted_prefix() noexcept
{
  const auto s = data_.size();
  std::size_t run = s == 0 ? 0 : 1;
  while (run < s && !entry_less(data_[run], data_[run - 1])) ++run;
  if (run == s) {
    sorted_prefix_ = s;
    return;
  }
  // Largest p <= run with data[p-1] <= min(data[p..s)).
  Entry suffix_min = data_[run];
  for (std::size_t i = run + 1; i < s; ++i) {
    if (entry_less(data_[i], suffix_min)) suffix_min = data_[i];
  }
  std::size_t p = run;
  while (p > 0 && entry_less(suffix_min, data_[p - 1])) {
    if (entry_less(data_[p - 1], suffix_min)) suffix_min = data_[p - 1];
    --p;
  }
  sorted_prefix_ = p;
}

bool
OsmBuffer::maybe_query_driven_sort()
{
  if (!config_.query_driven_sorting) return false;
  const auto threshold = config_.sort_threshold_entries();
  if (tail_size() < threshold) return false;

  const auto begin = tail_begin_;
  const auto end = begin + threshold;
  std::span<Entry> slice{data_.data() + begin, threshold};
  timed_sort(slice);
  components_.push_back(SortedComponent{begin, end, Zonemap::of(slice)});
  tail_begin_ = end;
  ++stats_.components_created;

  rebuild_global_bloom();
  recompute_sorted_prefix();
  return true;
}

std::optional<BufferHit>
OsmBuffer::point_query(Key key)
{
  ++stats_.point_queries;
  if (!buffer_zonemap_.overlaps(key)) {
    ++stats_.buffer_zonemap_skips;
    return std::nullopt;
  }

  const auto s = data_.size();
  if (tail_begin_ < s) {
    bool candidate = true;
    if (config_.use_global_bloom) {
      ++stats_.global_bf_probes;
      candidate = global_bloom_.contains(key);
      if (candidate) ++stats_.global_bf_positives;
    }
    if (candidate) {
      const auto first_page = page_of(tail_begin_);
      for (std::size_t p = page_of(s - 1) + 1; p-- > first_page;) {
        if (!page_zonemaps_[p].overlaps(key)) {
          ++stats_.page_zonemap_skips;
          continue;
        }
        if (config_.use_page_blooms) {
          ++stats_.page_bf_probes;
          if (!page_blooms_[p].contains(key)) continue;
          ++stats_.page_bf_positives;
        }
        ++stats_.pages_scanned;
        const auto lo = std::max(p * config_.page_entries, tail_begin_);
        const auto hi = std::min((p + 1) * config_.page_entries, s);
        for (std::size_t i = hi; i-- > lo;) {
          if (data_[i].key == key) {
            ++stats_.hits_tail;
            return BufferHit{data_[i].value, BufferSection::Tail};
          }
        }
      }
    }
  }

  for (auto it = components_.rbegin(); it != components_.rend(); ++it) {
    if (!it->zonemap.overlaps(key)) continue;
    std::span<const Entry> slice{data_.data() + it->begin, it->size()};
    if (auto pos = interpolation_search(slice, key, &stats_.interpolation_probes)) {
      ++stats_.hits_component;
      return BufferHit{slice[*pos].value, BufferSection::Component};
    }
  }

  if (sorted_boundary_ > 0) {
    std::span<const Entry> slice{data_.data(), sorted_boundary_};
    if (auto pos = interpolation_search(slice, key, &stats_.interpolation_probes)) {
      ++stats_.hits_sorted;
      return BufferHit{slice[*pos].value, BufferSection::Sorted};
    }
  }
  return std::nullopt;
}

std::vector<Entry>
OsmBuffer::range_query(Key lo, Key hi) const
{
  std::vector<Entry> hits;
  if (lo > hi || !buffer_zonemap_.overlaps_range(lo, hi)) return hits;

  auto take_sorted = [&](std::size_t begin, std::size_t end) {
    const auto first = data_.begin() + static_cast<std::ptrdiff_t>(begin);
    const auto last = data_.begin() + static_cast<std::ptrdiff_t>(end);
    auto it = std::lower_bound(first, last, lo, [](const Entry &e, Key k) { return e.key < k; });
    for (; it != last && it->key <= hi; ++it) hits.push_back(*it);
  };

  take_sorted(0, sorted_boundary_);
  for (const auto &c : components_) {
    if (c.zonemap.overlaps_range(lo, hi)) take_sorted(c.begin, c.end);
  }
  const auto s = data_.size();
  if (tail_begin_ < s) {
    for (std::size_t p = page_of(tail_begin_); p <= page_of(s - 1); ++p) {
      if (!page_zonemaps_[p].overlaps_range(lo, hi)) continue;
      const auto begin = std::max(p * config_.page_entries, tail_begin_);
      const auto end = std::min((p + 1) * config_.page_entries, s);
      for (std::size_t i = begin; i < end; ++i) {
        if (data_[i].key >= lo && data_[i].key <= hi) hits.push_back(data_[i]);
      }
    }
  }

  std::sort(hits.begin(), hits.end(), EntryLess{});
  std::vector<Entry> out;
  out.reserve(hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (i + 1 < hits.size() && hits[i + 1].key == hits[i].key) continue;
    out.push_back(hits[i]);
  }
  return out;
}

void
OsmBuffer::reset_query_stats() noexcept
{
  const auto keep = stats_;
  stats_ = BufferStats{};
  stats_.inserts = keep.inserts;
  stats_.flushes = keep.flushes;
  stats_.sorts_adaptive = keep.sorts_adaptive;
  stats_.sorts_merge = keep.sorts_merge;
  stats_.sort_ns = keep.sort_ns;
  stats_.components_created = keep.components_created;
}

}  // namespace osm
