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

#include "osm/sorting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace osm
{
namespace
{

struct CountingLess {
  std::uint64_t *count;

  bool
  operator()(const Entry &a, const Entry &b) const noexcept
  {
    ++*count;
    return entry_less(a, b);
  }
};

struct CountingGreater {
  std::uint64_t *count;

  bool
  operator()(const Entry &a, const Entry &b) const noexcept
  {
    ++*count;
    return entry_less(b, a);
  }
};

}  // namespace

const char *
to_string(SortAlgorithm algo) noexcept
{
  return algo == SortAlgorithm::Adaptive ? "adaptive" : "merge";
}

SortStats
stable_sort(std::span<Entry> entries)
{
  SortStats stats;
  stats.algorithm_used = SortAlgorithm::MergeStable;
  std::stable_sort(entries.begin(), entries.end(), CountingLess{&stats.comparisons});
  return stats;
}

SortStats
adaptive_kl_sort(std::span<Entry> entries, std::size_t window)
{
  if (window == 0) throw std::invalid_argument("adaptive_kl_sort: window must be >= 1");

  SortStats stats;
  stats.algorithm_used = SortAlgorithm::Adaptive;
  if (entries.size() < 2) return stats;

  CountingGreater heap_cmp{&stats.comparisons};
  CountingLess less{&stats.comparisons};

  // The pass-one run is written back in place: an entry is emitted only after
  // it was read, so the write cursor never overtakes the read cursor.
  std::vector<Entry> heap;
  heap.reserve(std::min(window, entries.size()));
  std::vector<Entry> stragglers;
  std::size_t run_len = 0;

  auto emit = [&] {
    std::pop_heap(heap.begin(), heap.end(), heap_cmp);
    entries[run_len++] = heap.back();
    heap.pop_back();
  };

  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Entry e = entries[i];
    if (run_len > 0 && less(e, entries[run_len - 1])) {
      stragglers.push_back(e);
      continue;
    }
    heap.push_back(e);
    std::push_heap(heap.begin(), heap.end(), heap_cmp);
    if (heap.size() >= window) emit();
  }
  while (!heap.empty()) emit();

  stats.straggler_count = stragglers.size();
  if (stragglers.empty()) return stats;

  std::stable_sort(stragglers.begin(), stragglers.end(), less);

  // Merge from the back so the run can stay where it is.
  auto out = entries.size();
  auto r = run_len;
  auto s = stragglers.size();
  while (s > 0) {
    if (r > 0 && less(stragglers[s - 1], entries[r - 1])) {
      entries[--out] = entries[--r];
    } else {
      entries[--out] = stragglers[--s];
    }
  }
  return stats;
}

SortAlgorithm
choose_sort(double k_estimate, double l_estimate) noexcept
{
  return (k_estimate < kAdaptiveMaxK || l_estimate < kAdaptiveMaxL) ? SortAlgorithm::Adaptive
                                                                    : SortAlgorithm::MergeStable;
}

std::size_t
adaptive_window(double l_estimate, std::size_t occupancy) noexcept
{
  const auto scaled = static_cast<std::size_t>(std::floor(std::max(0.0, l_estimate) * static_cast<double>(occupancy)));
  return std::max<std::size_t>(1, std::min(scaled + 1, occupancy));
}

SortStats
sort_entries(std::span<Entry> entries, double k_estimate, double l_estimate)
{
  SortStats stats = choose_sort(k_estimate, l_estimate) == SortAlgorithm::Adaptive
                        ? adaptive_kl_sort(entries, adaptive_window(l_estimate, entries.size()))
                        : stable_sort(entries);
  stats.k_estimate = k_estimate;
  stats.l_estimate = l_estimate;
  return stats;
}

}  // namespace osm
