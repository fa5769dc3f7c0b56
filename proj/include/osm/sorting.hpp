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

#ifndef OSM_SORTING_HPP
#define OSM_SORTING_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "osm/entry.hpp"

namespace osm
{

enum class SortAlgorithm { Adaptive, MergeStable };

const char *to_string(SortAlgorithm algo) noexcept;

struct SortStats {
  SortAlgorithm algorithm_used{SortAlgorithm::MergeStable};
  std::uint64_t comparisons{0};
  std::uint64_t straggler_count{0};
  double k_estimate{0.0};
  double l_estimate{0.0};
};

/// Selection thresholds: adaptive sorting when K < 10% or L < 5% of the buffer.
inline constexpr double kAdaptiveMaxK = 0.10;
inline constexpr double kAdaptiveMaxL = 0.05;

/// Stable merge sort by (key, seq), in place.
SortStats stable_sort(std::span<Entry> entries);

/**
 * (K,L)-adaptive sort by (key, seq), in place.
 *
 * Pass one is replacement selection through a min-heap of `window` entries;
 * inputs smaller than the last emitted entry are set aside as stragglers.
 * Pass two sorts the stragglers and merges them with the pass-one run. The
 * result equals stable_sort() whenever (key, seq) pairs are distinct; disorder
 * beyond the window only costs work.
 */
SortStats adaptive_kl_sort(std::span<Entry> entries, std::size_t window);

SortAlgorithm choose_sort(double k_estimate, double l_estimate) noexcept;

/// Heap window used for a buffer of `occupancy` entries: floor(l * occupancy) + 1, capped.
std::size_t adaptive_window(double l_estimate, std::size_t occupancy) noexcept;

/// choose_sort() then run the chosen algorithm.
SortStats sort_entries(std::span<Entry> entries, double k_estimate, double l_estimate);

}  // namespace osm

#endif  // OSM_SORTING_HPP
