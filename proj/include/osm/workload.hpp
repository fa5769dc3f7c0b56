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

#ifndef OSM_WORKLOAD_HPP
#define OSM_WORKLOAD_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "osm/entry.hpp"

namespace osm
{

/// Thrown for malformed or unreadable workload files.
class WorkloadFormatError : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Parameters of a (K,L)-near-sorted stream.
 *
 * `k_pct` is the fraction of entries that end up away from their sorted rank
 * and `l_pct` bounds every displacement to floor(l_pct * n) positions.
 */
struct WorkloadSpec {
  std::uint64_t n{0};
  double k_pct{0.0};
  double l_pct{0.0};
  std::uint64_t seed{0};
  std::uint32_t payload_bytes{4};
  std::uint32_t key_width_bytes{4};

  /// Throws std::invalid_argument when the spec cannot be generated.
  void validate() const;

  /// floor(l_pct * n), the maximum displacement in positions.
  std::uint64_t window() const noexcept;

  /// floor(k_pct * n / 2), the number of swapped position pairs.
  std::uint64_t pair_count() const noexcept;

  friend bool operator==(const WorkloadSpec &, const WorkloadSpec &) = default;
};

struct SortednessReport {
  double k_measured{0.0};
  double l_measured{0.0};
  std::uint64_t displaced{0};
  std::uint64_t max_displacement{0};
  std::uint64_t inversions{0};
  std::uint64_t runs{0};
};

struct Workload {
  WorkloadSpec spec;
  std::vector<Entry> entries;
};

/**
 * Generate the stream described by `spec`.
 *
 * Keys are the identity sequence 0..n-1. Exactly pair_count() disjoint
 * position pairs (i, j) with 1 <= |i - j| <= window() are drawn by rejection
 * sampling and swapped, so exactly 2 * pair_count() entries are displaced and
 * none moves further than the window. Entry seq is the stream position.
 */
std::vector<Entry> generate(const WorkloadSpec &spec);

/// Measure (K,L) sortedness against the stable (key, seq) order of the stream.
SortednessReport measure_sortedness(std::span<const Entry> stream);

void write_workload(const std::filesystem::path &path,
                    const WorkloadSpec &spec,
                    std::span<const Entry> entries);

/// Entries read back get seq equal to their file position.
Workload read_workload(const std::filesystem::path &path);

}  // namespace osm

#endif  // OSM_WORKLOAD_HPP
