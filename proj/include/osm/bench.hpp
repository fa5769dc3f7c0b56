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


#ifndef OSM_BENCH_HPP
#define OSM_BENCH_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "osm/osm_tree.hpp"
#include "osm/pager.hpp"
#include "osm/workload.hpp"

namespace osm::bench
{

enum class Mode { Ingest, Reads, Mixed, Scan };
enum class IndexKind { BPlusBaseline, Osm, OsmNoBF, OsmGlobalBFOnly };

const char *to_string(Mode mode) noexcept;
const char *to_string(IndexKind kind) noexcept;
Mode parse_mode(const std::string &text);
IndexKind parse_index(const std::string &text);

struct BenchSpec {
  /// Read the stream from here instead of generating it from `workload`.
  std::optional<std::filesystem::path> workload_path;
  WorkloadSpec workload{1'000'000, 0.0, 0.0, 1};
  Mode mode{Mode::Ingest};
  /// Reads / (reads + writes) in the timed phase of Mixed mode.
  double read_write_ratio{0.5};
  /// Share of the stream ingested untimed before Mixed mode starts.
  double preload_fraction{0.80};
  std::uint64_t lookup_count{100'000};
  std::vector<double> scan_selectivities{0.0001, 0.01};
  std::uint64_t scans_per_selectivity{100};
  IndexKind index{IndexKind::Osm};
  PageStoreConfig store;
  /// Buffer capacity; defaults to 1% of n.
  std::optional<std::size_t> buffer_entries;
  std::optional<double> flush_fraction;
  std::optional<double> qsort_threshold;
  std::uint32_t repetitions{1};
  /// Seed for lookup keys, interleaving and scan ranges; independent of the stream seed.
  std::uint64_t query_seed{0x9e3779b9};
  bool collect_timings{false};

  void validate() const;
  /// Buffer configuration the OSM variants use.
  BufferConfig buffer_config(std::uint64_t n) const;
};

struct BenchResult {
  std::string run_id;
  BenchSpec spec;
  std::uint64_t n{0};
  /// Operations in the timed phase.
  std::uint64_t ops{0};
  /// Median over repetitions.
  std::uint64_t total_ns{0};
  std::uint64_t min_total_ns{0};
  double mean_ns_per_op{0.0};
  TimeBreakdown breakdown;

  double bulk_frac{0.0};
  double top_frac{0.0};
  std::uint64_t node_count_internal{0};
  std::uint64_t node_count_leaf{0};
  std::uint64_t sorts_adaptive{0};
  std::uint64_t sorts_merge{0};
  /// Read-side counters cover only the timed phase.
  std::uint64_t pages_scanned{0};
  std::uint64_t bf_probes{0};
  std::uint64_t bf_positives{0};
  std::uint64_t physical_reads{0};
  std::uint64_t logical_reads{0};
  /// Sum of read results; keeps the reads observable.
  std::uint64_t checksum{0};
  /// latency(baseline) / latency(this), when a baseline was run alongside.
  std::optional<double> speedup;
};

/// The stream a spec describes, read or generated. A file's header replaces spec.workload.
std::vector<Entry> load_stream(BenchSpec &spec);

/// Run one spec on a stream from load_stream(spec).
BenchResult run(const BenchSpec &spec, const std::vector<Entry> &stream);
BenchResult run(const BenchSpec &spec);

/// Run `spec` for `spec.index` and for the baseline on the same stream; fills speedup.
std::pair<BenchResult, BenchResult> run_against_baseline(const BenchSpec &spec);

struct GridCell {
  double k{0.0};
  double l{0.0};
  BenchResult osm;
  BenchResult baseline;
};

/// One Osm-vs-baseline run per (k, l). k = 0 cells use l = 0 (the fully sorted stream).
std::vector<GridCell> grid(const BenchSpec &templ, const std::vector<double> &ks, const std::vector<double> &ls);

/// Speedup matrix with K down the rows and L across the columns.
void write_grid_matrix(std::ostream &os, const std::vector<GridCell> &cells, const std::vector<double> &ks,
                       const std::vector<double> &ls);

/// Osm, OsmGlobalBFOnly and OsmNoBF on one stream, each in Ingest and in `spec.mode` (Reads when Ingest).
std::vector<BenchResult> ablate_bloom(const BenchSpec &spec);

/// Column names in CSV order.
const std::vector<std::string> &csv_columns();
/// FNV-1a over the comma-joined column names.
std::uint64_t csv_schema_hash();
std::string csv_schema_line();
std::string csv_row(const BenchResult &r);

/// Append rows to `path`, writing the schema and header lines when the file is new.
/// Throws std::runtime_error when an existing file carries a different schema.
void append_csv(const std::filesystem::path &path, const std::vector<BenchResult> &rows);

/// OSM_CSV_DIR when set, else `fallback`.
std::filesystem::path csv_directory(const std::filesystem::path &fallback);

}  // namespace osm::bench

#endif  // OSM_BENCH_HPP
