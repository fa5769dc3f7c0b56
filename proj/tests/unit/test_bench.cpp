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

#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "osm/bench.hpp"

namespace osm::bench
{
namespace
{

BenchSpec
small_spec(Mode mode, IndexKind index, double k = 0.05, double l = 0.05, std::uint64_t n = 20'000)
{
  BenchSpec s;
  s.workload = WorkloadSpec{n, k, l, 7};
  s.mode = mode;
  s.index = index;
  s.lookup_count = 5'000;
  s.scans_per_selectivity = 20;
  return s;
}

std::filesystem::path
scratch_dir(const char *name)
{
  auto dir = std::filesystem::temp_directory_path() / (std::string{"osm_bench_test_"} + name + "_" +
                                                       std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Reference FNV-1a written independently of the library hash.
std::uint64_t
reference_fnv1a(const std::string &text)
{
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

TEST(BenchCsv, ColumnsMatchInterfaceOrder)
{
  const std::vector<std::string> expected{
      "run_id",          "index",          "mode",           "n",           "k",
      "l",               "seed",           "ratio",          "buffer_entries", "flush_fraction",
      "qsort_threshold", "total_ns",       "mean_ns_per_op", "bulk_frac",   "top_frac",
      "node_count_internal", "node_count_leaf", "sorts_adaptive", "sorts_merge", "pages_scanned",
      "bf_probes",       "bf_positives",   "physical_reads"};
  EXPECT_EQ(csv_columns(), expected);
}

TEST(BenchCsv, SchemaHashIsStable)
{
  std::string joined;
  for (const auto &c : csv_columns()) joined += (joined.empty() ? "" : ",") + c;
  EXPECT_EQ(csv_schema_hash(), reference_fnv1a(joined));
  EXPECT_EQ(csv_schema_hash(), 0x5ca5a06ab00a4d87ull);
  EXPECT_EQ(csv_schema_line(), "# osm-bench csv v1 schema=5ca5a06ab00a4d87");
}

TEST(BenchCsv, AppendWritesHeaderOnceAndRejectsForeignSchema)
{
  const auto dir = scratch_dir("append");
  const auto path = dir / "out.csv";
  const auto r = run(small_spec(Mode::Ingest, IndexKind::Osm));
  append_csv(path, {r});
  append_csv(path, {r, r});

  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], csv_schema_line());
  EXPECT_EQ(lines[1].substr(0, 13), "run_id,index,");
  for (std::size_t i = 2; i < lines.size(); ++i) {
    EXPECT_EQ(std::count(lines[i].begin(), lines[i].end(), ','), static_cast<long>(csv_columns().size() - 1));
  }

  const auto foreign = dir / "foreign.csv";
  std::ofstream(foreign) << "# osm-bench csv v0 schema=0\n";
  EXPECT_THROW(append_csv(foreign, {r}), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST(BenchCsv, EnvironmentOverridesDirectory)
{
  ::unsetenv("OSM_CSV_DIR");
  EXPECT_EQ(csv_directory("fallback"), std::filesystem::path{"fallback"});
  ::setenv("OSM_CSV_DIR", "/tmp/elsewhere", 1);
  EXPECT_EQ(csv_directory("fallback"), std::filesystem::path{"/tmp/elsewhere"});
  ::unsetenv("OSM_CSV_DIR");
}

TEST(BenchSpec, ParsersRoundTrip)
{
  for (auto m : {Mode::Ingest, Mode::Reads, Mode::Mixed, Mode::Scan}) EXPECT_EQ(parse_mode(to_string(m)), m);
  for (auto k : {IndexKind::BPlusBaseline, IndexKind::Osm, IndexKind::OsmNoBF, IndexKind::OsmGlobalBFOnly}) {
    EXPECT_EQ(parse_index(to_string(k)), k);
  }
  EXPECT_THROW(parse_mode("write"), std::invalid_argument);
  EXPECT_THROW(parse_index("lsm"), std::invalid_argument);
}

TEST(BenchSpec, ValidationRejectsBadRatiosAndRepetitions)
{
  auto s = small_spec(Mode::Mixed, IndexKind::Osm);
  s.read_write_ratio = 1.5;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.read_write_ratio = 1.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.read_write_ratio = 0.5;
  s.preload_fraction = -0.1;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.preload_fraction = 0.8;
  s.repetitions = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.repetitions = 1;
  EXPECT_NO_THROW(s.validate());

  BenchSpec missing;
  missing.workload_path = "/nonexistent/osm/workload.owl";
  EXPECT_THROW(run(missing), std::exception);
}

TEST(BenchSpec, DefaultBufferIsOnePercent)
{
  BenchSpec s;
  EXPECT_EQ(s.buffer_config(1'000'000).capacity_entries, 10'000u);
  s.buffer_entries = 1234;
  EXPECT_EQ(s.buffer_config(1'000'000).capacity_entries, 1234u);
}

TEST(BenchRun, CountersAreReproducible)
{
  for (auto mode : {Mode::Ingest, Mode::Reads, Mode::Mixed, Mode::Scan}) {
    for (auto index : {IndexKind::Osm, IndexKind::BPlusBaseline}) {
      const auto a = run(small_spec(mode, index));
      const auto b = run(small_spec(mode, index));
      EXPECT_EQ(a.run_id, b.run_id);
      EXPECT_EQ(a.ops, b.ops);
      EXPECT_EQ(a.checksum, b.checksum);
      EXPECT_EQ(a.bulk_frac, b.bulk_frac);
      EXPECT_EQ(a.node_count_internal, b.node_count_internal);
      EXPECT_EQ(a.node_count_leaf, b.node_count_leaf);
      EXPECT_EQ(a.sorts_adaptive, b.sorts_adaptive);
      EXPECT_EQ(a.pages_scanned, b.pages_scanned);
      EXPECT_EQ(a.bf_probes, b.bf_probes);
      EXPECT_EQ(a.logical_reads, b.logical_reads);
    }
  }
}

TEST(BenchRun, OpCountsFollowMode)
{
  EXPECT_EQ(run(small_spec(Mode::Ingest, IndexKind::Osm)).ops, 20'000u);
  EXPECT_EQ(run(small_spec(Mode::Reads, IndexKind::Osm)).ops, 5'000u);
  // Preload 16000, then 4000 writes and round(4000 * 0.25 / 0.75) reads.
  auto mixed = small_spec(Mode::Mixed, IndexKind::Osm);
  mixed.read_write_ratio = 0.25;
  EXPECT_EQ(run(mixed).ops, 4'000u + 1'333u);
  auto scan = small_spec(Mode::Scan, IndexKind::Osm);
  EXPECT_EQ(run(scan).ops, 2u * 20u);
}

TEST(BenchRun, IndexesAgreeOnReadResults)
{
  for (auto mode : {Mode::Reads, Mode::Mixed, Mode::Scan}) {
    const auto base = run(small_spec(mode, IndexKind::BPlusBaseline));
    for (auto index : {IndexKind::Osm, IndexKind::OsmNoBF, IndexKind::OsmGlobalBFOnly}) {
      EXPECT_EQ(run(small_spec(mode, index)).checksum, base.checksum) << to_string(mode) << ' ' << to_string(index);
    }
  }
}

TEST(BenchRun, SortedIngestIsPureBulkLoad)
{
  const auto r = run(small_spec(Mode::Ingest, IndexKind::Osm, 0.0, 0.0, 100'000));
  EXPECT_EQ(r.top_frac, 0.0);
  EXPECT_EQ(r.bulk_frac, 1.0);
  EXPECT_EQ(r.sorts_adaptive + r.sorts_merge, 0u);
  const auto base = run(small_spec(Mode::Ingest, IndexKind::BPlusBaseline, 0.0, 0.0, 100'000));
  EXPECT_EQ(base.top_frac, 1.0);
  EXPECT_LT(r.node_count_internal + r.node_count_leaf, base.node_count_internal + base.node_count_leaf);
}

TEST(BenchRun, BreakdownFitsWithinTotal)
{
  auto s = small_spec(Mode::Mixed, IndexKind::Osm);
  s.collect_timings = true;
  const auto r = run(s);
  EXPECT_GT(r.breakdown.total(), 0u);
  EXPECT_LE(r.breakdown.total(), r.total_ns);
}

TEST(BenchRun, RepetitionsReportMedianAndMin)
{
  auto s = small_spec(Mode::Ingest, IndexKind::Osm);
  s.repetitions = 3;
  const auto r = run(s);
  EXPECT_LE(r.min_total_ns, r.total_ns);
  EXPECT_GT(r.min_total_ns, 0u);
}

TEST(BenchRun, FileBackendCountsPhysicalReads)
{
  auto s = small_spec(Mode::Reads, IndexKind::BPlusBaseline);
  s.store.backend = Backend::File;
  s.store.bufferpool_bytes = 8 * s.store.page_size_bytes;
  const auto r = run(s);
  EXPECT_GT(r.physical_reads, 0u);
  EXPECT_GE(r.logical_reads, r.physical_reads);
}

TEST(BenchRun, BaselineComparisonFillsSpeedup)
{
  const auto [subject, base] = run_against_baseline(small_spec(Mode::Ingest, IndexKind::Osm));
  ASSERT_TRUE(subject.speedup.has_value());
  EXPECT_NEAR(*subject.speedup, static_cast<double>(base.total_ns) / static_cast<double>(subject.total_ns), 1e-12);
  EXPECT_EQ(base.spec.index, IndexKind::BPlusBaseline);
}

TEST(BenchGrid, SmokeGridFinishesQuickly)
{
  auto templ = small_spec(Mode::Mixed, IndexKind::Osm, 0, 0, 100'000);
  const std::vector<double> ks{0.0, 0.05};
  const std::vector<double> ls{0.01, 0.05};
  const auto start = std::chrono::steady_clock::now();
  const auto cells = grid(templ, ks, ls);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_LT(elapsed, std::chrono::seconds(60));
  ASSERT_EQ(cells.size(), 4u);
  // The sorted row ignores L.
  EXPECT_EQ(cells[0].osm.spec.workload.l_pct, 0.0);
  EXPECT_EQ(cells[0].osm.run_id, cells[1].osm.run_id);
  for (const auto &c : cells) EXPECT_TRUE(c.osm.speedup.has_value());

  std::ostringstream os;
  write_grid_matrix(os, cells, ks, ls);
  std::istringstream lines(os.str());
  std::string header, row;
  std::getline(lines, header);
  EXPECT_EQ(header, "k\\l,0.01,0.05");
  int rows = 0;
  while (std::getline(lines, row)) {
    ++rows;
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), 2);
  }
  EXPECT_EQ(rows, 2);
}

// A buffer of 20% of n keeps a multi-page tail for interleaved lookups to probe.
BenchSpec
ablation_spec(double kl)
{
  auto s = small_spec(Mode::Mixed, IndexKind::Osm, kl, kl, 100'000);
  s.buffer_entries = 20'000;
  return s;
}

TEST(BenchAblation, GlobalFilterCutsPagesScannedOnNearSortedLookups)
{
  const auto rows = ablate_bloom(ablation_spec(0.05));
  ASSERT_EQ(rows.size(), 6u);
  const auto &full = rows[1];
  const auto &global = rows[3];
  const auto &none = rows[5];
  EXPECT_EQ(full.spec.index, IndexKind::Osm);
  EXPECT_EQ(global.spec.index, IndexKind::OsmGlobalBFOnly);
  EXPECT_EQ(none.spec.index, IndexKind::OsmNoBF);
  EXPECT_LT(global.pages_scanned, none.pages_scanned);
  EXPECT_LE(full.pages_scanned, global.pages_scanned);
  EXPECT_EQ(none.bf_probes, 0u);
}

TEST(BenchAblation, PageFiltersCutPagesScannedOnScrambledLookups)
{
  const auto rows = ablate_bloom(ablation_spec(1.0));
  EXPECT_LT(rows[1].pages_scanned, rows[3].pages_scanned);
  EXPECT_LT(rows[3].pages_scanned, rows[5].pages_scanned);
}

}  // namespace
}  // namespace osm::bench
