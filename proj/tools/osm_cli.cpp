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

#include <cstdio>
#include <fstream>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "osm/bench.hpp"
#include "osm/osm_tree.hpp"
#include "osm/workload.hpp"

namespace
{

using namespace osm;
using namespace osm::bench;

struct SpecFlags {
  std::string workload;
  std::string mode{"ingest"};
  std::string index{"osm"};
  std::string backend{"memory"};
  std::string file_path;
  std::string csv_dir;
  std::vector<double> selectivities;
  std::size_t buffer_entries{0};
  double flush_fraction{0.0};
  double qsort_threshold{0.0};
  bool compare{false};
};

void
add_workload_flags(CLI::App &cmd, WorkloadSpec &w)
{
  cmd.add_option("--n", w.n, "Stream length")->capture_default_str();
  cmd.add_option("--k", w.k_pct, "Fraction of out-of-order entries in [0, 1]")->capture_default_str();
  cmd.add_option("--l", w.l_pct, "Maximum displacement as a fraction of n in [0, 1]")->capture_default_str();
  cmd.add_option("--seed", w.seed, "Generator seed")->capture_default_str();
}

void
add_spec_flags(CLI::App &cmd, BenchSpec &spec, SpecFlags &f, bool with_mode)
{
  add_workload_flags(cmd, spec.workload);
  cmd.add_option("--workload", f.workload, "Read the stream from a workload file instead of generating it");
  if (with_mode) {
    cmd.add_option("--mode", f.mode, "ingest|reads|mixed|scan")->capture_default_str();
    cmd.add_option("--index", f.index, "bplus|osm|osm-nobf|osm-globalbf")->capture_default_str();
    cmd.add_flag("--compare", f.compare, "Also run the B+-tree baseline and report the speedup");
  }
  cmd.add_option("--ratio", spec.read_write_ratio, "Read fraction of operations in mixed mode")->capture_default_str();
  cmd.add_option("--preload", spec.preload_fraction, "Stream fraction ingested before mixed operations")
      ->capture_default_str();
  cmd.add_option("--lookups", spec.lookup_count, "Point lookups in reads mode")->capture_default_str();
  cmd.add_option("--selectivity", f.selectivities, "Scan selectivities as fractions of n");
  cmd.add_option("--scans", spec.scans_per_selectivity, "Scans per selectivity")->capture_default_str();
  cmd.add_option("--buffer-entries", f.buffer_entries, "Buffer capacity (default 1% of n)");
  cmd.add_option("--flush-fraction", f.flush_fraction, "Buffer fraction flushed per cycle");
  cmd.add_option("--qsort-threshold", f.qsort_threshold, "Unsorted tail fraction that triggers a query-driven sort");
  cmd.add_option("--backend", f.backend, "memory|file")->capture_default_str();
  cmd.add_option("--bufferpool-bytes", spec.store.bufferpool_bytes, "File backend buffer pool size")
      ->capture_default_str();
  cmd.add_option("--file-path", f.file_path, "File backend page file (default: a scratch file)");
  cmd.add_option("--reps", spec.repetitions, "Repetitions; the median is reported")->capture_default_str();
  cmd.add_option("--query-seed", spec.query_seed, "Seed for lookup and scan keys")->capture_default_str();
  cmd.add_flag("--timings", spec.collect_timings, "Collect the per-phase latency breakdown");
  cmd.add_option("--csv-dir", f.csv_dir, "CSV output directory (OSM_CSV_DIR overrides)");
}

void
apply_flags(BenchSpec &spec, const SpecFlags &f, bool with_mode)
{
  if (!f.workload.empty()) spec.workload_path = f.workload;
  if (with_mode) {
    spec.mode = parse_mode(f.mode);
    spec.index = parse_index(f.index);
  }
  if (!f.selectivities.empty()) spec.scan_selectivities = f.selectivities;
  if (f.buffer_entries > 0) spec.buffer_entries = f.buffer_entries;
  if (f.flush_fraction > 0.0) spec.flush_fraction = f.flush_fraction;
  if (f.qsort_threshold > 0.0) spec.qsort_threshold = f.qsort_threshold;
  if (f.backend == "file") {
    spec.store.backend = Backend::File;
    if (!f.file_path.empty()) spec.store.file_path = f.file_path;
  } else if (f.backend != "memory") {
    throw std::invalid_argument("unknown backend '" + f.backend + "' (memory|file)");
  }
}

std::filesystem::path
csv_path(const SpecFlags &f, const char *name)
{
  return csv_directory(f.csv_dir.empty() ? std::filesystem::path{"."} : std::filesystem::path{f.csv_dir}) /
         (std::string{name} + ".csv");
}

void
print_table(const std::vector<BenchResult> &rows)
{
  std::printf("%-13s %-7s %10s %12s %10s %8s %8s %10s %10s %12s %10s %8s\n", "index", "mode", "ops", "total_ms",
              "ns/op", "bulk", "top", "internal", "leaves", "pages_scan", "phys_rd", "speedup");
  for (const auto &r : rows) {
    char speedup[32] = "-";
    if (r.speedup) std::snprintf(speedup, sizeof speedup, "%.2fx", *r.speedup);
    std::printf("%-13s %-7s %10llu %12.2f %10.1f %8.4f %8.4f %10llu %10llu %12llu %10llu %8s\n",
                to_string(r.spec.index), to_string(r.spec.mode), static_cast<unsigned long long>(r.ops),
                static_cast<double>(r.total_ns) / 1e6, r.mean_ns_per_op, r.bulk_frac, r.top_frac,
                static_cast<unsigned long long>(r.node_count_internal),
                static_cast<unsigned long long>(r.node_count_leaf), static_cast<unsigned long long>(r.pages_scanned),
                static_cast<unsigned long long>(r.physical_reads), speedup);
  }
}

void
print_breakdown(const BenchResult &r)
{
  const auto &t = r.breakdown;
  if (!r.spec.collect_timings || t.total() == 0) return;
  std::printf("breakdown (%s): buffer %.2f ms, sort %.2f ms, bulk load %.2f ms, top insert %.2f ms, "
              "tree search %.2f ms, metadata %.2f ms\n",
              to_string(r.spec.index), t.buffer_ns / 1e6, t.sort_ns / 1e6, t.bulk_load_ns / 1e6,
              t.top_insert_ns / 1e6, t.tree_search_ns / 1e6, t.metadata_ns / 1e6);
}

std::vector<double>
percent_list(const std::vector<double> &percent)
{
  std::vector<double> out;
  for (double p : percent) out.push_back(p / 100.0);
  return out;
}

}  // namespace

int
main(int argc, char **argv)
{
  CLI::App app{"OSM-tree workload generator and benchmark harness"};
  app.require_subcommand(1);

  WorkloadSpec gen_spec{};
  std::string gen_out;
  auto *gen = app.add_subcommand("gen", "Generate a K-L near-sorted workload file");
  add_workload_flags(*gen, gen_spec);
  gen->add_option("--payload-bytes", gen_spec.payload_bytes, "Payload width in bytes")->capture_default_str();
  gen->add_option("--key-width", gen_spec.key_width_bytes, "Key width in bytes")->capture_default_str();
  gen->add_option("--out", gen_out, "Output file")->required();

  BenchSpec ingest_spec;
  SpecFlags ingest_flags;
  auto *ingest = app.add_subcommand("ingest", "Ingest a stream into OSM and the baseline and compare");
  add_spec_flags(*ingest, ingest_spec, ingest_flags, false);

  BenchSpec bench_spec;
  SpecFlags bench_flags;
  auto *bench_cmd = app.add_subcommand("bench", "Run one benchmark configuration");
  add_spec_flags(*bench_cmd, bench_spec, bench_flags, true);

  BenchSpec grid_spec;
  SpecFlags grid_flags;
  grid_flags.mode = "mixed";
  std::vector<double> grid_k{0, 1, 5, 10, 50};
  std::vector<double> grid_l{1, 5, 10, 50};
  auto *grid_cmd = app.add_subcommand("grid", "Speedup heatmap over K and L (percent)");
  add_spec_flags(*grid_cmd, grid_spec, grid_flags, false);
  grid_cmd->add_option("--mode", grid_flags.mode, "ingest|reads|mixed|scan")->capture_default_str();
  grid_cmd->add_option("--ks", grid_k, "K values in percent")->capture_default_str();
  grid_cmd->add_option("--ls", grid_l, "L values in percent")->capture_default_str();

  BenchSpec ablate_spec;
  SpecFlags ablate_flags;
  ablate_flags.mode = "reads";
  auto *ablate = app.add_subcommand("ablate", "Compare full, global-only and no Bloom filter variants");
  add_spec_flags(*ablate, ablate_spec, ablate_flags, false);
  ablate->add_option("--mode", ablate_flags.mode, "Read-side mode: reads|mixed|scan")->capture_default_str();

  double delta = 0.0, fpr_global = 0.0082, fpr_page = 0.0082, v = 1.0;
  std::uint64_t pages = 0, fanout = 255;
  auto *bound = app.add_subcommand("bound", "Largest buffer fraction keeping OSM lookups within delta of a B+-tree");
  bound->add_option("--delta", delta, "Allowed lookup cost ratio")->required();
  bound->add_option("--pages", pages, "Pages in the tree")->required();
  bound->add_option("--fanout", fanout, "Tree fanout")->capture_default_str();
  bound->add_option("--fpr-global", fpr_global, "Global Bloom filter false positive rate")->capture_default_str();
  bound->add_option("--fpr-page", fpr_page, "Per-page Bloom filter false positive rate")->capture_default_str();
  bound->add_option("--v", v, "Sorted-section search cost in pages")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto entries = generate(gen_spec);
      write_workload(gen_out, gen_spec, entries);
      const auto report = measure_sortedness(entries);
      std::printf("wrote %zu entries to %s (k=%.4f l=%.4f max displacement %llu)\n", entries.size(), gen_out.c_str(),
                  report.k_measured, report.l_measured, static_cast<unsigned long long>(report.max_displacement));
    } else if (*ingest) {
      apply_flags(ingest_spec, ingest_flags, false);
      ingest_spec.mode = Mode::Ingest;
      ingest_spec.index = IndexKind::Osm;
      auto [osm_result, base] = run_against_baseline(ingest_spec);
      std::vector<BenchResult> rows{osm_result, base};
      print_table(rows);
      print_breakdown(osm_result);
      append_csv(csv_path(ingest_flags, "ingest"), rows);
    } else if (*bench_cmd) {
      apply_flags(bench_spec, bench_flags, true);
      std::vector<BenchResult> rows;
      if (bench_flags.compare && bench_spec.index != IndexKind::BPlusBaseline) {
        auto [subject, base] = run_against_baseline(bench_spec);
        rows = {subject, base};
      } else {
        rows = {run(bench_spec)};
      }
      print_table(rows);
      print_breakdown(rows.front());
      append_csv(csv_path(bench_flags, "bench"), rows);
    } else if (*grid_cmd) {
      apply_flags(grid_spec, grid_flags, false);
      grid_spec.mode = parse_mode(grid_flags.mode);
      grid_spec.index = IndexKind::Osm;
      const auto ks = percent_list(grid_k);
      const auto ls = percent_list(grid_l);
      const auto cells = grid(grid_spec, ks, ls);
      std::vector<BenchResult> rows;
      for (const auto &c : cells) {
        rows.push_back(c.osm);
        rows.push_back(c.baseline);
      }
      write_grid_matrix(std::cout, cells, ks, ls);
      append_csv(csv_path(grid_flags, "grid"), rows);
      std::ofstream matrix(csv_path(grid_flags, "grid_matrix"));
      write_grid_matrix(matrix, cells, ks, ls);
    } else if (*ablate) {
      apply_flags(ablate_spec, ablate_flags, false);
      ablate_spec.mode = parse_mode(ablate_flags.mode);
      ablate_spec.index = IndexKind::Osm;
      const auto rows = ablate_bloom(ablate_spec);
      print_table(rows);
      append_csv(csv_path(ablate_flags, "ablate"), rows);
    } else if (*bound) {
      const auto b = buffer_size_bound(delta, pages, fanout, fpr_global, fpr_page, v);
      std::printf("log_B(N_B) = %.6f\n", b.log_b_nb);
      if (b.feasible) {
        std::printf("max buffer fraction p < %.9g\n", b.max_fraction);
      } else {
        std::printf("infeasible: delta must exceed %.9g\n", b.min_delta);
      }
    }
  } catch (const std::exception &e) {
    std::fprintf(stderr, "osm: %s\n", e.what());
    return 1;
  }
  return 0;
}
