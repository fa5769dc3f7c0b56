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

#include "osm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "osm/bptree.hpp"
#include "osm/hash.hpp"
#include "osm/random.hpp"

namespace osm::bench
{
namespace
{

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kBatchOps = 10'000;

/// Accumulates wall-clock time, reading the clock once per batch of operations.
class BatchClock
{
 public:
  void
  start()
  {
    begin_ = Clock::now();
    in_batch_ = 0;
  }

  void
  tick()
  {
    if (++in_batch_ == kBatchOps) {
      const auto now = Clock::now();
      total_ += now - begin_;
      begin_ = now;
      in_batch_ = 0;
    }
  }

  std::uint64_t
  stop()
  {
    total_ += Clock::now() - begin_;
    return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(total_).count());
  }

 private:
  Clock::time_point begin_;
  Clock::duration total_{0};
  std::uint64_t in_batch_{0};
};

class Index
{
 public:
  virtual ~Index() = default;
  virtual void put(Key key, Value value) = 0;
  virtual std::optional<Value> get(Key key) = 0;
  virtual std::size_t scan(Key lo, Key hi) = 0;
  virtual const PageStore &store() const = 0;
  virtual BufferStats buffer_stats() const { return {}; }
  virtual TimeBreakdown breakdown() const { return {}; }
  virtual void fill_structure(BenchResult &r) const = 0;
};

class BaselineIndex final : public Index
{
 public:
  explicit BaselineIndex(const PageStoreConfig &config)
      : store_{open_page_store(config)}, tree_{*store_, TreeConfig::baseline()}
  {
  }

  void put(Key key, Value value) override { tree_.top_insert(key, value); }
  std::optional<Value> get(Key key) override { return tree_.search(key); }
  std::size_t scan(Key lo, Key hi) override { return tree_.scan(lo, hi).size(); }
  const PageStore &store() const override { return *store_; }

  void
  fill_structure(BenchResult &r) const override
  {
    const auto &s = tree_.stats();
    r.node_count_internal = s.internal_nodes;
    r.node_count_leaf = s.leaf_nodes;
    const auto to_tree = s.top_inserted + s.bulk_loaded + s.fast_path_inserted;
    r.bulk_frac = to_tree == 0 ? 0.0 : static_cast<double>(s.bulk_loaded) / static_cast<double>(to_tree);
    r.top_frac = to_tree == 0 ? 0.0 : 1.0 - r.bulk_frac;
  }

 private:
  std::unique_ptr<PageStore> store_;
  BPlusTree tree_;
};

class OsmIndex final : public Index
{
 public:
  explicit OsmIndex(OsmConfig config) : tree_{std::move(config)} {}

  void put(Key key, Value value) override { tree_.put(key, value); }
  std::optional<Value> get(Key key) override { return tree_.get(key); }
  std::size_t scan(Key lo, Key hi) override { return tree_.scan(lo, hi).size(); }
  const PageStore &store() const override { return tree_.store(); }
  BufferStats buffer_stats() const override { return tree_.buffer().stats(); }
  TimeBreakdown breakdown() const override { return tree_.stats().time; }

  void
  fill_structure(BenchResult &r) const override
  {
    const auto &t = tree_.tree().stats();
    const auto &s = tree_.stats();
    r.node_count_internal = t.internal_nodes;
    r.node_count_leaf = t.leaf_nodes;
    const auto to_tree = s.entries_to_tree();
    r.bulk_frac = to_tree == 0 ? 0.0 : static_cast<double>(s.bulk_loaded_entries) / static_cast<double>(to_tree);
    r.top_frac = to_tree == 0 ? 0.0 : static_cast<double>(s.top_inserted_entries) / static_cast<double>(to_tree);
    r.sorts_adaptive = tree_.buffer().stats().sorts_adaptive;
    r.sorts_merge = tree_.buffer().stats().sorts_merge;
  }

 private:
  OsmTree tree_;
};

/// Removes a scratch page file on scope exit.
class ScratchFile
{
 public:
  explicit ScratchFile(std::filesystem::path path) : path_{std::move(path)} {}
  ScratchFile(const ScratchFile &) = delete;
  ScratchFile &operator=(const ScratchFile &) = delete;
  ~ScratchFile()
  {
    std::error_code ec;
    if (!path_.empty()) std::filesystem::remove(path_, ec);
  }

 private:
  std::filesystem::path path_;
};

std::filesystem::path
scratch_path()
{
  static std::uint64_t counter = 0;
  return std::filesystem::temp_directory_path() /
         ("osm_bench_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".pages");
}

std::unique_ptr<Index>
make_index(const BenchSpec &spec, const PageStoreConfig &store)
{
  if (spec.index == IndexKind::BPlusBaseline) return std::make_unique<BaselineIndex>(store);
  OsmConfig c;
  c.store = store;
  c.buffer = spec.buffer_config(spec.workload.n);
  c.buffer.use_global_bloom = spec.index != IndexKind::OsmNoBF;
  c.buffer.use_page_blooms = spec.index == IndexKind::Osm;
  c.collect_timings = spec.collect_timings;
  return std::make_unique<OsmIndex>(std::move(c));
}

struct Counters {
  BufferStats buffer;
  PagerStats pager;
  TimeBreakdown time;
};

Counters
snapshot(const Index &index)
{
  return {index.buffer_stats(), index.store().stats(), index.breakdown()};
}

TimeBreakdown
since(const TimeBreakdown &after, const TimeBreakdown &before)
{
  return {after.buffer_ns - before.buffer_ns,       after.sort_ns - before.sort_ns,
          after.bulk_load_ns - before.bulk_load_ns, after.top_insert_ns - before.top_insert_ns,
          after.tree_search_ns - before.tree_search_ns, after.metadata_ns - before.metadata_ns};
}

struct Phase {
  std::uint64_t ops{0};
  std::uint64_t ns{0};
  std::uint64_t checksum{0};
};

Phase
run_phase(const BenchSpec &spec, const std::vector<Entry> &stream, Index &index, Counters &before)
{
  Phase phase;
  Rng rng{spec.query_seed};
  BatchClock clock;
  const auto n = stream.size();
  auto ingest = [&](std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i) index.put(stream[i].key, stream[i].value);
  };
  auto random_ingested = [&](std::size_t ingested) { return stream[rng.below(ingested)].key; };

  switch (spec.mode) {
    case Mode::Ingest: {
      before = snapshot(index);
      clock.start();
      for (const auto &e : stream) {
        index.put(e.key, e.value);
        clock.tick();
      }
      phase.ops = n;
      break;
    }
    case Mode::Reads: {
      ingest(0, n);
      before = snapshot(index);
      clock.start();
      for (std::uint64_t i = 0; i < spec.lookup_count; ++i) {
        if (auto v = index.get(random_ingested(n))) phase.checksum += *v;
        clock.tick();
      }
      phase.ops = spec.lookup_count;
      break;
    }
    case Mode::Mixed: {
      const auto preload = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::floor(spec.preload_fraction * static_cast<double>(n))));
      ingest(0, std::min(preload, n));
      auto writes_left = n - std::min(preload, n);
      const auto r = spec.read_write_ratio;
      auto reads_left = static_cast<std::uint64_t>(std::llround(static_cast<double>(writes_left) * r / (1.0 - r)));
      phase.ops = writes_left + reads_left;
      auto next = std::min(preload, n);
      before = snapshot(index);
      clock.start();
      while (writes_left + reads_left > 0) {
        if (rng.below(writes_left + reads_left) < reads_left) {
          if (auto v = index.get(random_ingested(next))) phase.checksum += *v;
          --reads_left;
        } else {
          index.put(stream[next].key, stream[next].value);
          ++next;
          --writes_left;
        }
        clock.tick();
      }
      break;
    }
    case Mode::Scan: {
      ingest(0, n);
      const auto [lo_it, hi_it] =
          std::minmax_element(stream.begin(), stream.end(), [](const Entry &a, const Entry &b) { return a.key < b.key; });
      const Key kmin = lo_it->key, kmax = hi_it->key;
      const auto domain = kmax - kmin + 1;
      before = snapshot(index);
      clock.start();
      for (double sel : spec.scan_selectivities) {
        const auto len = std::clamp<std::uint64_t>(
            static_cast<std::uint64_t>(std::llround(sel * static_cast<double>(n))), 1, domain);
        for (std::uint64_t s = 0; s < spec.scans_per_selectivity; ++s) {
          const Key lo = kmin + rng.below(domain - len + 1);
          phase.checksum += index.scan(lo, lo + len - 1);
          clock.tick();
          ++phase.ops;
        }
      }
      break;
    }
  }
  phase.ns = clock.stop();
  return phase;
}

std::string
format_double(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string
hex64(std::uint64_t v)
{
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string
run_id_for(const BenchSpec &spec, std::size_t buffer_entries)
{
  std::ostringstream os;
  os << to_string(spec.index) << '|' << to_string(spec.mode) << '|' << spec.workload.n << '|' << spec.workload.k_pct
     << '|' << spec.workload.l_pct << '|' << spec.workload.seed << '|' << spec.read_write_ratio << '|'
     << buffer_entries << '|' << spec.flush_fraction.value_or(0.5) << '|' << spec.qsort_threshold.value_or(0.1) << '|'
     << (spec.store.backend == Backend::File ? "file" : "memory") << '|' << spec.store.bufferpool_bytes << '|'
     << spec.query_seed;
  const auto text = os.str();
  return hex64(fnv1a64(text.data(), text.size())).substr(0, 12);
}

}  // namespace

const char *
to_string(Mode mode) noexcept
{
  switch (mode) {
    case Mode::Ingest: return "ingest";
    case Mode::Reads: return "reads";
    case Mode::Mixed: return "mixed";
    case Mode::Scan: return "scan";
  }
  return "?";
}

const char *
to_string(IndexKind kind) noexcept
{
  switch (kind) {
    case IndexKind::BPlusBaseline: return "bplus";
    case IndexKind::Osm: return "osm";
    case IndexKind::OsmNoBF: return "osm-nobf";
    case IndexKind::OsmGlobalBFOnly: return "osm-globalbf";
  }
  return "?";
}

Mode
parse_mode(const std::string &text)
{
  for (auto m : {Mode::Ingest, Mode::Reads, Mode::Mixed, Mode::Scan}) {
    if (text == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown mode '" + text + "' (ingest|reads|mixed|scan)");
}

IndexKind
parse_index(const std::string &text)
{
  for (auto k : {IndexKind::BPlusBaseline, IndexKind::Osm, IndexKind::OsmNoBF, IndexKind::OsmGlobalBFOnly}) {
    if (text == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown index '" + text + "' (bplus|osm|osm-nobf|osm-globalbf)");
}

void
BenchSpec::validate() const
{
  if (!workload_path) workload.validate();
  if (!(read_write_ratio >= 0.0 && read_write_ratio <= 1.0)) throw std::invalid_argument("ratio must lie in [0, 1]");
  if (mode == Mode::Mixed && read_write_ratio >= 1.0) throw std::invalid_argument("mixed mode needs a ratio below 1");
  if (!(preload_fraction >= 0.0 && preload_fraction <= 1.0))
    throw std::invalid_argument("preload fraction must lie in [0, 1]");
  if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  for (double s : scan_selectivities) {
    if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("scan selectivity must lie in (0, 1]");
  }
  if (store.backend == Backend::File && store.bufferpool_bytes / store.page_size_bytes < 2)
    throw std::invalid_argument("bufferpool must hold at least two pages");
}

BufferConfig
BenchSpec::buffer_config(std::uint64_t n) const
{
  BufferConfig c;
  c.capacity_entries =
      buffer_entries.value_or(std::max<std::size_t>(2, static_cast<std::size_t>(n / 100)));
  c.page_entries = std::max<std::size_t>(1, store.page_size_bytes / 8);
  if (flush_fraction) c.flush_fraction = *flush_fraction;
  if (qsort_threshold) c.unsorted_threshold_fraction = *qsort_threshold;
  c.validate();
  return c;
}

std::vector<Entry>
load_stream(BenchSpec &spec)
{
  if (spec.workload_path) {
    auto w = read_workload(*spec.workload_path);
    spec.workload = w.spec;
    return std::move(w.entries);
  }
  return generate(spec.workload);
}

BenchResult
run(const BenchSpec &spec, const std::vector<Entry> &stream)
{
  spec.validate();
  if (stream.empty()) throw std::invalid_argument("empty stream");

  BenchResult result;
  result.spec = spec;
  result.n = stream.size();
  const auto buffer = spec.buffer_config(stream.size());
  result.run_id = run_id_for(spec, spec.index == IndexKind::BPlusBaseline ? 0 : buffer.capacity_entries);

  std::vector<std::uint64_t> totals;
  for (std::uint32_t rep = 0; rep < spec.repetitions; ++rep) {
    auto store_config = spec.store;
    std::optional<ScratchFile> scratch;
    if (store_config.backend == Backend::File) {
      if (store_config.file_path.empty()) store_config.file_path = scratch_path();
      store_config.truncate = true;
      scratch.emplace(store_config.file_path);
    }
    auto index = make_index(spec, store_config);
    Counters before;
    const auto phase = run_phase(spec, stream, *index, before);
    totals.push_back(phase.ns);

    if (rep + 1 == spec.repetitions) {
      const auto after = snapshot(*index);
      result.ops = phase.ops;
      result.checksum = phase.checksum;
      result.breakdown = since(after.time, before.time);
      index->fill_structure(result);
      result.pages_scanned = after.buffer.pages_scanned - before.buffer.pages_scanned;
      result.bf_probes = after.buffer.bf_probes() - before.buffer.bf_probes();
      result.bf_positives = after.buffer.bf_positives() - before.buffer.bf_positives();
      result.physical_reads = after.pager.physical_reads - before.pager.physical_reads;
      result.logical_reads = after.pager.logical_reads - before.pager.logical_reads;
    }
  }
  std::sort(totals.begin(), totals.end());
  result.min_total_ns = totals.front();
  result.total_ns = totals.size() % 2 == 1 ? totals[totals.size() / 2]
                                           : (totals[totals.size() / 2 - 1] + totals[totals.size() / 2]) / 2;
  result.mean_ns_per_op = result.ops == 0 ? 0.0 : static_cast<double>(result.total_ns) / static_cast<double>(result.ops);
  return result;
}

BenchResult
run(const BenchSpec &spec)
{
  auto resolved = spec;
  const auto stream = load_stream(resolved);
  return run(resolved, stream);
}

std::pair<BenchResult, BenchResult>
run_against_baseline(const BenchSpec &spec)
{
  auto resolved = spec;
  const auto stream = load_stream(resolved);
  auto subject = run(resolved, stream);
  auto base_spec = resolved;
  base_spec.index = IndexKind::BPlusBaseline;
  auto baseline = run(base_spec, stream);
  if (subject.total_ns > 0) subject.speedup = static_cast<double>(baseline.total_ns) / static_cast<double>(subject.total_ns);
  baseline.speedup = 1.0;
  return {std::move(subject), std::move(baseline)};
}

std::vector<GridCell>
grid(const BenchSpec &templ, const std::vector<double> &ks, const std::vector<double> &ls)
{
  std::vector<GridCell> cells;
  std::optional<std::pair<BenchResult, BenchResult>> sorted_row;
  for (double k : ks) {
    for (double l : ls) {
      auto spec = templ;
      spec.workload_path.reset();
      spec.workload.k_pct = k;
      spec.workload.l_pct = k == 0.0 ? 0.0 : l;
      if (k == 0.0 && sorted_row) {
        cells.push_back({k, l, sorted_row->first, sorted_row->second});
        continue;
      }
      auto pair = run_against_baseline(spec);
      if (k == 0.0) sorted_row = pair;
      cells.push_back({k, l, std::move(pair.first), std::move(pair.second)});
    }
  }
  return cells;
}

void
write_grid_matrix(std::ostream &os, const std::vector<GridCell> &cells, const std::vector<double> &ks,
                  const std::vector<double> &ls)
{
  os << "k\\l";
  for (double l : ls) os << ',' << format_double(l);
  os << '\n';
  for (double k : ks) {
    os << format_double(k);
    for (double l : ls) {
      const auto it = std::find_if(cells.begin(), cells.end(), [&](const GridCell &c) { return c.k == k && c.l == l; });
      os << ',' << (it != cells.end() && it->osm.speedup ? format_double(*it->osm.speedup) : "");
    }
    os << '\n';
  }
}

std::vector<BenchResult>
ablate_bloom(const BenchSpec &spec)
{
  auto resolved = spec;
  const auto stream = load_stream(resolved);
  const Mode read_mode = resolved.mode == Mode::Ingest ? Mode::Reads : resolved.mode;
  std::vector<BenchResult> out;
  for (auto kind : {IndexKind::Osm, IndexKind::OsmGlobalBFOnly, IndexKind::OsmNoBF}) {
    for (auto mode : {Mode::Ingest, read_mode}) {
      auto s = resolved;
      s.index = kind;
      s.mode = mode;
      out.push_back(run(s, stream));
    }
  }
  return out;
}

const std::vector<std::string> &
csv_columns()
{
  static const std::vector<std::string> columns{
      "run_id",         "index",        "mode",          "n",
      "k",              "l",            "seed",          "ratio",
      "buffer_entries", "flush_fraction", "qsort_threshold", "total_ns",
      "mean_ns_per_op", "bulk_frac",    "top_frac",      "node_count_internal",
      "node_count_leaf", "sorts_adaptive", "sorts_merge", "pages_scanned",
      "bf_probes",      "bf_positives", "physical_reads",
  };
  return columns;
}

std::uint64_t
csv_schema_hash()
{
  std::string joined;
  for (const auto &c : csv_columns()) {
    if (!joined.empty()) joined += ',';
    joined += c;
  }
  return fnv1a64(joined.data(), joined.size());
}

std::string
csv_schema_line()
{
  return "# osm-bench csv v1 schema=" + hex64(csv_schema_hash());
}

std::string
csv_row(const BenchResult &r)
{
  const auto &s = r.spec;
  const bool osm = s.index != IndexKind::BPlusBaseline;
  const auto buffer = s.buffer_config(r.n);
  std::ostringstream os;
  os << r.run_id << ',' << to_string(s.index) << ',' << to_string(s.mode) << ',' << r.n << ','
     << format_double(s.workload.k_pct) << ',' << format_double(s.workload.l_pct) << ',' << s.workload.seed << ','
     << format_double(s.mode == Mode::Mixed ? s.read_write_ratio : (s.mode == Mode::Ingest ? 0.0 : 1.0)) << ','
     << (osm ? buffer.capacity_entries : 0) << ',' << format_double(osm ? buffer.flush_fraction : 0.0) << ','
     << format_double(osm ? buffer.unsorted_threshold_fraction : 0.0) << ',' << r.total_ns << ','
     << format_double(r.mean_ns_per_op) << ',' << format_double(r.bulk_frac) << ',' << format_double(r.top_frac)
     << ',' << r.node_count_internal << ',' << r.node_count_leaf << ',' << r.sorts_adaptive << ',' << r.sorts_merge
     << ',' << r.pages_scanned << ',' << r.bf_probes << ',' << r.bf_positives << ',' << r.physical_reads;
  return os.str();
}

void
append_csv(const std::filesystem::path &path, const std::vector<BenchResult> &rows)
{
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  if (!fresh) {
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    if (first != csv_schema_line())
      throw std::runtime_error(path.string() + " holds a different CSV schema (" + first + ")");
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  if (fresh) {
    out << csv_schema_line() << '\n';
    for (std::size_t i = 0; i < csv_columns().size(); ++i) out << (i == 0 ? "" : ",") << csv_columns()[i];
    out << '\n';
  }
  for (const auto &r : rows) out << csv_row(r) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::filesystem::path
csv_directory(const std::filesystem::path &fallback)
{
  if (const char *dir = std::getenv("OSM_CSV_DIR"); dir != nullptr && *dir != '\0') return dir;
  return fallback;
}

}  // namespace osm::bench
