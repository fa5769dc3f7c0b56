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

#include "osm/workload.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "osm/endian.hpp"
#include "osm/hash.hpp"
#include "osm/random.hpp"

namespace osm
{
namespace
{

constexpr std::array<char, 8> kMagic = {'O', 'S', 'M', 'W', 'K', 'L', '0', '1'};
constexpr std::size_t kHeaderBytes = 8 + 8 + 8 + 8 + 8 + 4 + 4;
constexpr std::size_t kRecordBytes = 16;

// Attempts at finding an unused partner for one anchor before giving up on it.
constexpr int kPartnerAttempts = 32;

std::uint64_t
width_mask(std::uint32_t bytes)
{
  return bytes >= 8 ? UINT64_MAX : (std::uint64_t{1} << (8 * bytes)) - 1;
}

/// Unused stream positions with O(1) uniform sampling and removal.
class PositionPool
{
 public:
  explicit PositionPool(std::uint64_t n) : slots_(n), where_(n), used_(n, false)
  {
    std::iota(slots_.begin(), slots_.end(), std::uint32_t{0});
    std::iota(where_.begin(), where_.end(), std::uint32_t{0});
  }

  bool
  empty() const noexcept
  {
    return slots_.empty();
  }

  std::uint64_t
  sample(Rng &rng) const
  {
    return slots_[rng.below(slots_.size())];
  }

  bool
  used(std::uint64_t pos) const noexcept
  {
    return used_[pos];
  }

  /// Drop from the sampling set without marking as used.
  void
  retire(std::uint64_t pos)
  {
    const auto slot = where_[pos];
    if (slot == kGone) return;
    const auto last = slots_.back();
    slots_[slot] = last;
    where_[last] = slot;
    slots_.pop_back();
    where_[pos] = kGone;
  }

  void
  take(std::uint64_t pos)
  {
    used_[pos] = true;
    retire(pos);
  }

 private:
  static constexpr std::uint32_t kGone = UINT32_MAX;

  std::vector<std::uint32_t> slots_;
  std::vector<std::uint32_t> where_;
  std::vector<bool> used_;
};

std::uint64_t
count_inversions(std::vector<std::uint64_t> &ranks)
{
  std::vector<std::uint64_t> scratch(ranks.size());
  std::uint64_t inversions = 0;
  for (std::size_t width = 1; width < ranks.size(); width *= 2) {
    for (std::size_t lo = 0; lo < ranks.size(); lo += 2 * width) {
      const auto mid = std::min(lo + width, ranks.size());
      const auto hi = std::min(lo + 2 * width, ranks.size());
      std::size_t i = lo, j = mid, out = lo;
      while (i < mid && j < hi) {
        if (ranks[j] < ranks[i]) {
          inversions += mid - i;
          scratch[out++] = ranks[j++];
        } else {
          scratch[out++] = ranks[i++];
        }
      }
      while (i < mid) scratch[out++] = ranks[i++];
      while (j < hi) scratch[out++] = ranks[j++];
    }
    ranks.swap(scratch);
  }
  return inversions;
}

/// Restore the identity stream, then place pairs in one left-to-right pass.
///
/// Used when random anchors fragment the free positions, which happens when
/// the pair count approaches n / 2 under a narrow window. Each free position
/// becomes an anchor with probability 2r / m (r pairs still needed, m free
/// positions left) and is forced once 2r >= m - 1; forced anchors take their
/// nearest free successor so the pass cannot strand the remaining pairs.
std::vector<Entry>
sweep_pairs(const WorkloadSpec &spec, std::vector<Entry> out)
{
  const auto n = spec.n;
  const auto w = spec.window();
  std::sort(out.begin(), out.end(), [](const Entry &a, const Entry &b) { return a.seq < b.seq; });
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto key = out[i].seq;
    out[i].key = key;
    out[i].value = fmix64(key ^ spec.seed) & width_mask(spec.payload_bytes);
  }

  Rng rng{fmix64(spec.seed ^ 0x5eedf00dULL)};
  std::vector<bool> used(n, false);
  auto needed = spec.pair_count();
  std::uint64_t free_left = n;
  for (std::uint64_t i = 0; i < n && needed > 0; ++i) {
    if (used[i]) continue;
    const bool forced = 2 * needed + 1 >= free_left;
    const bool anchor = forced || rng.below(free_left) < 2 * needed;
    --free_left;
    if (!anchor) continue;
    const auto hi = std::min(n - 1, i + w);
    std::uint64_t j = UINT64_MAX;
    if (!forced) {
      for (int attempt = 0; attempt < kPartnerAttempts && j == UINT64_MAX; ++attempt) {
        const auto c = rng.between(i + 1 > hi ? hi : i + 1, hi);
        if (c > i && !used[c]) j = c;
      }
    }
    for (auto c = i + 1; c <= hi && j == UINT64_MAX; ++c) {
      if (!used[c]) j = c;
    }
    if (j == UINT64_MAX) continue;
    used[i] = used[j] = true;
    --free_left;
    --needed;
    std::swap(out[i].key, out[j].key);
    std::swap(out[i].value, out[j].value);
  }
  if (needed > 0) {
    throw std::invalid_argument("workload: cannot place " + std::to_string(spec.pair_count()) +
                                " disjoint pairs within window " + std::to_string(w));
  }
  return out;
}

}  // namespace

void
WorkloadSpec::validate() const
{
  if (n == 0) throw std::invalid_argument("workload: n must be at least 1");
  if (!(k_pct >= 0.0 && k_pct <= 1.0)) throw std::invalid_argument("workload: k must lie in [0, 1]");
  if (!(l_pct >= 0.0 && l_pct <= 1.0)) throw std::invalid_argument("workload: l must lie in [0, 1]");
  if (key_width_bytes == 0 || key_width_bytes > 8)
    throw std::invalid_argument("workload: key width must be 1..8 bytes");
  if (payload_bytes == 0 || payload_bytes > 8)
    throw std::invalid_argument("workload: payload width must be 1..8 bytes");
  if (n - 1 > width_mask(key_width_bytes))
    throw std::invalid_argument("workload: n does not fit the key width");
  if (n >= UINT32_MAX) throw std::invalid_argument("workload: n too large");
  if (k_pct > 0.0 && window() == 0)
    throw std::invalid_argument("workload: k > 0 needs a displacement window floor(l * n) >= 1");
}

std::uint64_t
WorkloadSpec::window() const noexcept
{
  const auto w = static_cast<std::uint64_t>(std::floor(l_pct * static_cast<double>(n)));
  return std::min(w, n == 0 ? 0 : n - 1);
}

std::uint64_t
WorkloadSpec::pair_count() const noexcept
{
  return static_cast<std::uint64_t>(std::floor(k_pct * static_cast<double>(n) / 2.0));
}

std::vector<Entry>
generate(const WorkloadSpec &spec)
{
  spec.validate();
  const auto n = spec.n;
  const auto mask = width_mask(spec.payload_bytes);

  std::vector<Entry> out(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    out[i] = Entry{i, fmix64(i ^ spec.seed) & mask, i};
  }

  const auto pairs = spec.pair_count();
  if (pairs == 0) return out;

  const auto w = spec.window();
  Rng rng{spec.seed};
  PositionPool pool{n};
  std::uint64_t placed = 0;

  auto swap_pair = [&](std::uint64_t i, std::uint64_t j) {
    pool.take(i);
    pool.take(j);
    std::swap(out[i].key, out[j].key);
    std::swap(out[i].value, out[j].value);
    ++placed;
  };

  while (placed < pairs && !pool.empty()) {
    const auto i = pool.sample(rng);
    const auto lo = i >= w ? i - w : 0;
    const auto hi = std::min(n - 1, i + w);
    bool paired = false;
    for (int attempt = 0; attempt < kPartnerAttempts; ++attempt) {
      const auto j = rng.between(lo, hi);
      if (j == i || pool.used(j)) continue;
      swap_pair(std::min(i, j), std::max(i, j));
      paired = true;
      break;
    }
    if (!paired) pool.retire(i);
  }

  // Anchors left without a partner: pair neighbouring free positions.
  if (placed < pairs) {
    std::uint64_t pending = UINT64_MAX;
    for (std::uint64_t p = 0; p < n && placed < pairs; ++p) {
      if (pool.used(p)) continue;
      if (pending != UINT64_MAX && p - pending <= w) {
        swap_pair(pending, p);
        pending = UINT64_MAX;
      } else {
        pending = p;
      }
    }
  }
  if (placed < pairs) return sweep_pairs(spec, std::move(out));
  return out;
}

SortednessReport
measure_sortedness(std::span<const Entry> stream)
{
  if (stream.empty()) throw std::invalid_argument("measure_sortedness: empty stream");
  const auto n = stream.size();

  std::vector<std::uint64_t> order(n);
  std::iota(order.begin(), order.end(), std::uint64_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
    return entry_less(stream[a], stream[b]);
  });

  std::vector<std::uint64_t> rank_at(n);
  for (std::uint64_t r = 0; r < n; ++r) rank_at[order[r]] = r;

  SortednessReport report;
  for (std::uint64_t pos = 0; pos < n; ++pos) {
    const auto r = rank_at[pos];
    const auto d = r > pos ? r - pos : pos - r;
    if (d != 0) ++report.displaced;
    report.max_displacement = std::max(report.max_displacement, d);
  }
  report.runs = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (entry_less(stream[i], stream[i - 1])) ++report.runs;
  }
  report.k_measured = static_cast<double>(report.displaced) / static_cast<double>(n);
  report.l_measured = static_cast<double>(report.max_displacement) / static_cast<double>(n);
  report.inversions = count_inversions(rank_at);
  return report;
}

void
write_workload(const std::filesystem::path &path, const WorkloadSpec &spec, std::span<const Entry> entries)
{
  if (entries.size() != spec.n) throw std::invalid_argument("write_workload: entry count differs from spec.n");

  std::vector<std::byte> buf(kHeaderBytes + kRecordBytes * entries.size());
  auto *p = buf.data();
  std::memcpy(p, kMagic.data(), kMagic.size());
  p += 8;
  le::store<std::uint64_t>(p, spec.n), p += 8;
  le::store<std::uint64_t>(p, spec.seed), p += 8;
  le::store<double>(p, spec.k_pct), p += 8;
  le::store<double>(p, spec.l_pct), p += 8;
  le::store<std::uint32_t>(p, spec.key_width_bytes), p += 4;
  le::store<std::uint32_t>(p, spec.payload_bytes), p += 4;
  for (const auto &e : entries) {
    le::store<std::uint64_t>(p, e.key), p += 8;
    le::store<std::uint64_t>(p, e.value), p += 8;
  }

  std::ofstream os{path, std::ios::binary | std::ios::trunc};
  if (!os) throw WorkloadFormatError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) throw WorkloadFormatError("write failed: " + path.string());
}

Workload
read_workload(const std::filesystem::path &path)
{
  std::ifstream is{path, std::ios::binary};
  if (!is) throw WorkloadFormatError("cannot open " + path.string());

  std::array<std::byte, kHeaderBytes> header{};
  is.read(reinterpret_cast<char *>(header.data()), header.size());
  if (is.gcount() != static_cast<std::streamsize>(header.size()))
    throw WorkloadFormatError("truncated header: " + path.string());
  if (std::memcmp(header.data(), kMagic.data(), kMagic.size()) != 0)
    throw WorkloadFormatError("bad magic: " + path.string());

  Workload wl;
  const auto *p = header.data() + 8;
  wl.spec.n = le::load<std::uint64_t>(p), p += 8;
  wl.spec.seed = le::load<std::uint64_t>(p), p += 8;
  wl.spec.k_pct = le::load<double>(p), p += 8;
  wl.spec.l_pct = le::load<double>(p), p += 8;
  wl.spec.key_width_bytes = le::load<std::uint32_t>(p), p += 4;
  wl.spec.payload_bytes = le::load<std::uint32_t>(p);

  const auto size = std::filesystem::file_size(path);
  if (size < kHeaderBytes || (size - kHeaderBytes) / kRecordBytes < wl.spec.n)
    throw WorkloadFormatError("truncated records: " + path.string());

  std::vector<std::byte> body(kRecordBytes * wl.spec.n);
  is.read(reinterpret_cast<char *>(body.data()), static_cast<std::streamsize>(body.size()));
  if (is.gcount() != static_cast<std::streamsize>(body.size()))
    throw WorkloadFormatError("truncated records: " + path.string());

  wl.entries.resize(wl.spec.n);
  for (std::uint64_t i = 0; i < wl.spec.n; ++i) {
    const auto *r = body.data() + i * kRecordBytes;
    wl.entries[i] = Entry{le::load<std::uint64_t>(r), le::load<std::uint64_t>(r + 8), i};
  }
  return wl;
}

}  // namespace osm
