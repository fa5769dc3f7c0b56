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


#ifndef OSM_TEST_SUPPORT_ORACLE_HPP
#define OSM_TEST_SUPPORT_ORACLE_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "osm/entry.hpp"

namespace osm::testing
{

/// Last-write-wins ordered map: the reference every index read is checked against.
class MapOracle
{
 public:
  void put(Key key, Value value) { map_[key] = value; }

  std::optional<Value>
  get(Key key) const
  {
    const auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<std::pair<Key, Value>>
  scan(Key lo, Key hi) const
  {
    std::vector<std::pair<Key, Value>> out;
    if (lo > hi) return out;
    for (auto it = map_.lower_bound(lo); it != map_.end() && it->first <= hi; ++it) out.emplace_back(*it);
    return out;
  }

  std::size_t size() const noexcept { return map_.size(); }
  const std::map<Key, Value> &map() const noexcept { return map_; }

 private:
  std::map<Key, Value> map_;
};

inline std::vector<std::pair<Key, Value>>
key_values(std::span<const Entry> entries)
{
  std::vector<std::pair<Key, Value>> out;
  out.reserve(entries.size());
  for (const auto &e : entries) out.emplace_back(e.key, e.value);
  return out;
}

/// Longest prefix that is sorted by (key, seq) and no larger than any later entry, by full rescan.
inline std::size_t
brute_force_sorted_prefix(std::span<const Entry> data)
{
  std::size_t run = data.empty() ? 0 : 1;
  while (run < data.size() && !entry_less(data[run], data[run - 1])) ++run;
  for (std::size_t p = run; p > 0; --p) {
    bool ok = true;
    for (std::size_t j = p; j < data.size() && ok; ++j) ok = !entry_less(data[j], data[p - 1]);
    if (ok) return p;
  }
  return 0;
}

/// Last page of the sorted prefix, by full rescan.
inline std::optional<std::size_t>
brute_force_last_sorted_zone(std::span<const Entry> data, std::size_t page_entries)
{
  const auto p = brute_force_sorted_prefix(data);
  const auto pages = p == data.size() ? (p + page_entries - 1) / page_entries : p / page_entries;
  if (pages == 0) return std::nullopt;
  return pages - 1;
}

}  // namespace osm::testing

#endif  // OSM_TEST_SUPPORT_ORACLE_HPP
