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

#ifndef OSM_ENTRY_HPP
#define OSM_ENTRY_HPP

#include <cstdint>
#include <tuple>

namespace osm
{

using Key = std::uint64_t;
using Value = std::uint64_t;
using Seq = std::uint64_t;

/// A fixed-width key/value pair. `seq` is the insertion sequence number and
/// orders versions of the same key; it is never serialized.
struct Entry {
  Key key{};
  Value value{};
  Seq seq{};

  friend bool operator==(const Entry &, const Entry &) = default;
};

/// Total order used by every sort and merge: key ascending, then seq ascending.
struct EntryLess {
  constexpr bool
  operator()(const Entry &a, const Entry &b) const noexcept
  {
    return std::tie(a.key, a.seq) < std::tie(b.key, b.seq);
  }
};

constexpr bool
entry_less(const Entry &a, const Entry &b) noexcept
{
  return EntryLess{}(a, b);
}

}  // namespace osm

#endif  // OSM_ENTRY_HPP
