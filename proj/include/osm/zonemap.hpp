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

#ifndef OSM_ZONEMAP_HPP
#define OSM_ZONEMAP_HPP

#include <algorithm>
#include <cstdint>
#include <span>

#include "osm/entry.hpp"

namespace osm
{

/// Min/max summary of a set of keys. Empty until the first update.
class Zonemap
{
 public:
  Zonemap() = default;

  static Zonemap
  of(std::span<const Entry> entries) noexcept
  {
    Zonemap zm;
    for (const auto &e : entries) zm.update(e.key);
    return zm;
  }

  void
  update(Key key) noexcept
  {
    if (count_ == 0) {
      min_ = max_ = key;
    } else {
      min_ = std::min(min_, key);
      max_ = std::max(max_, key);
    }
    ++count_;
  }

  bool
  overlaps(Key probe) const noexcept
  {
    return count_ > 0 && min_ <= probe && probe <= max_;
  }

  bool
  overlaps_range(Key lo, Key hi) const noexcept
  {
    return count_ > 0 && lo <= hi && lo <= max_ && min_ <= hi;
  }

  void
  reset() noexcept
  {
    *this = Zonemap{};
  }

  bool empty() const noexcept { return count_ == 0; }
  Key min() const noexcept { return min_; }
  Key max() const noexcept { return max_; }
  std::uint64_t count() const noexcept { return count_; }

  friend bool operator==(const Zonemap &, const Zonemap &) = default;

 private:
  Key min_{0};
  Key max_{0};
  std::uint64_t count_{0};
};

}  // namespace osm

#endif  // OSM_ZONEMAP_HPP
