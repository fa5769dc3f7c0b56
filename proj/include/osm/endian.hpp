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

#ifndef OSM_ENDIAN_HPP
#define OSM_ENDIAN_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>

namespace osm::le
{

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian and are accessed in place");

template <class T>
inline void
store(std::byte *dst, T v) noexcept
{
  std::memcpy(dst, &v, sizeof(T));
}

template <class T>
inline T
load(const std::byte *src) noexcept
{
  T v;
  std::memcpy(&v, src, sizeof(T));
  return v;
}

}  // namespace osm::le

#endif  // OSM_ENDIAN_HPP
