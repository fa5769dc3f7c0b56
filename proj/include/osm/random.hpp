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

#ifndef OSM_RANDOM_HPP
#define OSM_RANDOM_HPP

#include <cstdint>
#include <random>

namespace osm
{

/**
 * Deterministic 64-bit generator used everywhere a seed appears.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the C++
 * standard. Standard distributions are not portable across library vendors,
 * so bounded draws use rejection sampling on the raw engine output instead.
 */
class Rng
{
 public:
  explicit Rng(std::uint64_t seed) : engine_{seed} {}

  std::uint64_t
  next()
  {
    return engine_();
  }

  /// Uniform integer in [0, bound). `bound` must be nonzero.
  std::uint64_t
  below(std::uint64_t bound)
  {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
  }

  /// Uniform integer in [lo, hi].
  std::uint64_t
  between(std::uint64_t lo, std::uint64_t hi)
  {
    if (hi - lo == UINT64_MAX) return engine_();
    return lo + below(hi - lo + 1);
  }

  /// Uniform double in [0, 1) with 53 bits of precision.
  double
  unit()
  {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace osm

#endif  // OSM_RANDOM_HPP
