/*
 * Copyright (c) The cntcard Authors.
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

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace cntcard {

/// 64-bit FNV-1a. Used for schema hashes and seed derivation, so the value
/// must never change between releases.
std::uint64_t fnv1a64(std::string_view bytes);

std::string toHex(std::uint64_t value);

/// Seed for the named substream of a root seed ("db", "gen", "init",
/// "shuffle", ...). Substreams are independent of one another.
std::uint64_t deriveSeed(std::uint64_t root, std::string_view stream);

/// Portable random source. The engine output is fixed by the standard; the
/// helpers below avoid std::*_distribution whose algorithms are
/// implementation-defined, so streams are identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() {
    return engine_();
  }

  /// Uniform integer in [lo, hi] (inclusive).
  std::int64_t uniformInt(std::int64_t lo, std::int64_t hi);

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n);

  /// Uniform double in [0, 1).
  double uniform();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

} // namespace cntcard
