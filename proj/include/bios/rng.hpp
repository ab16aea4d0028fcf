// SPDX-License-Identifier: Apache-2.0
//
// bios-htt: channel estimation and beamforming for bilayer omni-surfaces
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "bios/types.hpp"

#include <cstdint>
#include <random>

namespace bios {

using Rng = std::mt19937_64;

// Streams are spawned from a master seed with SplitMix64:
//   state = master ^ (0x9E3779B97F4A7C15 * (stream + 1)), two SplitMix64
//   outputs are mixed into the mt19937_64 seed sequence.
// The mapping is fixed; changing it changes every recorded result.

inline std::uint64_t splitmix64(std::uint64_t &state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Rng spawn_stream(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t state = master ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
  const std::uint64_t a = splitmix64(state);
  const std::uint64_t b = splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

inline double uniform(Rng &rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double standard_normal(Rng &rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

/// Circularly symmetric complex Gaussian CN(0, variance).
inline cd complex_normal(Rng &rng, double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = standard_normal(rng);
  const double im = standard_normal(rng);
  return {s * re, s * im};
}

inline cd unit_phase(Rng &rng) { return std::polar(1.0, uniform(rng, 0.0, 2.0 * kPi)); }

inline CMat complex_normal_matrix(Rng &rng, Eigen::Index rows, Eigen::Index cols,
                                  double variance = 1.0) {
  CMat out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = complex_normal(rng, variance);
  return out;
}

inline CVec unit_phase_vector(Rng &rng, Eigen::Index n) {
  CVec out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = unit_phase(rng);
  return out;
}

} // namespace bios
