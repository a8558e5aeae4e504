/*
 * Copyright 2026 The Uplift-ROI Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef UPLIFT_ROI_RANDOM_H_
#define UPLIFT_ROI_RANDOM_H_

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace uplift_roi {

// SplitMix64 generator. Satisfies UniformRandomBitGenerator.
//
// Streams are addressed by (seed, stream, counter) so that record i of a
// generated population draws from its own sequence and the output does not
// depend on iteration order or on how the work is split across threads.
class SplitMix64 {
 public:
  using result_type = uint64_t;

  explicit SplitMix64(uint64_t state) : state_(state) {}

  // Independent stream for a (seed, stream, counter) triple.
  static SplitMix64 ForStream(uint64_t seed, uint64_t stream,
                              uint64_t counter) {
    SplitMix64 mixer(seed);
    uint64_t state = mixer() ^ Mix(stream + 0x632be59bd9b4e019ULL);
    state = Mix(state) ^ Mix(counter * 0xd1342543de82ef95ULL + 1);
    return SplitMix64(state);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return Mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Box-Muller; spends two uniforms per call so draws stay aligned.
  double Normal() {
    double u1 = Uniform();
    const double u2 = Uniform();
    if (u1 <= 0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static uint64_t Mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t state_;
};

}  // namespace uplift_roi

#endif  // UPLIFT_ROI_RANDOM_H_
