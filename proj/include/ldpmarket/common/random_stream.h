// Copyright 2026 The ldpmarket Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LDPMARKET_COMMON_RANDOM_STREAM_H_
#define LDPMARKET_COMMON_RANDOM_STREAM_H_

#include <cstdint>
#include <random>
#include <span>

namespace ldpmarket {

// Seeded, reproducible random stream. The engine is mt19937_64, whose output
// sequence is fixed by the C++ standard; every conversion to doubles, normals
// and bounded integers is done here rather than through <random>
// distributions, whose algorithms are implementation-defined. Two builds with
// the same seed therefore replay the same stream.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : engine_(seed), seed_(seed) {}

  uint64_t seed() const { return seed_; }

  uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of precision.
  double UniformDouble();

  // Uniform on [0, bound). bound must be > 0.
  uint64_t UniformInt(uint64_t bound);

  // Box-Muller; consumes exactly two uniforms per call.
  double Normal(double mean, double sd);

  bool Bernoulli(double p) { return UniformDouble() < p; }

  void FillBytes(std::span<uint8_t> out);

 private:
  std::mt19937_64 engine_;
  uint64_t seed_;
};

// Substream seed for (master, domain, index). For fixed master and domain the
// map index -> seed is injective.
uint64_t DeriveSeed(uint64_t master, uint64_t domain, uint64_t index);

// Seed domains shared by the protocol and the simulation harness. Keeping them
// in one place is what lets the two execution modes consume identical
// randomness per operator.
namespace seed_domain {
inline constexpr uint64_t kTrial = 0x7472;
inline constexpr uint64_t kOperatorResponse = 0x6f70;
inline constexpr uint64_t kOperatorAddress = 0x6164;
inline constexpr uint64_t kCipherNonce = 0x636e;
inline constexpr uint64_t kSurveyKeys = 0x6b79;
inline constexpr uint64_t kArrivalOrder = 0x6172;
inline constexpr uint64_t kProfiles = 0x7066;
}  // namespace seed_domain

// Fisher-Yates with RandomStream::UniformInt, so the permutation is stable
// across standard library implementations.
template <typename T>
void SeededShuffle(std::span<T> items, RandomStream& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng.UniformInt(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace ldpmarket

#endif  // LDPMARKET_COMMON_RANDOM_STREAM_H_
