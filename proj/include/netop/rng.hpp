// Copyright 2026 The netop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NETOP_RNG_HPP_
#define NETOP_RNG_HPP_

#include <cstdint>
#include <iterator>
#include <random>
#include <utility>

namespace netop {

// SplitMix64 finalizer. Used to spread user seeds and to derive child seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Child seed for (base, tag, index); distinct tags give unrelated streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag,
                          std::uint64_t index = 0);

// Stream tags. Changing any of these changes every golden fixture.
namespace stream {
inline constexpr std::uint64_t kDesign = 0x64657369676e0001ULL;
inline constexpr std::uint64_t kFaults = 0x6661756c74730002ULL;
inline constexpr std::uint64_t kInit = 0x696e697400000003ULL;
inline constexpr std::uint64_t kCollect = 0x636f6c6c65630004ULL;
inline constexpr std::uint64_t kSample = 0x73616d706c650005ULL;
inline constexpr std::uint64_t kEpisodes = 0x657069736f640006ULL;
inline constexpr std::uint64_t kValidation = 0x76616c6964610007ULL;
}  // namespace stream

// Portable seeded generator: std::mt19937_64 (whose output sequence is fixed
// by the standard) seeded through splitmix64. All derived draws are computed
// here rather than with <random> distributions, whose algorithms differ
// between standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  bool bernoulli(double p) { return uniform01() < p; }

  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    auto n = static_cast<std::uint64_t>(std::distance(first, last));
    for (std::uint64_t i = n; i > 1; --i) {
      auto j = uniform_index(i);
      using std::swap;
      swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace netop

#endif  // NETOP_RNG_HPP_
