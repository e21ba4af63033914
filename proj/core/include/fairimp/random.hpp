// Copyright 2026 The fairimp Authors.
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

// Seeded randomness shared by every module.
//
// All streams come from std::mt19937_64, whose output sequence is fixed by the
// standard. The standard distributions are implementation-defined, so bounded
// integers, uniforms, normals and shuffles are derived here by hand; the same
// seed then gives the same data on every conforming toolchain.
//
// Child seeds are derived with DeriveSeed(parent, stream, index...), a
// SplitMix64-style mix. Parallel work items (trees, patches, permutation
// repetitions) each get their own derived seed, so results never depend on
// scheduling.

#ifndef FAIRIMP_RANDOM_HPP_
#define FAIRIMP_RANDOM_HPP_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace fairimp {

// Named streams for DeriveSeed. Values are part of the reproducibility
// contract: changing one changes every downstream result.
enum class Stream : std::uint64_t {
  kSplit = 1,
  kModel = 2,
  kTree = 3,
  kPermuteTrain = 4,
  kPermuteEval = 5,
  kPatch = 6,
  kPatchModel = 7,
  kSynthetic = 8,
  kSubsample = 10,
};

std::uint64_t SplitMix64(std::uint64_t x);

std::uint64_t DeriveSeed(std::uint64_t parent, Stream stream,
                         std::initializer_list<std::uint64_t> indices = {});

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t Below(std::uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform();

  // Standard normal via Box-Muller (both variates used).
  double Normal();
  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Fisher-Yates, iterating from the back.
  template <typename T>
  void Shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t k = static_cast<std::size_t>(Below(i));
      std::swap(values[i - 1], values[k]);
    }
  }

  // Uniform random permutation of 0..n-1.
  std::vector<std::size_t> Permutation(std::size_t n);

  // k distinct values from 0..n-1, returned sorted ascending.
  std::vector<std::size_t> SampleWithoutReplacement(std::size_t n,
                                                    std::size_t k);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fairimp

#endif  // FAIRIMP_RANDOM_HPP_
