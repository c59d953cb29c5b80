// Copyright 2026 The kacsim Authors
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

#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace kac {

/*!
 * Philox4x32-10 counter-based bit generator.
 *
 * The 128-bit counter is split into a 64-bit draw index (words 0,1) and a
 * 64-bit stream id (words 2,3); the 64-bit key is the master seed. Two
 * generators with the same (seed, stream) produce identical sequences no
 * matter which thread owns them, which is what makes ensemble results
 * independent of the worker count.
 */
class Philox4x32
{
  public:
    using result_type = std::uint32_t;
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    //! Raw ten-round bijection, exposed for known-answer tests.
    static Block bijection(Block counter, Key key);

  private:
    void refill();

    Key key_;
    std::uint64_t draw_ = 0;
    std::uint64_t stream_;
    Block buffer_{};
    int used_ = 4;
};

/*!
 * Random source used throughout the library: a Philox stream plus the
 * handful of continuous distributions the simulators need.
 *
 * Distributions are implemented here rather than through <random> so that
 * sequences are identical across standard library implementations.
 */
class Rng
{
  public:
    Rng(std::uint64_t seed, std::uint64_t stream = 0) : engine_(seed, stream) {}

    //! Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    //! Standard normal (Box-Muller, second variate cached).
    double normal();
    //! Exponential with the given rate; rate must be positive.
    double exponential(double rate);
    //! Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n);

    std::uint32_t bits() { return engine_(); }

  private:
    Philox4x32 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

//! Stream id for a derived substream; mixes a tag into an index.
std::uint64_t substream(std::uint64_t tag, std::uint64_t index);

} // namespace kac
