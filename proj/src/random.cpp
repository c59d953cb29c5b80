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

#include "kac/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kac {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    std::uint64_t const p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace

Philox4x32::Philox4x32(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}
    , stream_(stream)
{
}

Philox4x32::Block Philox4x32::bijection(Block ctr, Key key)
{
    for (int round = 0; round < 10; ++round)
    {
        if (round > 0)
        {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

void Philox4x32::refill()
{
    Block ctr{static_cast<std::uint32_t>(draw_),
              static_cast<std::uint32_t>(draw_ >> 32),
              static_cast<std::uint32_t>(stream_),
              static_cast<std::uint32_t>(stream_ >> 32)};
    buffer_ = bijection(ctr, key_);
    ++draw_;
    used_ = 0;
}

Philox4x32::result_type Philox4x32::operator()()
{
    if (used_ == 4)
        refill();
    return buffer_[used_++];
}

double Rng::uniform()
{
    std::uint64_t const hi = engine_() >> 5;  // 27 bits
    std::uint64_t const lo = engine_() >> 6;  // 26 bits
    std::uint64_t const mant = (hi << 26) | lo;
    // (mant + 0.5) / 2^53 lies strictly inside (0, 1)
    return (static_cast<double>(mant) + 0.5) * 0x1.0p-53;
}

double Rng::normal()
{
    if (has_cached_)
    {
        has_cached_ = false;
        return cached_normal_;
    }
    double const r = std::sqrt(-2.0 * std::log(uniform()));
    double const phi = 2.0 * std::numbers::pi * uniform();
    cached_normal_ = r * std::sin(phi);
    has_cached_ = true;
    return r * std::cos(phi);
}

double Rng::exponential(double rate)
{
    if (!(rate > 0.0))
        throw std::invalid_argument("exponential: rate must be positive");
    return -std::log(uniform()) / rate;
}

std::uint64_t Rng::index(std::uint64_t n)
{
    if (n == 0)
        throw std::invalid_argument("index: empty range");
    // Lemire's nearly-divisionless method on 64-bit draws.
    auto draw64 = [this] {
        return (static_cast<std::uint64_t>(engine_()) << 32) | engine_();
    };
    unsigned __int128 m = static_cast<unsigned __int128>(draw64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n)
    {
        std::uint64_t const threshold = -n % n;
        while (low < threshold)
        {
            m = static_cast<unsigned __int128>(draw64()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::uint64_t substream(std::uint64_t tag, std::uint64_t index)
{
    return splitmix64(splitmix64(tag) ^ index);
}

} // namespace kac
