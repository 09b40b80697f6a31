/*
 * Copyright (c) 2026, the fusicl authors.  All rights reserved.
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
#include <string_view>
#include <utility>
#include <vector>

namespace fusicl {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256** 1.0 (Blackman & Vigna), seeded through splitmix64. Pure integer
// arithmetic, so streams are identical on every platform.
class Xoshiro256 {
public:
    explicit Xoshiro256(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    uint64_t next() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 24 explicit mantissa bits.
    float next_float() { return static_cast<float>(next() >> 40) * 0x1.0p-24f; }

    // Uniform in [0, 1), 53 bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n) via 128-bit multiply-shift. Deterministic everywhere;
    // the residual bias is < 2^-64 * n, irrelevant at our pool sizes.
    uint64_t bounded(uint64_t n) {
        return static_cast<uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t state_[4];
};

inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 1469598103934665603ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline uint64_t fnv1a64(std::string_view s, uint64_t h = 1469598103934665603ULL) {
    return fnv1a64(s.data(), s.size(), h);
}

// In-place Fisher-Yates using our own generator (std::shuffle's draw sequence
// is implementation-defined and would break cross-platform reproducibility).
template <typename T>
void deterministic_shuffle(std::vector<T>& v, Xoshiro256& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(rng.bounded(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace fusicl
