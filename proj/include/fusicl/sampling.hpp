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
#include <numeric>
#include <string>
#include <vector>

#include "fusicl/errors.hpp"
#include "fusicl/rng.hpp"
#include "fusicl/task.hpp"

namespace fusicl {

// fixed: one seed-determined draw shared by every test example. nonfixed: a
// fresh draw per test example from the stream seed ^ example_index.
enum class Sampling { fixed, nonfixed };

inline std::string sampling_name(Sampling s) { return s == Sampling::fixed ? "fixed" : "nonfixed"; }

inline Sampling sampling_from_name(const std::string& name) {
    if (name == "fixed") return Sampling::fixed;
    if (name == "nonfixed") return Sampling::nonfixed;
    throw ValidationError("unknown sampling setting '" + name + "' (expected fixed or nonfixed)");
}

// Draws k demonstrations without replacement, never returning the excluded
// example. The draw is the prefix of a seeded permutation of the task, so the
// fixed setting hands every test example the same demonstrations (modulo the
// excluded one) while nonfixed re-permutes per example.
inline std::vector<TaskExample> sample_shots(const Task& task, int k, uint64_t seed, Sampling setting,
                                             const std::string& exclude_id) {
    if (k < 0) throw ArgumentError("sample_shots: k must be non-negative");
    if (k == 0) return {};

    int64_t exclude_index = -1;
    for (size_t i = 0; i < task.examples.size(); ++i) {
        if (task.examples[i].id == exclude_id) {
            exclude_index = static_cast<int64_t>(i);
            break;
        }
    }
    const size_t pool = task.examples.size() - (exclude_index >= 0 ? 1 : 0);
    if (static_cast<size_t>(k) > pool) {
        throw ArgumentError("sample_shots: k=" + std::to_string(k) + " exceeds the available pool of " +
                            std::to_string(pool) + " examples");
    }

    const uint64_t stream_seed =
        setting == Sampling::fixed
            ? seed
            : seed ^ static_cast<uint64_t>(exclude_index >= 0 ? exclude_index : 0);
    std::vector<size_t> order(task.examples.size());
    std::iota(order.begin(), order.end(), size_t{0});
    Xoshiro256 rng(stream_seed);
    deterministic_shuffle(order, rng);

    std::vector<TaskExample> shots;
    shots.reserve(static_cast<size_t>(k));
    for (size_t idx : order) {
        if (static_cast<int64_t>(idx) == exclude_index) continue;
        shots.push_back(task.examples[idx]);
        if (static_cast<int>(shots.size()) == k) break;
    }
    return shots;
}

}  // namespace fusicl
