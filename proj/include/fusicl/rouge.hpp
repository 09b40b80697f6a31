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

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "fusicl/errors.hpp"

namespace fusicl {

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

namespace detail {

// Lowercased whitespace tokenization; no stemming, no punctuation stripping.
inline std::vector<std::string> rouge_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline std::map<std::string, int> ngram_counts(const std::vector<std::string>& toks, int n) {
    std::map<std::string, int> counts;
    if (static_cast<int>(toks.size()) < n) return counts;
    for (size_t i = 0; i + n <= toks.size(); ++i) {
        std::string key = toks[i];
        for (int j = 1; j < n; ++j) key += '\x1f' + toks[i + j];
        ++counts[key];
    }
    return counts;
}

inline RougeScore prf(double overlap, double cand_total, double ref_total) {
    RougeScore s;
    s.precision = cand_total > 0 ? overlap / cand_total : 0.0;
    s.recall = ref_total > 0 ? overlap / ref_total : 0.0;
    s.f1 = (s.precision + s.recall) > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

}  // namespace detail

// Clipped n-gram overlap, n in {1, 2}.
inline RougeScore rouge_n(const std::string& candidate, const std::string& reference, int n) {
    if (n != 1 && n != 2) throw ArgumentError("rouge_n: n must be 1 or 2");
    const auto cand = detail::ngram_counts(detail::rouge_tokens(candidate), n);
    const auto ref = detail::ngram_counts(detail::rouge_tokens(reference), n);
    double overlap = 0.0, cand_total = 0.0, ref_total = 0.0;
    for (const auto& [g, c] : cand) cand_total += c;
    for (const auto& [g, c] : ref) ref_total += c;
    for (const auto& [g, c] : cand) {
        auto it = ref.find(g);
        if (it != ref.end()) overlap += std::min(c, it->second);
    }
    return detail::prf(overlap, cand_total, ref_total);
}

// Longest common subsequence of the token streams.
inline RougeScore rouge_l(const std::string& candidate, const std::string& reference) {
    const auto cand = detail::rouge_tokens(candidate);
    const auto ref = detail::rouge_tokens(reference);
    const size_t m = cand.size(), r = ref.size();
    if (m == 0 || r == 0) return detail::prf(0.0, static_cast<double>(m), static_cast<double>(r));

    std::vector<int> prev(r + 1, 0), cur(r + 1, 0);
    for (size_t i = 1; i <= m; ++i) {
        for (size_t j = 1; j <= r; ++j) {
            cur[j] = cand[i - 1] == ref[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return detail::prf(static_cast<double>(prev[r]), static_cast<double>(m), static_cast<double>(r));
}

}  // namespace fusicl
