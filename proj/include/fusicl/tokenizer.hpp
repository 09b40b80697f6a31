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

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fusicl/errors.hpp"

namespace fusicl {

// Fixed byte-level vocabulary. No external assets: ids 0-14 are reserved
// control/special tokens, 15-270 map one-to-one onto byte values.
namespace tokens {

constexpr int pad_id = 0;
constexpr int eos_id = 1;
constexpr int sentinel_base = 2;   // <extra_id_0> .. <extra_id_9> -> 2..11
constexpr int sentinel_count = 10;
constexpr int tag_nlu_id = 12;     // [NLU]
constexpr int tag_nlg_id = 13;     // [NLG]
constexpr int tag_s2s_id = 14;     // [S2S]
constexpr int byte_base = 15;      // byte b -> 15 + b
constexpr int vocab_size = 271;

constexpr int sentinel_id(int n) { return sentinel_base + n; }

inline const std::array<std::string_view, 3>& mode_tags() {
    static const std::array<std::string_view, 3> tags = {"[NLU]", "[NLG]", "[S2S]"};
    return tags;
}

// Surface form -> id for every token with a printable surface.
inline const std::vector<std::pair<std::string, int>>& special_surfaces() {
    static const std::vector<std::pair<std::string, int>> table = [] {
        std::vector<std::pair<std::string, int>> t;
        for (int n = 0; n < sentinel_count; ++n) {
            t.emplace_back("<extra_id_" + std::to_string(n) + ">", sentinel_id(n));
        }
        t.emplace_back("[NLU]", tag_nlu_id);
        t.emplace_back("[NLG]", tag_nlg_id);
        t.emplace_back("[S2S]", tag_s2s_id);
        return t;
    }();
    return table;
}

}  // namespace tokens

// Longest match over special-token surfaces, otherwise one token per UTF-8
// byte. Total and deterministic; never emits pad.
inline std::vector<int> encode_text(std::string_view text) {
    std::vector<int> ids;
    ids.reserve(text.size());
    size_t pos = 0;
    while (pos < text.size()) {
        int matched_id = -1;
        size_t matched_len = 0;
        for (const auto& [surface, id] : tokens::special_surfaces()) {
            if (surface.size() > matched_len && text.compare(pos, surface.size(), surface) == 0) {
                matched_id = id;
                matched_len = surface.size();
            }
        }
        if (matched_id >= 0) {
            ids.push_back(matched_id);
            pos += matched_len;
        } else {
            ids.push_back(tokens::byte_base + static_cast<unsigned char>(text[pos]));
            ++pos;
        }
    }
    return ids;
}

// Inverse of encode_text on strings whose special markers sit at token
// boundaries. pad and eos render as empty strings.
inline std::string decode_ids(std::span<const int> ids) {
    std::string out;
    for (int id : ids) {
        if (id == tokens::pad_id || id == tokens::eos_id) continue;
        if (id >= tokens::sentinel_base && id < tokens::sentinel_base + tokens::sentinel_count) {
            out += "<extra_id_" + std::to_string(id - tokens::sentinel_base) + ">";
        } else if (id >= tokens::tag_nlu_id && id <= tokens::tag_s2s_id) {
            out += tokens::mode_tags()[id - tokens::tag_nlu_id];
        } else if (id >= tokens::byte_base && id < tokens::vocab_size) {
            out += static_cast<char>(id - tokens::byte_base);
        } else {
            throw TokenError("invalid token id " + std::to_string(id));
        }
    }
    return out;
}

}  // namespace fusicl
