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
#include <string>

#include <json.hpp>

#include "fusicl/errors.hpp"

namespace fusicl {

using ordered_json = nlohmann::ordered_json;

enum class Activation { relu, gelu };

inline std::string activation_name(Activation a) { return a == Activation::relu ? "relu" : "gelu"; }

inline Activation activation_from_name(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "gelu") return Activation::gelu;
    throw ValidationError("unknown activation '" + name + "' (expected relu or gelu)");
}

struct ModelConfig {
    int64_t vocab_size = 271;
    int64_t d_model = 64;
    int64_t n_heads = 4;
    int64_t d_kv = 16;
    int64_t d_ff = 256;
    int64_t n_enc_layers = 2;
    int64_t n_dec_layers = 2;
    int64_t rel_buckets = 32;
    int64_t rel_max_distance = 128;
    int64_t max_positions = 512;
    Activation activation = Activation::relu;
    float eps = 1e-6f;

    int64_t inner_dim() const { return n_heads * d_kv; }

    void validate() const {
        auto positive = [](int64_t v, const char* name) {
            if (v < 1) throw ValidationError(std::string("config: ") + name + " must be >= 1");
        };
        positive(vocab_size, "vocab_size");
        positive(d_model, "d_model");
        positive(n_heads, "n_heads");
        positive(d_kv, "d_kv");
        positive(d_ff, "d_ff");
        positive(n_enc_layers, "n_enc_layers");
        positive(n_dec_layers, "n_dec_layers");
        positive(max_positions, "max_positions");
        if (d_model != n_heads * d_kv) {
            throw ValidationError("config: d_model (" + std::to_string(d_model) +
                                  ") must equal n_heads * d_kv (" + std::to_string(n_heads * d_kv) + ")");
        }
        if (rel_buckets < 2 || rel_buckets % 2 != 0) {
            throw ValidationError("config: rel_buckets must be even and >= 2");
        }
        if (rel_max_distance <= rel_buckets / 2) {
            throw ValidationError("config: rel_max_distance must exceed rel_buckets / 2");
        }
        if (!(eps > 0.0f)) throw ValidationError("config: eps must be positive");
    }

    bool operator==(const ModelConfig&) const = default;
};

inline ordered_json config_to_json(const ModelConfig& c) {
    ordered_json j;
    j["vocab_size"] = c.vocab_size;
    j["d_model"] = c.d_model;
    j["n_heads"] = c.n_heads;
    j["d_kv"] = c.d_kv;
    j["d_ff"] = c.d_ff;
    j["n_enc_layers"] = c.n_enc_layers;
    j["n_dec_layers"] = c.n_dec_layers;
    j["rel_buckets"] = c.rel_buckets;
    j["rel_max_distance"] = c.rel_max_distance;
    j["max_positions"] = c.max_positions;
    j["activation"] = activation_name(c.activation);
    j["eps"] = c.eps;
    return j;
}

inline ModelConfig config_from_json(const ordered_json& j) {
    ModelConfig c;
    try {
        c.vocab_size = j.at("vocab_size").get<int64_t>();
        c.d_model = j.at("d_model").get<int64_t>();
        c.n_heads = j.at("n_heads").get<int64_t>();
        c.d_kv = j.at("d_kv").get<int64_t>();
        c.d_ff = j.at("d_ff").get<int64_t>();
        c.n_enc_layers = j.at("n_enc_layers").get<int64_t>();
        c.n_dec_layers = j.at("n_dec_layers").get<int64_t>();
        c.rel_buckets = j.at("rel_buckets").get<int64_t>();
        c.rel_max_distance = j.at("rel_max_distance").get<int64_t>();
        c.max_positions = j.at("max_positions").get<int64_t>();
        c.activation = activation_from_name(j.at("activation").get<std::string>());
        c.eps = j.at("eps").get<float>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace fusicl
