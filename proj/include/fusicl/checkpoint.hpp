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

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "fusicl/model_config.hpp"
#include "fusicl/rng.hpp"
#include "fusicl/tensor.hpp"

namespace fusicl {

// Single-file checkpoint layout:
//   bytes 0-7    magic "FUSICL01"
//   bytes 8-15   uint64 little-endian manifest length L
//   next L bytes UTF-8 JSON manifest {"config": ..., "tensors": {name:
//                {"shape": [...], "byte_offset": N, "byte_len": N}}}
//   remainder    raw little-endian float32 data; byte_offset is relative to
//                the start of the data section
inline constexpr char kCheckpointMagic[8] = {'F', 'U', 'S', 'I', 'C', 'L', '0', '1'};

struct Checkpoint {
    ModelConfig config;
    std::map<std::string, Tensor> tensors;

    const Tensor& tensor(const std::string& name) const {
        auto it = tensors.find(name);
        if (it == tensors.end()) throw FormatError("checkpoint is missing tensor '" + name + "'");
        return it->second;
    }

    void validate() const {
        config.validate();
        const auto expected = expected_tensors(config);
        for (const auto& [name, shape] : expected) {
            auto it = tensors.find(name);
            if (it == tensors.end()) throw FormatError("checkpoint is missing tensor '" + name + "'");
            if (it->second.shape != shape) {
                throw FormatError("tensor '" + name + "' has shape " + shape_str(it->second.shape) +
                                  ", expected " + shape_str(shape));
            }
        }
        for (const auto& [name, t] : tensors) {
            if (!expected.count(name)) throw FormatError("checkpoint has unexpected tensor '" + name + "'");
        }
    }

    // Canonical name -> shape table for every weight the forward pass reads.
    static std::map<std::string, std::vector<int64_t>> expected_tensors(const ModelConfig& c) {
        std::map<std::string, std::vector<int64_t>> t;
        const int64_t inner = c.inner_dim();
        t["embedding"] = {c.vocab_size, c.d_model};
        t["lm_head"] = {c.d_model, c.vocab_size};
        t["encoder.rel_bias"] = {c.rel_buckets, c.n_heads};
        t["decoder.rel_bias"] = {c.rel_buckets, c.n_heads};
        t["encoder.final_norm"] = {c.d_model};
        t["decoder.final_norm"] = {c.d_model};
        for (int64_t l = 0; l < c.n_enc_layers; ++l) {
            const std::string p = "encoder.block" + std::to_string(l) + ".";
            t[p + "self_attn.wq"] = {c.d_model, inner};
            t[p + "self_attn.wk"] = {c.d_model, inner};
            t[p + "self_attn.wv"] = {c.d_model, inner};
            t[p + "self_attn.wo"] = {inner, c.d_model};
            t[p + "self_attn_norm"] = {c.d_model};
            t[p + "ffn.wi"] = {c.d_model, c.d_ff};
            t[p + "ffn.wo"] = {c.d_ff, c.d_model};
            t[p + "ffn_norm"] = {c.d_model};
        }
        for (int64_t l = 0; l < c.n_dec_layers; ++l) {
            const std::string p = "decoder.block" + std::to_string(l) + ".";
            t[p + "self_attn.wq"] = {c.d_model, inner};
            t[p + "self_attn.wk"] = {c.d_model, inner};
            t[p + "self_attn.wv"] = {c.d_model, inner};
            t[p + "self_attn.wo"] = {inner, c.d_model};
            t[p + "self_attn_norm"] = {c.d_model};
            t[p + "cross_attn.wq"] = {c.d_model, inner};
            t[p + "cross_attn.wk"] = {c.d_model, inner};
            t[p + "cross_attn.wv"] = {c.d_model, inner};
            t[p + "cross_attn.wo"] = {inner, c.d_model};
            t[p + "cross_attn_norm"] = {c.d_model};
            t[p + "ffn.wi"] = {c.d_model, c.d_ff};
            t[p + "ffn.wo"] = {c.d_ff, c.d_model};
            t[p + "ffn_norm"] = {c.d_model};
        }
        return t;
    }
};

// Seeded toy checkpoint. Norm weights start at 1; every other tensor is drawn
// uniform in [-1, 1) scaled by 1/sqrt(d_model) from a per-tensor xoshiro256**
// stream seeded with seed ^ fnv1a64(tensor name). Identical (config, seed)
// pairs produce byte-identical checkpoints on every platform.
inline Checkpoint init_toy(const ModelConfig& config, uint64_t seed) {
    config.validate();
    Checkpoint ckpt;
    ckpt.config = config;
    const float scale = 1.0f / std::sqrt(static_cast<float>(config.d_model));
    for (const auto& [name, shape] : Checkpoint::expected_tensors(config)) {
        Tensor t(shape);
        if (name.find("norm") != std::string::npos) {
            for (float& v : t.data) v = 1.0f;
        } else {
            Xoshiro256 rng(seed ^ fnv1a64(name));
            for (float& v : t.data) v = (2.0f * rng.next_float() - 1.0f) * scale;
        }
        ckpt.tensors.emplace(name, std::move(t));
    }
    return ckpt;
}

namespace detail {

inline void put_u64_le(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline uint64_t get_u64_le(const unsigned char* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    return v;
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    ckpt.validate();

    ordered_json manifest;
    manifest["config"] = config_to_json(ckpt.config);
    ordered_json table = ordered_json::object();
    uint64_t offset = 0;
    for (const auto& [name, t] : ckpt.tensors) {  // std::map order: sorted by name
        ordered_json entry;
        entry["shape"] = t.shape;
        entry["byte_offset"] = offset;
        entry["byte_len"] = static_cast<uint64_t>(t.data.size()) * 4;
        table[name] = entry;
        offset += static_cast<uint64_t>(t.data.size()) * 4;
    }
    manifest["tensors"] = table;
    const std::string manifest_str = manifest.dump();

    std::string header;
    header.append(kCheckpointMagic, 8);
    detail::put_u64_le(header, manifest_str.size());

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(manifest_str.data(), static_cast<std::streamsize>(manifest_str.size()));
    for (const auto& [name, t] : ckpt.tensors) {
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.data.size() * 4));
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (bytes.size() < 16 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) {
        throw FormatError("bad magic in '" + path.string() + "' (not a FUSICL01 checkpoint)");
    }
    const uint64_t manifest_len = detail::get_u64_le(bytes.data() + 8);
    if (16 + manifest_len > bytes.size()) {
        throw FormatError("truncated manifest in '" + path.string() + "'");
    }

    ordered_json manifest;
    try {
        manifest = ordered_json::parse(bytes.begin() + 16, bytes.begin() + 16 + manifest_len);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
    }

    Checkpoint ckpt;
    const unsigned char* data = bytes.data() + 16 + manifest_len;
    const uint64_t data_len = bytes.size() - 16 - manifest_len;
    try {
        ckpt.config = config_from_json(manifest.at("config"));
        for (const auto& [name, entry] : manifest.at("tensors").items()) {
            const auto shape = entry.at("shape").get<std::vector<int64_t>>();
            const auto byte_offset = entry.at("byte_offset").get<uint64_t>();
            const auto byte_len = entry.at("byte_len").get<uint64_t>();
            if (shape.empty()) throw FormatError("tensor '" + name + "': empty shape");
            uint64_t numel = 1;
            for (int64_t d : shape) {
                if (d <= 0) throw FormatError("tensor '" + name + "': non-positive dimension");
                numel *= static_cast<uint64_t>(d);
            }
            const uint64_t expected_len = numel * 4;
            if (byte_len != expected_len) {
                throw FormatError("tensor '" + name + "': declared byte_len " + std::to_string(byte_len) +
                                  " does not match shape " + shape_str(shape));
            }
            if (byte_offset + byte_len > data_len) {
                throw FormatError("tensor '" + name + "': data blob is truncated");
            }
            std::vector<float> values(byte_len / 4);
            std::memcpy(values.data(), data + byte_offset, byte_len);
            for (float v : values) {
                if (!std::isfinite(v)) throw FormatError("tensor '" + name + "' contains non-finite values");
            }
            ckpt.tensors.emplace(name, Tensor(shape, std::move(values)));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed manifest: ") + e.what());
    }
    ckpt.validate();
    return ckpt;
}

}  // namespace fusicl
