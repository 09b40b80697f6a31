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
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "fusicl/checkpoint.hpp"
#include "fusicl/tensor.hpp"
#include "fusicl/tokenizer.hpp"

namespace fusicl {

// Final encoder hidden states for one input sequence. Immutable once built;
// any number of decoder passes may share it.
struct EncoderStates {
    Tensor states;  // [seq_len x d_model]
    int64_t seq_len = 0;
    bool over_max_positions = false;
};

// T5-lineage relative position bucketing: an exact bucket per small distance,
// a logarithmic regime up to max_distance, clamped beyond. Bidirectional
// attention folds the sign into the upper half of the buckets.
inline int relative_position_bucket(int64_t relative_position, bool bidirectional,
                                    int64_t num_buckets, int64_t max_distance) {
    int64_t bucket = 0;
    int64_t n;
    if (bidirectional) {
        num_buckets /= 2;
        if (relative_position > 0) bucket += num_buckets;
        n = relative_position < 0 ? -relative_position : relative_position;
    } else {
        n = relative_position < 0 ? -relative_position : 0;
    }
    const int64_t max_exact = num_buckets / 2;
    if (n < max_exact) {
        bucket += n;
    } else {
        const double ratio = std::log(static_cast<double>(n) / static_cast<double>(max_exact)) /
                             std::log(static_cast<double>(max_distance) / static_cast<double>(max_exact));
        int64_t large = max_exact + static_cast<int64_t>(ratio * static_cast<double>(num_buckets - max_exact));
        if (large > num_buckets - 1) large = num_buckets - 1;
        bucket += large;
    }
    return static_cast<int>(bucket);
}

namespace detail {

// Gather embedding rows; validates every id against the vocabulary.
inline Tensor embed_rows(const Checkpoint& ckpt, std::span<const int> ids) {
    const Tensor& table = ckpt.tensor("embedding");
    const int64_t d = table.shape[1];
    Tensor out({static_cast<int64_t>(ids.size()), d});
    for (size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= ckpt.config.vocab_size) {
            throw TokenError("token id " + std::to_string(ids[i]) + " at position " + std::to_string(i) +
                             " is outside vocabulary of size " + std::to_string(ckpt.config.vocab_size));
        }
        const float* src = table.row(ids[i]);
        float* dst = out.row(static_cast<int64_t>(i));
        for (int64_t c = 0; c < d; ++c) dst[c] = src[c];
    }
    return out;
}

// Per-head additive bias [n_heads x tq x tk] from the stack's shared bucket
// table, bias[h][i][j] = table[bucket(j - i)][h].
inline Tensor relative_bias(const Tensor& table, int64_t tq, int64_t tk, bool bidirectional,
                            int64_t num_buckets, int64_t max_distance) {
    const int64_t n_heads = table.shape[1];
    Tensor bias({n_heads, tq, tk});
    for (int64_t i = 0; i < tq; ++i) {
        for (int64_t j = 0; j < tk; ++j) {
            const int bucket = relative_position_bucket(j - i, bidirectional, num_buckets, max_distance);
            for (int64_t h = 0; h < n_heads; ++h) {
                bias.data[(h * tq + i) * tk + j] = table.at2(bucket, h);
            }
        }
    }
    return bias;
}

struct AttentionWeights {
    const Tensor* wq;
    const Tensor* wk;
    const Tensor* wv;
    const Tensor* wo;
};

inline AttentionWeights attn_weights(const Checkpoint& ckpt, const std::string& prefix) {
    return {&ckpt.tensor(prefix + ".wq"), &ckpt.tensor(prefix + ".wk"), &ckpt.tensor(prefix + ".wv"),
            &ckpt.tensor(prefix + ".wo")};
}

// Scaled dot-product multi-head attention. bias, when present, is
// [n_heads x tq x tk]; causal masks positions j > i. Cross-attention passes
// bias == nullptr: scores there depend only on content, never on position.
inline Tensor attention(const Tensor& x_q, const Tensor& x_kv, const AttentionWeights& w,
                        int64_t n_heads, int64_t d_kv, const Tensor* bias, bool causal) {
    const Tensor q = matmul(x_q, *w.wq);
    const Tensor k = matmul(x_kv, *w.wk);
    const Tensor v = matmul(x_kv, *w.wv);
    const int64_t tq = q.shape[0], tk = k.shape[0];
    const int64_t inner = n_heads * d_kv;
    const float scale = 1.0f / std::sqrt(static_cast<float>(d_kv));

    Tensor context({tq, inner});
    Tensor scores({tq, tk});
    for (int64_t h = 0; h < n_heads; ++h) {
        const int64_t off = h * d_kv;
        for (int64_t i = 0; i < tq; ++i) {
            const float* qi = q.row(i) + off;
            float* srow = scores.row(i);
            for (int64_t j = 0; j < tk; ++j) {
                const float* kj = k.row(j) + off;
                float dot = 0.0f;
                for (int64_t c = 0; c < d_kv; ++c) dot += qi[c] * kj[c];
                float s = dot * scale;
                if (bias) s += bias->data[(h * tq + i) * tk + j];
                if (causal && j > i) s = -1e30f;
                srow[j] = s;
            }
        }
        const Tensor weights = softmax(scores);
        for (int64_t i = 0; i < tq; ++i) {
            const float* wi = weights.row(i);
            float* ci = context.row(i) + off;
            for (int64_t j = 0; j < tk; ++j) {
                const float wij = wi[j];
                const float* vj = v.row(j) + off;
                for (int64_t c = 0; c < d_kv; ++c) ci[c] += wij * vj[c];
            }
        }
    }
    return matmul(context, *w.wo);
}

inline void apply_activation(Tensor& t, Activation act) {
    if (act == Activation::relu) {
        for (float& x : t.data) x = x > 0.0f ? x : 0.0f;
    } else {
        // tanh approximation of GELU
        constexpr float c = 0.7978845608028654f;  // sqrt(2/pi)
        for (float& x : t.data) {
            x = 0.5f * x * (1.0f + std::tanh(c * (x + 0.044715f * x * x * x)));
        }
    }
}

inline Tensor ffn(const Tensor& x, const Tensor& wi, const Tensor& wo, Activation act) {
    Tensor h = matmul(x, wi);
    apply_activation(h, act);
    return matmul(h, wo);
}

inline void add_inplace(Tensor& x, const Tensor& y) {
    for (size_t i = 0; i < x.data.size(); ++i) x.data[i] += y.data[i];
}

}  // namespace detail

// Encoder forward pass: pre-norm residual blocks with RMS normalization,
// bidirectional self-attention with shared relative bias, final norm.
// Inputs longer than max_positions are processed but flagged (RPE
// extrapolation degrades there); the harness decides what to do about it.
inline EncoderStates encode(const Checkpoint& ckpt, std::span<const int> tokens) {
    if (tokens.empty()) throw ArgumentError("encode: token sequence must be nonempty");
    const ModelConfig& cfg = ckpt.config;
    const int64_t t = static_cast<int64_t>(tokens.size());

    Tensor x = detail::embed_rows(ckpt, tokens);
    const Tensor bias = detail::relative_bias(ckpt.tensor("encoder.rel_bias"), t, t,
                                              /*bidirectional=*/true, cfg.rel_buckets, cfg.rel_max_distance);
    for (int64_t l = 0; l < cfg.n_enc_layers; ++l) {
        const std::string p = "encoder.block" + std::to_string(l) + ".";
        const Tensor normed = rms_norm(x, ckpt.tensor(p + "self_attn_norm"), cfg.eps);
        detail::add_inplace(x, detail::attention(normed, normed, detail::attn_weights(ckpt, p + "self_attn"),
                                                 cfg.n_heads, cfg.d_kv, &bias, /*causal=*/false));
        const Tensor normed_ffn = rms_norm(x, ckpt.tensor(p + "ffn_norm"), cfg.eps);
        detail::add_inplace(x, detail::ffn(normed_ffn, ckpt.tensor(p + "ffn.wi"), ckpt.tensor(p + "ffn.wo"),
                                           cfg.activation));
    }
    EncoderStates out;
    out.states = rms_norm(x, ckpt.tensor("encoder.final_norm"), cfg.eps);
    out.seq_len = t;
    out.over_max_positions = t > cfg.max_positions;
    if (out.over_max_positions) {
        std::fprintf(stderr, "warning: encoder input of %lld tokens exceeds max_positions %lld; "
                             "relative-position extrapolation degrades beyond this length\n",
                     static_cast<long long>(t), static_cast<long long>(cfg.max_positions));
    }
    return out;
}

// Full teacher-forced decoder pass over decoder_tokens: causal self-attention
// with relative bias, position-free cross-attention over enc.states, FFN,
// final norm, LM head. Returns logits [len(decoder_tokens) x vocab_size];
// row i predicts the token after decoder_tokens[i].
inline Tensor decoder_forward(const Checkpoint& ckpt, const EncoderStates& enc,
                              std::span<const int> decoder_tokens) {
    if (enc.seq_len < 1) throw ArgumentError("decoder_forward: encoder states must be nonempty");
    if (decoder_tokens.empty()) throw ArgumentError("decoder_forward: decoder tokens must be nonempty");
    const ModelConfig& cfg = ckpt.config;
    const int64_t t = static_cast<int64_t>(decoder_tokens.size());

    Tensor x = detail::embed_rows(ckpt, decoder_tokens);
    const Tensor self_bias = detail::relative_bias(ckpt.tensor("decoder.rel_bias"), t, t,
                                                   /*bidirectional=*/false, cfg.rel_buckets,
                                                   cfg.rel_max_distance);
    for (int64_t l = 0; l < cfg.n_dec_layers; ++l) {
        const std::string p = "decoder.block" + std::to_string(l) + ".";
        const Tensor normed_self = rms_norm(x, ckpt.tensor(p + "self_attn_norm"), cfg.eps);
        detail::add_inplace(x, detail::attention(normed_self, normed_self,
                                                 detail::attn_weights(ckpt, p + "self_attn"), cfg.n_heads,
                                                 cfg.d_kv, &self_bias, /*causal=*/true));
        const Tensor normed_cross = rms_norm(x, ckpt.tensor(p + "cross_attn_norm"), cfg.eps);
        detail::add_inplace(x, detail::attention(normed_cross, enc.states,
                                                 detail::attn_weights(ckpt, p + "cross_attn"), cfg.n_heads,
                                                 cfg.d_kv, /*bias=*/nullptr, /*causal=*/false));
        const Tensor normed_ffn = rms_norm(x, ckpt.tensor(p + "ffn_norm"), cfg.eps);
        detail::add_inplace(x, detail::ffn(normed_ffn, ckpt.tensor(p + "ffn.wi"), ckpt.tensor(p + "ffn.wo"),
                                           cfg.activation));
    }
    x = rms_norm(x, ckpt.tensor("decoder.final_norm"), cfg.eps);
    return matmul(x, ckpt.tensor("lm_head"));
}

// Next-token logits after the given prefix. Step 0 (empty prefix) feeds the
// pad token as the decoder start token.
inline Tensor decode_step(const Checkpoint& ckpt, const EncoderStates& enc, std::span<const int> prefix) {
    std::vector<int> seq;
    seq.reserve(prefix.size() + 1);
    seq.push_back(tokens::pad_id);
    seq.insert(seq.end(), prefix.begin(), prefix.end());
    const Tensor logits = decoder_forward(ckpt, enc, seq);
    const int64_t vocab = logits.shape[1];
    Tensor out({vocab});
    const float* last = logits.row(logits.shape[0] - 1);
    for (int64_t i = 0; i < vocab; ++i) out.data[i] = last[i];
    return out;
}

// Row-concatenation of encoder state blocks, in the given order.
inline EncoderStates concat_encoder_states(std::span<const EncoderStates> blocks) {
    if (blocks.empty()) throw ArgumentError("concat_encoder_states: empty input");
    const int64_t d = blocks[0].states.shape[1];
    int64_t total = 0;
    bool over = false;
    for (const auto& b : blocks) {
        if (b.states.rank() != 2 || b.states.shape[1] != d) {
            throw ShapeError("concat_encoder_states: inconsistent state widths");
        }
        total += b.seq_len;
        over = over || b.over_max_positions;
    }
    EncoderStates out;
    out.states = Tensor({total, d});
    out.seq_len = total;
    out.over_max_positions = over;
    int64_t r = 0;
    for (const auto& b : blocks) {
        for (int64_t i = 0; i < b.seq_len; ++i, ++r) {
            const float* src = b.states.row(i);
            float* dst = out.states.row(r);
            for (int64_t c = 0; c < d; ++c) dst[c] = src[c];
        }
    }
    return out;
}

}  // namespace fusicl
