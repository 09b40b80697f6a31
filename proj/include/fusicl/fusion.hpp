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
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fusicl/model.hpp"
#include "fusicl/rng.hpp"
#include "fusicl/tensor.hpp"
#include "fusicl/tokenizer.hpp"

namespace fusicl {

// The three scoring/generation regimes. original: one encoder pass over the
// whole concatenated prompt. early: per-example encoder passes whose states
// are concatenated before cross-attention. late: per-example full passes
// whose output distributions are mixed uniformly per decoding step.
enum class FusionMode { original, early, late };

inline std::string fusion_mode_name(FusionMode m) {
    switch (m) {
        case FusionMode::original: return "original";
        case FusionMode::early: return "early";
        default: return "late";
    }
}

inline FusionMode fusion_mode_from_name(const std::string& name) {
    if (name == "original") return FusionMode::original;
    if (name == "early") return FusionMode::early;
    if (name == "late") return FusionMode::late;
    throw ValidationError("unknown mode '" + name + "' (expected original, early, or late)");
}

// Teacher-forced score of one candidate output. total_nll is the raw sum of
// per-token negative log-likelihoods in nats; no length normalization.
struct OptionScore {
    int option_index = 0;
    double total_nll = 0.0;
    std::vector<double> per_token_nll;
    int token_count = 0;
};

namespace detail {

// Canonical pass order for late fusion: sorted by content hash (ties broken
// by the content itself), independent of the order the caller supplied. This
// turns mixture commutativity into a bitwise guarantee.
inline std::vector<size_t> canonical_pass_order(std::span<const EncoderStates> enc_inputs) {
    std::vector<uint64_t> hashes(enc_inputs.size());
    for (size_t i = 0; i < enc_inputs.size(); ++i) {
        uint64_t h = fnv1a64(&enc_inputs[i].seq_len, sizeof(int64_t));
        hashes[i] = fnv1a64(enc_inputs[i].states.data.data(), enc_inputs[i].states.data.size() * 4, h);
    }
    std::vector<size_t> order(enc_inputs.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (hashes[a] != hashes[b]) return hashes[a] < hashes[b];
        return std::lexicographical_compare(
            enc_inputs[a].states.data.begin(), enc_inputs[a].states.data.end(),
            enc_inputs[b].states.data.begin(), enc_inputs[b].states.data.end());
    });
    return order;
}

inline void check_mode_inputs(FusionMode mode, std::span<const EncoderStates> enc_inputs) {
    if (enc_inputs.empty()) throw ArgumentError("fusion: at least one encoder input is required");
    if (mode == FusionMode::original && enc_inputs.size() != 1) {
        throw ArgumentError("original mode expects exactly one encoder input, got " +
                            std::to_string(enc_inputs.size()));
    }
}

// Uniform probability-space mixture of per-pass log-probability rows:
// log p(y) = logsumexp_j(log p_j(y)) - log k, summed in canonical pass order.
inline Tensor mix_log_probs(const std::vector<Tensor>& pass_log_probs, const std::vector<size_t>& order) {
    const int64_t vocab = pass_log_probs[0].shape[0];
    const double log_k = std::log(static_cast<double>(pass_log_probs.size()));
    Tensor out({vocab});
    std::vector<double> vals(pass_log_probs.size());
    for (int64_t t = 0; t < vocab; ++t) {
        for (size_t j = 0; j < order.size(); ++j) {
            vals[j] = static_cast<double>(pass_log_probs[order[j]].data[t]);
        }
        out.data[t] = static_cast<float>(log_sum_exp(vals) - log_k);
    }
    out.ensure_finite("mix_log_probs");
    return out;
}

}  // namespace detail

// Log-probability distribution over the next token given the decoded prefix.
// original/early run one decoder pass (early over block-concatenated states,
// in the caller's order); late mixes the k per-pass distributions uniformly.
inline Tensor next_token_dist(const Checkpoint& ckpt, FusionMode mode,
                              std::span<const EncoderStates> enc_inputs, std::span<const int> prefix) {
    detail::check_mode_inputs(mode, enc_inputs);
    if (mode == FusionMode::original) {
        return log_softmax_1d(decode_step(ckpt, enc_inputs[0], prefix));
    }
    if (mode == FusionMode::early) {
        const EncoderStates fused = concat_encoder_states(enc_inputs);
        return log_softmax_1d(decode_step(ckpt, fused, prefix));
    }
    std::vector<Tensor> pass_log_probs;
    pass_log_probs.reserve(enc_inputs.size());
    for (const auto& enc : enc_inputs) {
        pass_log_probs.push_back(log_softmax_1d(decode_step(ckpt, enc, prefix)));
    }
    return detail::mix_log_probs(pass_log_probs, detail::canonical_pass_order(enc_inputs));
}

// Teacher-forced negative log-likelihood of target_ids after
// decoder_prefix_ids. One full decoder pass per encoder input (causal
// attention makes this bitwise-equal to stepwise decode_step composition).
// per_token_mean exists for ablation only; the default reports the raw sum.
inline OptionScore score_option(const Checkpoint& ckpt, FusionMode mode,
                                std::span<const EncoderStates> enc_inputs,
                                std::span<const int> decoder_prefix_ids, std::span<const int> target_ids,
                                bool per_token_mean = false, int option_index = 0) {
    detail::check_mode_inputs(mode, enc_inputs);
    if (target_ids.empty()) throw ArgumentError("score_option: target must be nonempty");

    std::vector<int> seq;
    seq.reserve(1 + decoder_prefix_ids.size() + target_ids.size());
    seq.push_back(tokens::pad_id);
    seq.insert(seq.end(), decoder_prefix_ids.begin(), decoder_prefix_ids.end());
    seq.insert(seq.end(), target_ids.begin(), target_ids.end());
    const int64_t first_scored_row = static_cast<int64_t>(decoder_prefix_ids.size());

    auto row_log_probs = [&](const Tensor& logits, int64_t row) {
        const int64_t vocab = logits.shape[1];
        Tensor r({vocab});
        const float* src = logits.row(row);
        for (int64_t i = 0; i < vocab; ++i) r.data[i] = src[i];
        return log_softmax_1d(r);
    };

    OptionScore score;
    score.option_index = option_index;
    score.token_count = static_cast<int>(target_ids.size());
    score.per_token_nll.resize(target_ids.size());

    if (mode == FusionMode::late) {
        const auto order = detail::canonical_pass_order(enc_inputs);
        std::vector<std::vector<double>> per_pass_target_lp(target_ids.size(),
                                                            std::vector<double>(enc_inputs.size()));
        for (size_t j = 0; j < order.size(); ++j) {
            const Tensor logits = decoder_forward(ckpt, enc_inputs[order[j]], seq);
            for (size_t i = 0; i < target_ids.size(); ++i) {
                const Tensor lp = row_log_probs(logits, first_scored_row + static_cast<int64_t>(i));
                per_pass_target_lp[i][j] = static_cast<double>(lp.data[target_ids[i]]);
            }
        }
        const double log_k = std::log(static_cast<double>(enc_inputs.size()));
        for (size_t i = 0; i < target_ids.size(); ++i) {
            score.per_token_nll[i] = -(log_sum_exp(per_pass_target_lp[i]) - log_k);
        }
    } else {
        EncoderStates fused;
        const EncoderStates* enc = &enc_inputs[0];
        if (mode == FusionMode::early) {
            fused = concat_encoder_states(enc_inputs);
            enc = &fused;
        }
        const Tensor logits = decoder_forward(ckpt, *enc, seq);
        for (size_t i = 0; i < target_ids.size(); ++i) {
            const Tensor lp = row_log_probs(logits, first_scored_row + static_cast<int64_t>(i));
            score.per_token_nll[i] = -static_cast<double>(lp.data[target_ids[i]]);
        }
    }

    double total = 0.0;
    for (double nll : score.per_token_nll) total += nll;
    score.total_nll = per_token_mean ? total / static_cast<double>(target_ids.size()) : total;
    return score;
}

// Lowest cross-entropy wins; exact ties resolve to the lowest option index.
inline int select_option(std::span<const OptionScore> scores) {
    if (scores.empty()) throw ArgumentError("select_option: no scores");
    size_t best = 0;
    for (size_t i = 1; i < scores.size(); ++i) {
        if (scores[i].total_nll < scores[best].total_nll) best = i;
    }
    return static_cast<int>(best);
}

// Greedy decoding: per-step argmax over next_token_dist (ties to the lowest
// token id) until eos or the budget runs out. Returns the generated tokens
// with eos excluded.
inline std::vector<int> greedy_generate(const Checkpoint& ckpt, FusionMode mode,
                                        std::span<const EncoderStates> enc_inputs,
                                        std::span<const int> decoder_prefix_ids, int max_new_tokens) {
    detail::check_mode_inputs(mode, enc_inputs);
    if (max_new_tokens < 1) throw ArgumentError("greedy_generate: max_new_tokens must be >= 1");

    std::vector<int> prefix(decoder_prefix_ids.begin(), decoder_prefix_ids.end());
    std::vector<int> generated;
    for (int step = 0; step < max_new_tokens; ++step) {
        const Tensor dist = next_token_dist(ckpt, mode, enc_inputs, prefix);
        const int next = argmax(dist.data);
        if (next == tokens::eos_id) break;
        generated.push_back(next);
        prefix.push_back(next);
    }
    return generated;
}

}  // namespace fusicl
