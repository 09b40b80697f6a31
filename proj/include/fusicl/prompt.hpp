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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fusicl/errors.hpp"
#include "fusicl/tokenizer.hpp"

namespace fusicl {

inline constexpr const char* kSentinel = "<extra_id_0>";

enum class Placement { encoder, decoder };

inline std::string placement_name(Placement p) { return p == Placement::encoder ? "encoder" : "decoder"; }

inline Placement placement_from_name(const std::string& name) {
    if (name == "encoder") return Placement::encoder;
    if (name == "decoder") return Placement::decoder;
    throw ValidationError("unknown placement '" + name + "' (expected encoder or decoder)");
}

// Every alignment switch for prompt construction: where the target input
// goes, whether a sentinel ties encoder input to target output, and an
// optional mode tag prefixed to every encoder input.
struct PromptPlan {
    Placement placement = Placement::encoder;
    bool use_sentinel = false;
    std::string mode_tag;  // empty = none; otherwise one of [NLU] [NLG] [S2S]
    std::string input_template;
    std::string target_template;
    std::string separator = "\n\n";
};

inline void validate_plan(const PromptPlan& plan) {
    if (!plan.mode_tag.empty()) {
        bool known = false;
        for (auto tag : tokens::mode_tags()) known = known || plan.mode_tag == tag;
        if (!known) throw PlanError("mode_tag '" + plan.mode_tag + "' is not one of [NLU], [NLG], [S2S]");
    }
    if (plan.use_sentinel && plan.placement == Placement::decoder) {
        throw PlanError("sentinel alignment requires encoder placement of the target input");
    }
}

// One worked example: its input fields plus the gold output string.
struct DemoRecord {
    std::map<std::string, std::string> fields;
    std::string output;
};

// The demonstrations z_1..z_k, the target input x, and the candidate outputs
// (multiple choice) or gold reference (generation).
struct FewShotInstance {
    std::vector<DemoRecord> demonstrations;
    std::map<std::string, std::string> target_fields;
    std::vector<std::string> options;
    std::string reference;
};

namespace detail {

// Substitutes {field} placeholders from the record; placeholders missing from
// the record fall back to `output` when one is supplied (this is how a
// candidate string lands in the answer slot of a target template).
inline std::string render_template(const std::string& tmpl, const std::map<std::string, std::string>& fields,
                                   const std::string* output) {
    std::string out;
    out.reserve(tmpl.size());
    size_t pos = 0;
    while (pos < tmpl.size()) {
        if (tmpl[pos] != '{') {
            out += tmpl[pos++];
            continue;
        }
        const size_t close = tmpl.find('}', pos + 1);
        if (close == std::string::npos) {
            throw TemplateError("unterminated placeholder in template '" + tmpl + "'");
        }
        const std::string name = tmpl.substr(pos + 1, close - pos - 1);
        auto it = fields.find(name);
        if (it != fields.end()) {
            out += it->second;
        } else if (output) {
            out += *output;
        } else {
            throw TemplateError("template field '" + name + "' is not present in the record");
        }
        pos = close + 1;
    }
    return out;
}

inline std::string render_demo(const PromptPlan& plan, const DemoRecord& demo) {
    return render_template(plan.input_template, demo.fields, nullptr) +
           render_template(plan.target_template, demo.fields, &demo.output);
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace detail

// Closure that renders a candidate output (or reference) into target-output
// text, with the sentinel prefix when the plan aligns to the denoising
// objective.
struct TargetRenderer {
    std::string target_template;
    std::map<std::string, std::string> target_fields;
    bool sentinel_prefix = false;

    std::string operator()(const std::string& candidate) const {
        std::string rendered = detail::render_template(target_template, target_fields, &candidate);
        return sentinel_prefix ? kSentinel + rendered : rendered;
    }
};

struct ConcatPrompt {
    std::string encoder_text;
    std::string decoder_prefix;
    TargetRenderer render_target;
};

struct FusedPrompts {
    std::vector<std::string> encoder_texts;  // element j depends only on z_j, x, plan
    TargetRenderer render_target;
};

// Single-pass prompt: all demonstrations plus (for encoder placement) the
// target input concatenated into one encoder input. Encoder placement ends
// the input with the sentinel and prefixes targets with it; decoder placement
// feeds the target input through the decoder instead.
inline ConcatPrompt build_concat_prompt(const FewShotInstance& instance, const PromptPlan& plan) {
    validate_plan(plan);
    std::vector<std::string> parts;
    parts.reserve(instance.demonstrations.size() + 1);
    for (const auto& demo : instance.demonstrations) parts.push_back(detail::render_demo(plan, demo));

    ConcatPrompt out;
    out.render_target = TargetRenderer{plan.target_template, instance.target_fields,
                                       plan.use_sentinel && plan.placement == Placement::encoder};
    const std::string tag_prefix = plan.mode_tag.empty() ? "" : plan.mode_tag + " ";
    if (plan.placement == Placement::encoder) {
        parts.push_back(detail::render_template(plan.input_template, instance.target_fields, nullptr));
        out.encoder_text = tag_prefix + detail::join(parts, plan.separator) +
                           (plan.use_sentinel ? kSentinel : "");
        out.decoder_prefix.clear();
    } else {
        out.encoder_text = tag_prefix + detail::join(parts, plan.separator);
        out.decoder_prefix = detail::render_template(plan.input_template, instance.target_fields, nullptr);
    }
    return out;
}

// Per-example prompts for fusion: element j pairs demonstration z_j alone
// with the target input. Defined only for encoder placement and k >= 1.
inline FusedPrompts build_fused_prompts(const FewShotInstance& instance, const PromptPlan& plan) {
    validate_plan(plan);
    if (plan.placement != Placement::encoder) {
        throw PlanError("fusion requires encoder placement of the target input");
    }
    if (instance.demonstrations.empty()) {
        throw PlanError("fusion requires at least one demonstration");
    }
    const std::string tag_prefix = plan.mode_tag.empty() ? "" : plan.mode_tag + " ";
    const std::string target_input =
        detail::render_template(plan.input_template, instance.target_fields, nullptr);

    FusedPrompts out;
    out.render_target = TargetRenderer{plan.target_template, instance.target_fields, plan.use_sentinel};
    out.encoder_texts.reserve(instance.demonstrations.size());
    for (const auto& demo : instance.demonstrations) {
        out.encoder_texts.push_back(tag_prefix + detail::render_demo(plan, demo) + plan.separator +
                                    target_input + (plan.use_sentinel ? kSentinel : ""));
    }
    return out;
}

}  // namespace fusicl
