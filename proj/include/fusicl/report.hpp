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

#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fusicl/errors.hpp"
#include "fusicl/model_config.hpp"

namespace fusicl {

struct ExampleResult {
    std::string id;
    int index = 0;
    // multiple choice
    std::vector<double> option_nll;
    int chosen = -1;
    bool correct = false;
    // generation
    std::string generated;
    double rouge1_f1 = 0.0;
    double rouge2_f1 = 0.0;
    double rougeL_f1 = 0.0;
};

struct PermutationStats {
    int n_orderings = 0;
    double mean = 0.0;
    double std_dev = 0.0;
    std::vector<double> ordering_accuracy;
    // chosen[o][e]: option chosen for example e under ordering o
    std::vector<std::vector<int>> chosen;
};

// Everything one evaluation run produced, with full provenance. Two runs with
// identical arguments serialize byte-identically apart from the timestamp.
struct EvalReport {
    std::string task;
    std::string mode;
    std::string plan_digest;
    int k = 0;
    uint64_t seed = 0;
    std::string sampling;
    int limit = 0;
    int evaluated = 0;
    std::string metric;  // "accuracy" or "rouge"
    double accuracy = 0.0;
    double rouge1_f1 = 0.0;
    double rouge2_f1 = 0.0;
    double rougeL_f1 = 0.0;
    bool has_permutation = false;
    PermutationStats permutation;
    std::vector<ExampleResult> examples;
    std::string timestamp;
};

inline std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline ordered_json report_to_json(const EvalReport& r) {
    ordered_json j;
    j["task"] = r.task;
    j["mode"] = r.mode;
    j["plan_digest"] = r.plan_digest;
    j["k"] = r.k;
    j["seed"] = r.seed;
    j["sampling"] = r.sampling;
    j["limit"] = r.limit;
    j["evaluated"] = r.evaluated;
    j["metric"] = r.metric;
    if (r.metric == "accuracy") {
        j["aggregate"] = ordered_json{{"accuracy", r.accuracy}};
    } else {
        j["aggregate"] = ordered_json{{"rouge1_f1", r.rouge1_f1},
                                      {"rouge2_f1", r.rouge2_f1},
                                      {"rougeL_f1", r.rougeL_f1}};
    }
    if (r.has_permutation) {
        ordered_json p;
        p["n_orderings"] = r.permutation.n_orderings;
        p["mean"] = r.permutation.mean;
        p["std"] = r.permutation.std_dev;
        p["ordering_accuracy"] = r.permutation.ordering_accuracy;
        p["chosen"] = r.permutation.chosen;
        j["permutation"] = p;
    }
    ordered_json examples = ordered_json::array();
    for (const auto& ex : r.examples) {
        ordered_json e;
        e["id"] = ex.id;
        e["index"] = ex.index;
        if (r.metric == "accuracy") {
            e["option_nll"] = ex.option_nll;
            e["chosen"] = ex.chosen;
            e["correct"] = ex.correct;
        } else {
            e["generated"] = ex.generated;
            e["rouge1_f1"] = ex.rouge1_f1;
            e["rouge2_f1"] = ex.rouge2_f1;
            e["rougeL_f1"] = ex.rougeL_f1;
        }
        examples.push_back(e);
    }
    j["examples"] = examples;
    j["timestamp"] = r.timestamp;
    return j;
}

inline EvalReport report_from_json(const ordered_json& j) {
    EvalReport r;
    try {
        r.task = j.at("task").get<std::string>();
        r.mode = j.at("mode").get<std::string>();
        r.plan_digest = j.at("plan_digest").get<std::string>();
        r.k = j.at("k").get<int>();
        r.seed = j.at("seed").get<uint64_t>();
        r.sampling = j.at("sampling").get<std::string>();
        r.limit = j.at("limit").get<int>();
        r.evaluated = j.at("evaluated").get<int>();
        r.metric = j.at("metric").get<std::string>();
        const auto& agg = j.at("aggregate");
        if (r.metric == "accuracy") {
            r.accuracy = agg.at("accuracy").get<double>();
        } else {
            r.rouge1_f1 = agg.at("rouge1_f1").get<double>();
            r.rouge2_f1 = agg.at("rouge2_f1").get<double>();
            r.rougeL_f1 = agg.at("rougeL_f1").get<double>();
        }
        if (j.contains("permutation")) {
            r.has_permutation = true;
            const auto& p = j.at("permutation");
            r.permutation.n_orderings = p.at("n_orderings").get<int>();
            r.permutation.mean = p.at("mean").get<double>();
            r.permutation.std_dev = p.at("std").get<double>();
            r.permutation.ordering_accuracy = p.at("ordering_accuracy").get<std::vector<double>>();
            r.permutation.chosen = p.at("chosen").get<std::vector<std::vector<int>>>();
        }
        for (const auto& e : j.at("examples")) {
            ExampleResult ex;
            ex.id = e.at("id").get<std::string>();
            ex.index = e.at("index").get<int>();
            if (r.metric == "accuracy") {
                ex.option_nll = e.at("option_nll").get<std::vector<double>>();
                ex.chosen = e.at("chosen").get<int>();
                ex.correct = e.at("correct").get<bool>();
            } else {
                ex.generated = e.at("generated").get<std::string>();
                ex.rouge1_f1 = e.at("rouge1_f1").get<double>();
                ex.rouge2_f1 = e.at("rouge2_f1").get<double>();
                ex.rougeL_f1 = e.at("rougeL_f1").get<double>();
            }
            r.examples.push_back(std::move(ex));
        }
        r.timestamp = j.at("timestamp").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
    return r;
}

enum class ReportFormat { json, csv };

inline constexpr const char* kCsvHeader =
    "task,mode,k,seed,sampling,evaluated,accuracy,rouge1_f1,rouge2_f1,rougeL_f1,"
    "perm_mean,perm_std,n_orderings";

namespace detail {

inline std::string csv_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace detail

// json: the full nested report. csv: one flat aggregate row per run, appended;
// the header is written only when the file is new or empty.
inline void emit_report(const EvalReport& r, const std::filesystem::path& path, ReportFormat format) {
    if (format == ReportFormat::json) {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
        out << report_to_json(r).dump(2) << "\n";
        if (!out) throw IoError("failed writing '" + path.string() + "'");
        return;
    }

    const bool need_header =
        !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    if (need_header) out << kCsvHeader << "\n";

    const bool mc = r.metric == "accuracy";
    out << r.task << ',' << r.mode << ',' << r.k << ',' << r.seed << ',' << r.sampling << ','
        << r.evaluated << ',';
    out << (mc ? detail::csv_number(r.accuracy) : "") << ',';
    out << (mc ? "" : detail::csv_number(r.rouge1_f1)) << ',';
    out << (mc ? "" : detail::csv_number(r.rouge2_f1)) << ',';
    out << (mc ? "" : detail::csv_number(r.rougeL_f1)) << ',';
    if (r.has_permutation) {
        out << detail::csv_number(r.permutation.mean) << ',' << detail::csv_number(r.permutation.std_dev)
            << ',' << r.permutation.n_orderings;
    } else {
        out << ",,";
    }
    out << "\n";
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace fusicl
