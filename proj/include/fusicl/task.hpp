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

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fusicl/errors.hpp"
#include "fusicl/prompt.hpp"

namespace fusicl {

enum class TaskKind { multiple_choice, generation };

inline std::string task_kind_name(TaskKind k) {
    return k == TaskKind::multiple_choice ? "multiple_choice" : "generation";
}

struct TaskExample {
    std::string id;
    std::map<std::string, std::string> fields;
    std::vector<std::string> options;  // multiple choice
    int answer_idx = -1;
    std::string reference;  // generation

    // The gold output string, usable as a demonstration answer.
    const std::string& output() const {
        return options.empty() ? reference : options[static_cast<size_t>(answer_idx)];
    }
};

struct Task {
    std::string name;
    TaskKind kind = TaskKind::multiple_choice;
    std::vector<TaskExample> examples;
    std::string template_ref;
};

// JSONL task file, one example per line:
//   {"id": ..., "fields": {...}, "options": [...], "answer_idx": N}
//   {"id": ..., "fields": {...}, "reference": "..."}
// All lines must be the same kind; ids must be unique.
inline Task load_task(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open task file '" + path.string() + "'");

    Task task;
    task.name = path.stem().string();
    std::set<std::string> seen_ids;
    std::string line;
    int line_no = 0;
    bool kind_set = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }

        const std::string where = "line " + std::to_string(line_no);
        TaskExample ex;
        try {
            ex.id = j.at("id").get<std::string>();
            for (const auto& [k, v] : j.at("fields").items()) {
                if (!v.is_string()) throw ValidationError(where + ": field '" + k + "' must be a string");
                ex.fields[k] = v.get<std::string>();
            }
            const bool has_options = j.contains("options");
            const bool has_reference = j.contains("reference");
            if (has_options == has_reference) {
                throw ValidationError(where + ": exactly one of options/reference must be present");
            }
            if (has_options) {
                ex.options = j.at("options").get<std::vector<std::string>>();
                ex.answer_idx = j.at("answer_idx").get<int>();
                if (ex.options.empty()) throw ValidationError(where + ": options must be nonempty");
                if (ex.answer_idx < 0 || ex.answer_idx >= static_cast<int>(ex.options.size())) {
                    throw ValidationError(where + ": answer_idx " + std::to_string(ex.answer_idx) +
                                          " out of range for " + std::to_string(ex.options.size()) +
                                          " options");
                }
            } else {
                ex.reference = j.at("reference").get<std::string>();
                if (ex.reference.empty()) throw ValidationError(where + ": reference must be nonempty");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(where + ": " + e.what());
        }

        const TaskKind kind = ex.options.empty() ? TaskKind::generation : TaskKind::multiple_choice;
        if (!kind_set) {
            task.kind = kind;
            kind_set = true;
        } else if (kind != task.kind) {
            throw ValidationError(where + ": example kind differs from the rest of the task");
        }
        if (!seen_ids.insert(ex.id).second) {
            throw ValidationError(where + ": duplicate example id '" + ex.id + "'");
        }
        task.examples.push_back(std::move(ex));
    }
    if (task.examples.empty()) throw ValidationError("task file '" + path.string() + "' has no examples");
    return task;
}

// View a task example as a demonstration record for the prompt builder.
inline DemoRecord to_demo(const TaskExample& ex) { return DemoRecord{ex.fields, ex.output()}; }

}  // namespace fusicl
