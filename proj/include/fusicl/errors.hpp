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

#include <stdexcept>
#include <string>

namespace fusicl {

// Validation errors (bad inputs, malformed files, incompatible plans) map to
// CLI exit code 2; runtime errors (IO failures, internal contract breaks) to 1.
enum class ErrorKind { validation, runtime };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Tensor dimensions disagree with the operation's contract.
struct ShapeError : Error {
    explicit ShapeError(const std::string& w) : Error(ErrorKind::runtime, "shape error: " + w) {}
};

// A scalar argument violates a precondition (empty input, k out of range, ...).
struct ArgumentError : Error {
    explicit ArgumentError(const std::string& w) : Error(ErrorKind::validation, "argument error: " + w) {}
};

// A token id is outside the vocabulary.
struct TokenError : Error {
    explicit TokenError(const std::string& w) : Error(ErrorKind::runtime, "token error: " + w) {}
};

// A binary artifact (checkpoint file) is malformed.
struct FormatError : Error {
    explicit FormatError(const std::string& w) : Error(ErrorKind::validation, "format error: " + w) {}
};

// A text artifact (task file, config) failed to parse.
struct ParseError : Error {
    explicit ParseError(const std::string& w) : Error(ErrorKind::validation, "parse error: " + w) {}
};

// Parsed content violates schema constraints.
struct ValidationError : Error {
    explicit ValidationError(const std::string& w) : Error(ErrorKind::validation, "validation error: " + w) {}
};

// A prompt plan is internally inconsistent or incompatible with the requested mode.
struct PlanError : Error {
    explicit PlanError(const std::string& w) : Error(ErrorKind::validation, "plan error: " + w) {}
};

// A template references a field the record does not provide.
struct TemplateError : Error {
    explicit TemplateError(const std::string& w) : Error(ErrorKind::validation, "template error: " + w) {}
};

// A requested enumeration exceeds the configured budget.
struct BudgetError : Error {
    explicit BudgetError(const std::string& w) : Error(ErrorKind::validation, "budget error: " + w) {}
};

struct IoError : Error {
    explicit IoError(const std::string& w) : Error(ErrorKind::runtime, "io error: " + w) {}
};

}  // namespace fusicl
