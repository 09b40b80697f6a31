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
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fusicl/errors.hpp"

namespace fusicl {

inline std::string shape_str(const std::vector<int64_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

// Dense row-major float32 array; the value carrier for every layer of the
// engine. Invariants: numel(shape) == data.size(), every entry finite.
struct Tensor {
    std::vector<int64_t> shape;
    std::vector<float> data;

    Tensor() = default;

    // Zero-filled tensor of the given shape.
    explicit Tensor(std::vector<int64_t> s)
        : shape(std::move(s)), data(static_cast<size_t>(checked_numel(shape)), 0.0f) {}

    Tensor(std::vector<int64_t> s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {
        if (static_cast<int64_t>(data.size()) != checked_numel(shape)) {
            throw ShapeError("tensor data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
        }
        ensure_finite("construction");
    }

    int64_t numel() const {
        int64_t n = 1;
        for (int64_t d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }

    size_t rank() const { return shape.size(); }
    int64_t dim(size_t i) const { return shape.at(i); }

    // Pointer to row r of a rank-2 tensor.
    float* row(int64_t r) { return data.data() + r * shape[1]; }
    const float* row(int64_t r) const { return data.data() + r * shape[1]; }

    float& at2(int64_t i, int64_t j) { return data[i * shape[1] + j]; }
    float at2(int64_t i, int64_t j) const { return data[i * shape[1] + j]; }

    void ensure_finite(const char* where) const {
        for (float v : data) {
            if (!std::isfinite(v)) {
                throw ShapeError(std::string("non-finite value after ") + where);
            }
        }
    }

    static int64_t checked_numel(const std::vector<int64_t>& shape) {
        if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
        int64_t n = 1;
        for (int64_t d : shape) {
            if (d <= 0) throw ShapeError("tensor dimensions must be positive, got " + shape_str(shape));
            n *= d;
        }
        return n;
    }
};

// c[i][j] = sum_t a[i][t] * b[t][j]. The t-accumulation runs in index order
// for every output element (i-t-j loop), so results are bit-reproducible.
inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.shape[1] != b.shape[0]) {
        throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape) + " and " + shape_str(b.shape));
    }
    const int64_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
    Tensor c({m, n});
    for (int64_t i = 0; i < m; ++i) {
        const float* arow = a.row(i);
        float* crow = c.row(i);
        for (int64_t t = 0; t < k; ++t) {
            const float av = arow[t];
            const float* brow = b.row(t);
            for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
    c.ensure_finite("matmul");
    return c;
}

// Softmax along the last axis, max-subtracted for stability. Rows sum to 1
// within 1e-6 and every entry lies in (0, 1).
inline Tensor softmax(const Tensor& v) {
    if (v.rank() < 1 || v.shape.back() < 1) {
        throw ShapeError("softmax: empty last axis in " + shape_str(v.shape));
    }
    const int64_t n = v.shape.back();
    const int64_t rows = v.numel() / n;
    Tensor out(v.shape);
    for (int64_t r = 0; r < rows; ++r) {
        const float* x = v.data.data() + r * n;
        float* y = out.data.data() + r * n;
        float mx = x[0];
        for (int64_t i = 1; i < n; ++i) mx = x[i] > mx ? x[i] : mx;
        float denom = 0.0f;
        for (int64_t i = 0; i < n; ++i) {
            y[i] = std::exp(x[i] - mx);
            denom += y[i];
        }
        for (int64_t i = 0; i < n; ++i) y[i] /= denom;
    }
    out.ensure_finite("softmax");
    return out;
}

// out[i] = x[i] * weight[i] / sqrt(mean(x^2) + eps), per row of the last axis.
inline Tensor rms_norm(const Tensor& x, const Tensor& weight, float eps) {
    if (weight.rank() != 1 || x.rank() < 1 || weight.shape[0] != x.shape.back()) {
        throw ShapeError("rms_norm: weight " + shape_str(weight.shape) + " does not match input " +
                         shape_str(x.shape));
    }
    if (eps < 0.0f) throw ArgumentError("rms_norm: eps must be non-negative");
    const int64_t d = x.shape.back();
    const int64_t rows = x.numel() / d;
    Tensor out(x.shape);
    for (int64_t r = 0; r < rows; ++r) {
        const float* xi = x.data.data() + r * d;
        float* yi = out.data.data() + r * d;
        float ms = 0.0f;
        for (int64_t i = 0; i < d; ++i) ms += xi[i] * xi[i];
        ms /= static_cast<float>(d);
        const float inv = 1.0f / std::sqrt(ms + eps);
        for (int64_t i = 0; i < d; ++i) yi[i] = xi[i] * weight.data[i] * inv;
    }
    out.ensure_finite("rms_norm");
    return out;
}

// log(sum_i exp(v_i)), max-shifted, accumulated in doubles in index order.
inline double log_sum_exp(std::span<const double> v) {
    if (v.empty()) throw ArgumentError("log_sum_exp: empty input");
    double mx = v[0];
    for (double x : v) mx = x > mx ? x : mx;
    double sum = 0.0;
    for (double x : v) sum += std::exp(x - mx);
    return mx + std::log(sum);
}

// Log-probabilities from a logits vector: lp[i] = v[i] - logsumexp(v).
inline Tensor log_softmax_1d(const Tensor& logits) {
    if (logits.rank() != 1 || logits.shape[0] < 1) {
        throw ShapeError("log_softmax_1d: expected nonempty vector, got " + shape_str(logits.shape));
    }
    const int64_t n = logits.shape[0];
    float mx = logits.data[0];
    for (float x : logits.data) mx = x > mx ? x : mx;
    double sum = 0.0;
    for (float x : logits.data) sum += std::exp(static_cast<double>(x) - mx);
    const double lse = static_cast<double>(mx) + std::log(sum);
    Tensor out({n});
    for (int64_t i = 0; i < n; ++i) {
        out.data[i] = static_cast<float>(static_cast<double>(logits.data[i]) - lse);
    }
    out.ensure_finite("log_softmax_1d");
    return out;
}

// Index of the maximum; ties resolve to the lowest index.
inline int argmax(std::span<const float> v) {
    if (v.empty()) throw ArgumentError("argmax: empty input");
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

}  // namespace fusicl
