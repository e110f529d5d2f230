// Copyright 2026-present the hipq project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Minimal tape-based reverse-mode differentiation over scalars.
//
// A Var is either a constant (tape == nullptr) or a handle into a Tape.
// Forward values are computed eagerly and cached in the Var; the tape only
// records (parent, local-partial) pairs, so backward() is a single reverse
// sweep that multiplies and accumulates adjoints. Nodes may have any number
// of parents; fused n-ary ops (dot, sum, logsumexp) keep the tape small for
// the inner-product heavy workloads this library runs.

#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace hipq::ad {

class Tape;

struct Var {
    double v = 0.0;
    std::uint32_t idx = 0;
    Tape* tape = nullptr;

    Var() = default;
    Var(double value) : v(value) {}  // implicit: constants mix freely
    Var(double value, std::uint32_t i, Tape* t) : v(value), idx(i), tape(t) {}

    bool is_const() const { return tape == nullptr; }
};

class Tape {
public:
    Var leaf(double value) {
        const auto id = new_node();
        return Var(value, id, this);
    }

    Var unary(double value, const Var& a, double da) {
        if (a.is_const()) return Var(value);
        const auto id = new_node();
        push(a.idx, da);
        return Var(value, id, this);
    }

    Var binary(double value, const Var& a, double da, const Var& b, double db) {
        if (a.is_const() && b.is_const()) return Var(value);
        const auto id = new_node();
        if (!a.is_const()) push(a.idx, da);
        if (!b.is_const()) push(b.idx, db);
        return Var(value, id, this);
    }

    // Batched entry points used by the fused ops below.
    std::uint32_t open_node() { return new_node(); }
    void push(std::uint32_t parent, double partial) {
        parent_.push_back(parent);
        partial_.push_back(partial);
        ++count_.back();
    }

    // Reverse sweep from `root`. Adjoints of every node are available via
    // adjoint() afterwards and stay valid until the next record or clear.
    void backward(const Var& root) {
        assert(root.tape == this);
        adj_.assign(count_.size(), 0.0);
        adj_[root.idx] = 1.0;
        for (std::uint32_t i = root.idx + 1; i-- > 0;) {
            const double a = adj_[i];
            if (a == 0.0) continue;
            const std::uint32_t b = first_[i];
            const std::uint32_t e = b + count_[i];
            for (std::uint32_t j = b; j < e; ++j) adj_[parent_[j]] += a * partial_[j];
        }
    }

    double adjoint(const Var& x) const {
        if (x.is_const()) return 0.0;
        assert(x.tape == this);
        return adj_[x.idx];
    }

    std::size_t size() const { return count_.size(); }

    void clear() {
        first_.clear();
        count_.clear();
        parent_.clear();
        partial_.clear();
        adj_.clear();
    }

    void reserve(std::size_t nodes, std::size_t payload) {
        first_.reserve(nodes);
        count_.reserve(nodes);
        adj_.reserve(nodes);
        parent_.reserve(payload);
        partial_.reserve(payload);
    }

private:
    std::uint32_t new_node() {
        const auto id = static_cast<std::uint32_t>(count_.size());
        first_.push_back(static_cast<std::uint32_t>(parent_.size()));
        count_.push_back(0);
        return id;
    }

    std::vector<std::uint32_t> first_, count_;  // per node
    std::vector<std::uint32_t> parent_;         // payload
    std::vector<double> partial_;
    std::vector<double> adj_;
};

inline double value_of(double x) { return x; }
inline double value_of(const Var& x) { return x.v; }

namespace detail {
inline Tape* tape_of(const Var& a, const Var& b) { return a.tape ? a.tape : b.tape; }
}  // namespace detail

// ---- arithmetic -----------------------------------------------------------

inline Var operator+(const Var& a, const Var& b) {
    if (a.is_const() && b.is_const()) return Var(a.v + b.v);
    return detail::tape_of(a, b)->binary(a.v + b.v, a, 1.0, b, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
    if (a.is_const() && b.is_const()) return Var(a.v - b.v);
    return detail::tape_of(a, b)->binary(a.v - b.v, a, 1.0, b, -1.0);
}
inline Var operator*(const Var& a, const Var& b) {
    if (a.is_const() && b.is_const()) return Var(a.v * b.v);
    return detail::tape_of(a, b)->binary(a.v * b.v, a, b.v, b, a.v);
}
inline Var operator/(const Var& a, const Var& b) {
    if (a.is_const() && b.is_const()) return Var(a.v / b.v);
    return detail::tape_of(a, b)->binary(a.v / b.v, a, 1.0 / b.v, b, -a.v / (b.v * b.v));
}
inline Var operator-(const Var& a) {
    if (a.is_const()) return Var(-a.v);
    return a.tape->unary(-a.v, a, -1.0);
}
inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }
inline Var& operator/=(Var& a, const Var& b) { return a = a / b; }

// ---- elementary functions --------------------------------------------------

inline Var exp(const Var& a) {
    const double e = std::exp(a.v);
    if (a.is_const()) return Var(e);
    return a.tape->unary(e, a, e);
}
inline Var log(const Var& a) {
    if (a.is_const()) return Var(std::log(a.v));
    return a.tape->unary(std::log(a.v), a, 1.0 / a.v);
}
inline Var sqrt(const Var& a) {
    const double s = std::sqrt(a.v);
    if (a.is_const()) return Var(s);
    return a.tape->unary(s, a, 0.5 / s);
}
inline Var cosh(const Var& a) {
    if (a.is_const()) return Var(std::cosh(a.v));
    return a.tape->unary(std::cosh(a.v), a, std::sinh(a.v));
}
inline Var sinh(const Var& a) {
    if (a.is_const()) return Var(std::sinh(a.v));
    return a.tape->unary(std::sinh(a.v), a, std::cosh(a.v));
}
inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double cosh(double x) { return std::cosh(x); }
inline double sinh(double x) { return std::sinh(x); }

// sinh(z)/z, finite and smooth through z = 0.
inline double sinhc(double z) {
    if (std::fabs(z) < 1e-4) {
        const double z2 = z * z;
        return 1.0 + z2 / 6.0 + z2 * z2 / 120.0;
    }
    return std::sinh(z) / z;
}
inline double dsinhc(double z) {
    if (std::fabs(z) < 1e-4) {
        const double z2 = z * z;
        return z / 3.0 + z * z2 / 30.0;
    }
    return (z * std::cosh(z) - std::sinh(z)) / (z * z);
}
inline Var sinhc(const Var& a) {
    if (a.is_const()) return Var(sinhc(a.v));
    return a.tape->unary(sinhc(a.v), a, dsinhc(a.v));
}

// acosh(1 + t) for t >= 0, computed without cancellation near t = 0.
// Arguments at or below the branch point take value 0 with subgradient 0,
// which is what distance terms between coincident points need.
inline double acosh1p(double t) {
    if (t <= 0.0) return 0.0;
    return std::log1p(t + std::sqrt(t * (t + 2.0)));
}
inline Var acosh1p(const Var& a) {
    if (a.is_const()) return Var(acosh1p(a.v));
    if (a.v <= 0.0) return a.tape->unary(0.0, a, 0.0);
    return a.tape->unary(acosh1p(a.v), a, 1.0 / std::sqrt(a.v * (a.v + 2.0)));
}

// sqrt(|x|); the sign of x is fixed per evaluation so the branch is smooth.
inline double sqrt_abs(double x) { return std::sqrt(std::fabs(x)); }
inline Var sqrt_abs(const Var& a) {
    const double s = std::sqrt(std::fabs(a.v));
    if (a.is_const()) return Var(s);
    const double sign = a.v >= 0.0 ? 1.0 : -1.0;
    return a.tape->unary(s, a, sign * 0.5 / s);
}

// ---- fused n-ary ops --------------------------------------------------------

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
inline Var dot(std::span<const Var> a, std::span<const Var> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    Tape* tape = nullptr;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i].v * b[i].v;
        if (!tape) tape = a[i].tape ? a[i].tape : b[i].tape;
    }
    if (!tape) return Var(s);
    const auto id = tape->open_node();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_const()) tape->push(a[i].idx, b[i].v);
        if (!b[i].is_const()) tape->push(b[i].idx, a[i].v);
    }
    return Var(s, id, tape);
}

// Dot against plain coefficients.
inline double dotc(std::span<const double> a, std::span<const double> c) { return dot(a, c); }
inline Var dotc(std::span<const Var> a, std::span<const double> c) {
    assert(a.size() == c.size());
    double s = 0.0;
    Tape* tape = nullptr;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i].v * c[i];
        if (!tape) tape = a[i].tape;
    }
    if (!tape) return Var(s);
    const auto id = tape->open_node();
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!a[i].is_const()) tape->push(a[i].idx, c[i]);
    return Var(s, id, tape);
}

// Mixed-span dot resolves as dot-against-coefficients, so templated kernels
// can pair tape variables with plain-double constants.
inline Var dot(std::span<const Var> a, std::span<const double> b) { return dotc(a, b); }

inline double sum(std::span<const double> a) {
    double s = 0.0;
    for (double x : a) s += x;
    return s;
}
inline Var sum(std::span<const Var> a) {
    double s = 0.0;
    Tape* tape = nullptr;
    for (const Var& x : a) {
        s += x.v;
        if (!tape) tape = x.tape;
    }
    if (!tape) return Var(s);
    const auto id = tape->open_node();
    for (const Var& x : a)
        if (!x.is_const()) tape->push(x.idx, 1.0);
    return Var(s, id, tape);
}

// log(sum_i exp(x_i)), max-shifted. Partials are the softmax weights.
inline double logsumexp(std::span<const double> x) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : x) m = std::max(m, v);
    double s = 0.0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}
inline Var logsumexp(std::span<const Var> x) {
    double m = -std::numeric_limits<double>::infinity();
    Tape* tape = nullptr;
    for (const Var& v : x) {
        m = std::max(m, v.v);
        if (!tape) tape = v.tape;
    }
    double s = 0.0;
    for (const Var& v : x) s += std::exp(v.v - m);
    const double value = m + std::log(s);
    if (!tape) return Var(value);
    const auto id = tape->open_node();
    for (const Var& v : x)
        if (!v.is_const()) tape->push(v.idx, std::exp(v.v - m) / s);
    return Var(value, id, tape);
}

}  // namespace hipq::ad
