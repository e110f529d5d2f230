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

// Product codebooks of hyperbolic codewords, soft (differentiable) codebook
// attention, and hard nearest-codeword encoding.

#include <cstdint>
#include <vector>

#include "hipq/geometry.hpp"

namespace hipq {

// M sub-codebooks of K codewords each; codewords of sub-codebook m live on
// the sheet of curvature theta[m]. Storage is flat: word (m, k) occupies
// d+1 consecutive doubles at (m*K + k)*(d+1).
struct Codebook {
    int M = 0;
    int K = 0;
    int d = 0;
    double tau = 0.2;           // attention temperature
    std::vector<double> theta;  // size M
    std::vector<double> words;  // size M*K*(d+1)

    int ambient() const { return d + 1; }
    double* word(int m, int k) { return words.data() + (static_cast<std::size_t>(m) * K + k) * ambient(); }
    const double* word(int m, int k) const {
        return words.data() + (static_cast<std::size_t>(m) * K + k) * ambient();
    }
    geo::ProductSpace space() const { return geo::ProductSpace{M, d, theta}; }
};

// Codeword indices for one item, one per subspace; each in [0, K).
using QuantCode = std::vector<std::uint32_t>;

// Gaussian tangent vectors at the origin (std 0.05, time coordinate 0),
// pushed through the exponential map. K must be a power of two so codes
// pack into whole bits. Deterministic under seed.
Codebook init_codebooks(int M, int K, int d, double theta_init, std::uint64_t seed);

// ---- templated kernels (double and autodiff paths share these) -------------

// Softmax over codewords of -sq_distance(c_k, h)/tau, written as
// exp(logit - logsumexp) so temperatures down to 0.05 stay stable.
// `words` is K rows of n = d+1 scalars; writes K weights summing to 1.
template <class T, class TTheta>
void attention_weights(const T* h, const T* words, int K, int n, const TTheta& theta, double tau,
                       T* w) {
    if (tau <= 0.0) throw std::invalid_argument("attention temperature must be positive");
    std::vector<T> logits(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k)
        logits[static_cast<std::size_t>(k)] = geo::sq_distance(words + static_cast<std::size_t>(k) * n, h, n, theta) * T(-1.0 / tau);
    const T lse = ad::logsumexp(std::span<const T>(logits));
    for (int k = 0; k < K; ++k) w[k] = ad::exp(logits[static_cast<std::size_t>(k)] - lse);
}

// Weighted Lorentzian centroid: the minimizer over the sheet of
// sum_k w_k * sq_distance(c_k, .) for simplex weights w, in closed form:
// s = sum_k w_k c_k, out = s / (sqrt(theta) * sqrt(|<s,s>_L|)), with the sign
// chosen so the time coordinate is positive.
template <class T, class TTheta>
void weighted_centroid(const T* words, const T* w, int K, int n, const TTheta& theta, T* out) {
    std::vector<T> column(static_cast<std::size_t>(K));
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < K; ++k) column[static_cast<std::size_t>(k)] = words[static_cast<std::size_t>(k) * n + i];
        out[i] = ad::dot(std::span<const T>(column), std::span<const T>(w, static_cast<std::size_t>(K)));
    }
    const T m2 = geo::minkowski_dot(out, out, n);
    if (std::fabs(ad::value_of(m2)) < geo::kDegenerateNorm)
        throw numerical_error("degenerate codeword aggregation: norm too small to renormalize");
    T denom = ad::sqrt(theta) * ad::sqrt_abs(m2);
    if (ad::value_of(out[0]) < 0.0) denom = -denom;  // keep the upper sheet
    for (int i = 0; i < n; ++i) out[i] = out[i] / denom;
}

// Attention weights followed by the weighted centroid.
template <class T, class TTheta>
void soft_quantize_sub(const T* h, const T* words, int K, int n, const TTheta& theta, double tau,
                       T* out) {
    std::vector<T> w(static_cast<std::size_t>(K));
    attention_weights(h, words, K, n, theta, tau, w.data());
    weighted_centroid(words, w.data(), K, n, theta, out);
}

// ---- double-path API --------------------------------------------------------

// Nearest codeword by geodesic distance; ties take the smallest index.
int hard_quantize_sub(const double* h, const double* words, int K, int n, double theta);

// Per-subspace soft quantization of a product point (M*(d+1) doubles).
void soft_quantize(const Codebook& cb, const double* h, double* out);

// Per-subspace hard quantization; writes M indices.
void encode(const Codebook& cb, const double* h, std::uint32_t* code);

// Concatenation of the coded codewords.
void decode(const Codebook& cb, const std::uint32_t* code, double* out);

// Product distance between h and its hard-quantized reconstruction.
double quant_error(const Codebook& cb, const double* h);

}  // namespace hipq
