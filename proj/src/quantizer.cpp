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

#include "hipq/quantizer.hpp"

#include <limits>
#include <random>

namespace hipq {

namespace {
bool is_power_of_two(int k) { return k > 0 && (k & (k - 1)) == 0; }
}  // namespace

Codebook init_codebooks(int M, int K, int d, double theta_init, std::uint64_t seed) {
    if (!is_power_of_two(K))
        throw std::invalid_argument("codebook size K must be a power of two for bit packing");
    if (M < 1 || d < 2) throw std::invalid_argument("codebook needs M >= 1 and d >= 2");
    if (theta_init <= 0.0) throw std::invalid_argument("curvature must be positive");

    Codebook cb;
    cb.M = M;
    cb.K = K;
    cb.d = d;
    cb.theta.assign(static_cast<std::size_t>(M), theta_init);
    const int n = cb.ambient();
    cb.words.assign(static_cast<std::size_t>(M) * K * n, 0.0);

    std::mt19937_64 rng(mix_seed(seed, 0));
    std::normal_distribution<double> gauss(0.0, 0.05);
    const std::vector<double> o = geo::origin(n, theta_init);
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);  // tangent at origin: time = 0
    for (int m = 0; m < M; ++m) {
        for (int k = 0; k < K; ++k) {
            for (int i = 1; i < n; ++i) v[static_cast<std::size_t>(i)] = gauss(rng);
            geo::exp_map(o.data(), v.data(), n, theta_init, cb.word(m, k));
        }
    }
    return cb;
}

int hard_quantize_sub(const double* h, const double* words, int K, int n, double theta) {
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
        const double dist = geo::distance(words + static_cast<std::size_t>(k) * n, h, n, theta);
        if (dist < best_dist) {
            best_dist = dist;
            best = k;
        }
    }
    return best;
}

void soft_quantize(const Codebook& cb, const double* h, double* out) {
    const int n = cb.ambient();
    for (int m = 0; m < cb.M; ++m)
        soft_quantize_sub(h + static_cast<std::size_t>(m) * n, cb.word(m, 0), cb.K, n,
                          cb.theta[static_cast<std::size_t>(m)], cb.tau,
                          out + static_cast<std::size_t>(m) * n);
}

void encode(const Codebook& cb, const double* h, std::uint32_t* code) {
    const int n = cb.ambient();
    for (int m = 0; m < cb.M; ++m)
        code[m] = static_cast<std::uint32_t>(hard_quantize_sub(
            h + static_cast<std::size_t>(m) * n, cb.word(m, 0), cb.K, n, cb.theta[static_cast<std::size_t>(m)]));
}

void decode(const Codebook& cb, const std::uint32_t* code, double* out) {
    const int n = cb.ambient();
    for (int m = 0; m < cb.M; ++m) {
        const double* w = cb.word(m, static_cast<int>(code[m]));
        for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(m) * n + i] = w[i];
    }
}

double quant_error(const Codebook& cb, const double* h) {
    QuantCode code(static_cast<std::size_t>(cb.M));
    encode(cb, h, code.data());
    std::vector<double> rec(static_cast<std::size_t>(cb.M) * cb.ambient());
    decode(cb, code.data(), rec.data());
    return geo::product_distance(h, rec.data(), cb.space());
}

}  // namespace hipq
