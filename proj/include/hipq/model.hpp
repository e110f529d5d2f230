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

// The trainable model: a linear projector into the concatenated tangent
// spaces, the product codebook, and per-subspace log-curvatures.

#include <cmath>
#include <string>
#include <vector>

#include "hipq/quantizer.hpp"

namespace hipq {

struct Model {
    int d_in = 0;
    int M = 0;
    int K = 0;
    int d = 0;
    double tau = 0.2;
    double tau_qc = 0.2;
    bool learn_curvature = true;
    std::vector<double> proj_w;  // row-major, M*(d+1) rows of d_in
    std::vector<double> proj_b;  // M*(d+1)
    std::vector<double> rho;     // M; theta_m = exp(rho_m)
    Codebook codebook;           // codebook.theta mirrors exp(rho)
    std::string config_echo;     // the key=value config this model was trained with

    int ambient() const { return d + 1; }
    int out_dim() const { return M * (d + 1); }
    geo::ProductSpace space() const { return codebook.space(); }

    // Re-derive codebook.theta from rho (after a curvature update).
    void sync_theta() {
        for (int m = 0; m < M; ++m)
            codebook.theta[static_cast<std::size_t>(m)] = std::exp(rho[static_cast<std::size_t>(m)]);
    }
};

// Linear projection, per-subspace tangent projection at the origin (drops
// the time row), norm clip, and exponential map. Writes the clipped tangent
// concat (time coordinates zero; used for clustering) and the product point,
// both of length M*(d+1). Either output may be null when not needed.
// Templated so the training tape and the plain double path share one body.
template <class T, class TTheta>
void embed_kernel(const T* W, const T* b, const TTheta* theta, int d_in, int M, int n,
                  const double* x, T* tangent, T* point) {
    const std::span<const double> xs(x, static_cast<std::size_t>(d_in));
    std::vector<T> u(static_cast<std::size_t>(n));
    for (int m = 0; m < M; ++m) {
        for (int i = 0; i < n; ++i) {
            const std::size_t row = static_cast<std::size_t>(m) * n + i;
            u[static_cast<std::size_t>(i)] =
                ad::dotc(std::span<const T>(W + row * d_in, static_cast<std::size_t>(d_in)), xs) + b[row];
        }
        geo::lift_to_manifold(u.data(), n, theta[m], geo::kClipNorm,
                              point ? point + static_cast<std::size_t>(m) * n : nullptr,
                              tangent ? tangent + static_cast<std::size_t>(m) * n : nullptr);
    }
}

// Double-path embedding of one feature vector.
void embed(const Model& model, const double* x, double* tangent, double* point);

// Embed every row of X (n_items x d_in); outputs are n_items x M*(d+1).
void embed_all(const Model& model, const double* X, int n_items, double* tangents, double* points);

}  // namespace hipq
