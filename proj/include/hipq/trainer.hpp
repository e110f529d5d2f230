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

// End-to-end training: feature-space view augmentation, per-epoch hierarchy
// refresh, cosine-scheduled SGD on the projector and log-curvatures, and
// Riemannian SGD on the codewords. Single-threaded by design so two runs
// with one seed produce bit-identical models.

#include <cstdint>
#include <random>
#include <vector>

#include "hipq/objective.hpp"

namespace hipq {

struct TrainConfig {
    int batch_size = 64;
    int epochs = 50;
    double lr_start = 1e-3;
    double lr_end = 1e-5;
    double lambda1 = 1.0;
    double lambda2 = 0.1;
    double tau = 0.2;     // codebook attention temperature
    double tau_qc = 0.2;  // contrastive similarity temperature
    int M = 4;
    int K = 256;
    int d = 15;
    double theta_init = 1.0;
    bool learn_curvature = true;
    std::vector<int> hier_levels = {200, 100};  // strictly descending
    double noise_std = 0.1;
    double mask_prob = 0.1;
    std::uint64_t seed = 0;
};

struct EpochMetrics {
    int epoch = 0;  // 1-based
    double loss_aug = 0.0;
    double loss_prot = 0.0;
    double loss_ins = 0.0;
    double loss_total = 0.0;
    double mean_quant_error = 0.0;  // over the clean dataset, hard-quantized
    double lr = 0.0;                // at the epoch's last step
};

// Cosine decay: lr_end + 0.5*(lr_start - lr_end)*(1 + cos(pi*step/total)).
double lr_at(int step, int total_steps, const TrainConfig& cfg);

// Fresh model: projector weights ~ N(0, 1/sqrt(d_in)), zero biases,
// codewords near the origins, rho = log(theta_init).
Model init_model(int d_in, const TrainConfig& cfg);

// Two independent views of x: per-dimension Gaussian noise scaled by the
// dataset deviation sigma, then independent zero-masking.
void augment_views(const double* x, int d_in, const double* sigma, double noise_std,
                   double mask_prob, std::mt19937_64& rng, double* v1, double* v2);

// One Riemannian SGD step on a codeword: flip the Euclidean gradient's time
// component (metric correction), project onto the tangent space, walk the
// geodesic, re-project the time coordinate.
void riemannian_step(double* codeword, const double* grad, int n, double theta, double lr);

// Train on N feature rows of width d_in. Appends one EpochMetrics per epoch
// when `metrics` is non-null. epochs == 0 returns the initialized model.
Model train(const double* X, int N, int d_in, const TrainConfig& cfg,
            std::vector<EpochMetrics>* metrics = nullptr);

// Mean hard-quantization error d(h, decode(encode(h))) over the dataset.
double mean_quant_error(const Model& model, const double* X, int N);

}  // namespace hipq
