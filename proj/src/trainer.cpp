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

#include "hipq/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hipq {

namespace {

// Independent RNG stream ids derived from the master seed. Hierarchy and
// positive-sampling streams are split from shuffling/augmentation so that
// disabling the hierarchical losses leaves the other draws untouched.
enum Stream : std::uint64_t {
    kStreamProjector = 1,
    kStreamCodebook = 2,
    kStreamShuffle = 3,
    kStreamAugment = 4,
    kStreamHierarchy = 5,
    kStreamPositives = 6,
};

std::mt19937_64 epoch_rng(std::uint64_t seed, Stream stream, int epoch) {
    return std::mt19937_64(mix_seed(mix_seed(seed, stream), static_cast<std::uint64_t>(epoch)));
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void validate(const TrainConfig& cfg) {
    if (cfg.batch_size < 2) throw std::invalid_argument("batch_size must be at least 2");
    if (cfg.epochs < 0) throw std::invalid_argument("epochs must be nonnegative");
    if (cfg.lr_start <= 0.0 || cfg.lr_end < 0.0)
        throw std::invalid_argument("learning rates must be positive");
    if (cfg.lambda1 < 0.0 || cfg.lambda2 < 0.0)
        throw std::invalid_argument("loss weights must be nonnegative");
    if (cfg.tau <= 0.0 || cfg.tau_qc <= 0.0)
        throw std::invalid_argument("temperatures must be positive");
    if (cfg.theta_init <= 0.0) throw std::invalid_argument("theta_init must be positive");
    if (cfg.noise_std < 0.0) throw std::invalid_argument("noise_std must be nonnegative");
    if (cfg.mask_prob < 0.0 || cfg.mask_prob >= 1.0)
        throw std::invalid_argument("mask_prob must be in [0, 1)");
    for (std::size_t l = 0; l < cfg.hier_levels.size(); ++l)
        if (cfg.hier_levels[l] < 1 || (l > 0 && cfg.hier_levels[l] >= cfg.hier_levels[l - 1]))
            throw std::invalid_argument("hierarchy level counts must be strictly descending");
}

}  // namespace

double lr_at(int step, int total_steps, const TrainConfig& cfg) {
    if (step < 0 || step > total_steps) throw std::invalid_argument("step outside schedule");
    if (total_steps == 0) return cfg.lr_start;
    const double t = static_cast<double>(step) / static_cast<double>(total_steps);
    return cfg.lr_end + 0.5 * (cfg.lr_start - cfg.lr_end) * (1.0 + std::cos(M_PI * t));
}

Model init_model(int d_in, const TrainConfig& cfg) {
    validate(cfg);
    if (d_in < 1) throw std::invalid_argument("d_in must be positive");
    Model model;
    model.d_in = d_in;
    model.M = cfg.M;
    model.K = cfg.K;
    model.d = cfg.d;
    model.tau = cfg.tau;
    model.tau_qc = cfg.tau_qc;
    model.learn_curvature = cfg.learn_curvature;
    model.codebook = init_codebooks(cfg.M, cfg.K, cfg.d, cfg.theta_init, mix_seed(cfg.seed, kStreamCodebook));
    model.codebook.tau = cfg.tau;
    model.rho.assign(static_cast<std::size_t>(cfg.M), std::log(cfg.theta_init));

    std::mt19937_64 rng(mix_seed(cfg.seed, kStreamProjector));
    std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(d_in)));
    model.proj_w.resize(static_cast<std::size_t>(model.out_dim()) * d_in);
    for (double& w : model.proj_w) w = gauss(rng);
    model.proj_b.assign(static_cast<std::size_t>(model.out_dim()), 0.0);
    return model;
}

void augment_views(const double* x, int d_in, const double* sigma, double noise_std,
                   double mask_prob, std::mt19937_64& rng, double* v1, double* v2) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double* v : {v1, v2}) {
        if (noise_std > 0.0) {
            for (int j = 0; j < d_in; ++j) v[j] = x[j] + gauss(rng) * noise_std * sigma[j];
        } else {
            std::copy_n(x, d_in, v);
        }
        if (mask_prob > 0.0)
            for (int j = 0; j < d_in; ++j)
                if (uniform01(rng) < mask_prob) v[j] = 0.0;
    }
}

void riemannian_step(double* codeword, const double* grad, int n, double theta, double lr) {
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(grad[i])) throw numerical_error("non-finite codeword gradient");
    std::vector<double> g(grad, grad + n);
    g[0] = -g[0];  // metric sign correction
    std::vector<double> riem(static_cast<std::size_t>(n));
    geo::tangent_project(codeword, g.data(), n, theta, riem.data());
    for (double& r : riem) r *= -lr;
    std::vector<double> next(static_cast<std::size_t>(n));
    geo::exp_map(codeword, riem.data(), n, theta, next.data());
    std::copy(next.begin(), next.end(), codeword);
    geo::fix_time_coordinate(codeword, n, theta);
}

double mean_quant_error(const Model& model, const double* X, int N) {
    if (N == 0) return 0.0;
    std::vector<double> point(static_cast<std::size_t>(model.out_dim()));
    double total = 0.0;
    for (int i = 0; i < N; ++i) {
        embed(model, X + static_cast<std::size_t>(i) * model.d_in, nullptr, point.data());
        total += quant_error(model.codebook, point.data());
    }
    return total / static_cast<double>(N);
}

Model train(const double* X, int N, int d_in, const TrainConfig& cfg,
            std::vector<EpochMetrics>* metrics) {
    validate(cfg);
    if (N < cfg.batch_size)
        throw std::invalid_argument("dataset must hold at least one full batch");
    Model model = init_model(d_in, cfg);
    if (cfg.epochs == 0) return model;

    // Per-dimension population deviation, the augmentation noise scale.
    std::vector<double> sigma(static_cast<std::size_t>(d_in), 0.0);
    {
        std::vector<double> mean(static_cast<std::size_t>(d_in), 0.0);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < d_in; ++j) mean[static_cast<std::size_t>(j)] += X[static_cast<std::size_t>(i) * d_in + j];
        for (double& m : mean) m /= static_cast<double>(N);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < d_in; ++j) {
                const double c = X[static_cast<std::size_t>(i) * d_in + j] - mean[static_cast<std::size_t>(j)];
                sigma[static_cast<std::size_t>(j)] += c * c;
            }
        for (double& s : sigma) s = std::sqrt(s / static_cast<double>(N));
    }

    const bool need_hier = cfg.lambda1 > 0.0 || cfg.lambda2 > 0.0;
    const std::size_t L = cfg.hier_levels.size();
    if (need_hier && L == 0)
        throw std::invalid_argument("hierarchical losses enabled but no hierarchy levels given");

    // Batches per epoch: full batches plus a trailing partial one iff it
    // still holds two items (contrastive terms degenerate below that).
    const int full = N / cfg.batch_size;
    const int rem = N % cfg.batch_size;
    const int batches_per_epoch = full + (rem >= 2 ? 1 : 0);
    const int total_steps = cfg.epochs * batches_per_epoch;

    const int pdim = model.out_dim();
    std::vector<int> perm(static_cast<std::size_t>(N));
    std::vector<double> v1, v2;
    ad::Tape tape;
    ParamGrads grads;
    const LossWeights weights{cfg.lambda1, cfg.lambda2};
    int step = 0;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Hierarchy hier;
        if (need_hier) {
            std::vector<double> tangents(static_cast<std::size_t>(N) * pdim);
            embed_all(model, X, N, tangents.data(), nullptr);
            hier = build_hierarchy(tangents.data(), N, pdim, cfg.hier_levels, model.space(),
                                   epoch_rng(cfg.seed, kStreamHierarchy, epoch)());
        }
        std::iota(perm.begin(), perm.end(), 0);
        auto rng_shuffle = epoch_rng(cfg.seed, kStreamShuffle, epoch);
        std::shuffle(perm.begin(), perm.end(), rng_shuffle);
        auto rng_aug = epoch_rng(cfg.seed, kStreamAugment, epoch);
        auto rng_pos = epoch_rng(cfg.seed, kStreamPositives, epoch);

        double sum_aug = 0.0, sum_prot = 0.0, sum_ins = 0.0, sum_total = 0.0;
        double last_lr = 0.0;
        for (int bstart = 0, bidx = 0; bidx < batches_per_epoch; bstart += cfg.batch_size, ++bidx) {
            const int n_b = std::min(cfg.batch_size, N - bstart);
            const std::vector<int> items(perm.begin() + bstart, perm.begin() + bstart + n_b);

            v1.assign(static_cast<std::size_t>(n_b) * d_in, 0.0);
            v2.assign(static_cast<std::size_t>(n_b) * d_in, 0.0);
            for (int s = 0; s < n_b; ++s)
                augment_views(X + static_cast<std::size_t>(items[static_cast<std::size_t>(s)]) * d_in, d_in,
                              sigma.data(), cfg.noise_std, cfg.mask_prob, rng_aug,
                              v1.data() + static_cast<std::size_t>(s) * d_in,
                              v2.data() + static_cast<std::size_t>(s) * d_in);

            BatchInputs batch;
            batch.n = n_b;
            batch.view1 = v1.data();
            batch.view2 = v2.data();
            if (need_hier) {
                batch.hierarchy = &hier;
                if (cfg.lambda1 > 0.0) {
                    batch.assign.assign(L, std::vector<int>(static_cast<std::size_t>(n_b)));
                    for (std::size_t l = 0; l < L; ++l)
                        for (int s = 0; s < n_b; ++s)
                            batch.assign[l][static_cast<std::size_t>(s)] =
                                hier.levels[l].assign[static_cast<std::size_t>(items[static_cast<std::size_t>(s)])];
                }
                if (cfg.lambda2 > 0.0 && n_b >= 2) {
                    batch.positive.assign(L, std::vector<int>(static_cast<std::size_t>(n_b)));
                    for (std::size_t l = 0; l < L; ++l)
                        for (int s = 0; s < n_b; ++s) {
                            const int item = items[static_cast<std::size_t>(s)];
                            const int pos = sample_instance_positive(hier.levels[l], item, items, rng_pos);
                            const auto slot =
                                std::find(items.begin(), items.end(), pos) - items.begin();
                            batch.positive[l][static_cast<std::size_t>(s)] = static_cast<int>(slot);
                        }
                }
            }

            LossBreakdown lb;
            try {
                lb = batch_gradients(model, batch, weights, grads, tape);
            } catch (const numerical_error& e) {
                throw numerical_error("epoch " + std::to_string(epoch) + ", batch " +
                                      std::to_string(bidx) + ": " + e.what());
            }

            const double lr = lr_at(step, total_steps, cfg);
            last_lr = lr;
            for (std::size_t i = 0; i < model.proj_w.size(); ++i) model.proj_w[i] -= lr * grads.proj_w[i];
            for (std::size_t i = 0; i < model.proj_b.size(); ++i) model.proj_b[i] -= lr * grads.proj_b[i];
            const int n = model.ambient();
            for (int m = 0; m < model.M; ++m) {
                const double theta = model.codebook.theta[static_cast<std::size_t>(m)];
                for (int k = 0; k < model.K; ++k) {
                    const std::size_t off = (static_cast<std::size_t>(m) * model.K + k) * n;
                    riemannian_step(model.codebook.word(m, k), grads.words.data() + off, n, theta, lr);
                }
            }
            if (model.learn_curvature) {
                for (int m = 0; m < model.M; ++m) model.rho[static_cast<std::size_t>(m)] -= lr * grads.rho[static_cast<std::size_t>(m)];
                model.sync_theta();
                // The sheet moved with theta; put the codewords back on it.
                for (int m = 0; m < model.M; ++m)
                    for (int k = 0; k < model.K; ++k)
                        geo::fix_time_coordinate(model.codebook.word(m, k), n,
                                                 model.codebook.theta[static_cast<std::size_t>(m)]);
            }

            sum_aug += lb.aug;
            sum_prot += lb.prot;
            sum_ins += lb.ins;
            sum_total += lb.total;
            ++step;
        }

        if (metrics) {
            EpochMetrics em;
            em.epoch = epoch;
            const double nb = static_cast<double>(batches_per_epoch);
            em.loss_aug = sum_aug / nb;
            em.loss_prot = sum_prot / nb;
            em.loss_ins = sum_ins / nb;
            em.loss_total = sum_total / nb;
            em.mean_quant_error = mean_quant_error(model, X, N);
            em.lr = last_lr;
            metrics->push_back(em);
        }
    }
    return model;
}

}  // namespace hipq
