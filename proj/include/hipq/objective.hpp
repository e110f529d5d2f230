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

// The training objective: an augmentation-contrastive loss over soft-
// quantized embeddings plus prototype-wise and instance-wise hierarchical
// contrastive losses, with exact reverse-mode gradients for the projector,
// the codewords, and the log-curvatures.
//
// Conventions baked in here: every exp(-d/tau_qc) ratio is evaluated in
// logit space with fused log-sum-exp; the anchor for the hierarchical
// losses is the item's quantized first view; instance-loss negatives are
// the other items' quantized first views; prototypes are constants.

#include <vector>

#include "hipq/hierarchy.hpp"
#include "hipq/model.hpp"

namespace hipq {

struct LossWeights {
    double lambda1 = 1.0;  // prototype-wise term
    double lambda2 = 0.1;  // instance-wise term
};

struct LossBreakdown {
    double aug = 0.0;
    double prot = 0.0;
    double ins = 0.0;
    double total = 0.0;
};

// One batch's loss inputs. Views are post-augmentation feature vectors.
// `assign[l][i]` is batch item i's cluster at level l; `positive[l][i]` is
// the batch slot of its sampled positive at level l, with the item's own
// slot standing for the singleton sentinel (use my second view). Both are
// indexed by the hierarchy's level order and may be empty when the
// corresponding loss weight is zero.
struct BatchInputs {
    int n = 0;                      // batch size
    const double* view1 = nullptr;  // n x d_in
    const double* view2 = nullptr;  // n x d_in
    const Hierarchy* hierarchy = nullptr;
    std::vector<std::vector<int>> assign;
    std::vector<std::vector<int>> positive;
};

struct ParamGrads {
    std::vector<double> proj_w;
    std::vector<double> proj_b;
    std::vector<double> words;
    std::vector<double> rho;
};

// exp(-product_distance(a, b)/tau_qc), in (0, 1].
double similarity(const double* a, const double* b, const geo::ProductSpace& space, double tau_qc);

// The three losses evaluated on already-quantized points, mostly for tests
// and oracles. `q` holds 2n product points: item i's views at rows 2i and
// 2i+1; `q1` holds only first views (n rows).
double loss_aug_value(const double* q, int n, const geo::ProductSpace& space, double tau_qc);
double loss_prot_value(const double* q1, int n, const geo::ProductSpace& space, double tau_qc,
                       const std::vector<const HierarchyLevel*>& levels,
                       const std::vector<std::vector<int>>& assign);
double loss_ins_value(const double* q, int n, const geo::ProductSpace& space, double tau_qc,
                      const std::vector<std::vector<int>>& positive);

// Full forward pass (embed, soft-quantize, losses) on plain doubles. Runs
// exactly the code path the gradient tape records, so central differences
// of this function validate batch_gradients.
LossBreakdown batch_loss(const Model& model, const BatchInputs& batch, const LossWeights& weights);

// Forward + reverse pass; fills `grads` (sized to the model) and returns the
// loss values. The tape is cleared and reused across calls.
LossBreakdown batch_gradients(const Model& model, const BatchInputs& batch,
                              const LossWeights& weights, ParamGrads& grads, ad::Tape& tape);

}  // namespace hipq
