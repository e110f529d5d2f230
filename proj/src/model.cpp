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

#include "hipq/model.hpp"

namespace hipq {

void embed(const Model& model, const double* x, double* tangent, double* point) {
    embed_kernel<double, double>(model.proj_w.data(), model.proj_b.data(),
                                 model.codebook.theta.data(), model.d_in, model.M,
                                 model.ambient(), x, tangent, point);
}

void embed_all(const Model& model, const double* X, int n_items, double* tangents, double* points) {
    const std::size_t in = static_cast<std::size_t>(model.d_in);
    const std::size_t out = static_cast<std::size_t>(model.out_dim());
    for (int i = 0; i < n_items; ++i) {
        embed(model, X + static_cast<std::size_t>(i) * in,
              tangents ? tangents + static_cast<std::size_t>(i) * out : nullptr,
              points ? points + static_cast<std::size_t>(i) * out : nullptr);
    }
}

}  // namespace hipq
