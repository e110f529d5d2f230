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

// Nested multi-level clustering of tangent-space embeddings: k-means down to
// a fine partition, then bottom-up agglomerative merging with snapshots at
// the requested cluster counts. Prototypes are tangent-space means, lifted
// onto the product manifold for use in the losses.

#include <cstdint>
#include <random>
#include <vector>

#include "hipq/geometry.hpp"

namespace hipq {

struct HierarchyLevel {
    int n_clusters = 0;
    std::vector<int> assign;                // per item: cluster index in [0, n_clusters)
    std::vector<std::vector<int>> members;  // per cluster: ascending item ids
    std::vector<double> prototypes;         // n_clusters x dim, tangent space
    std::vector<double> lifted;             // n_clusters x dim, on the product manifold
};

// Levels are ordered as the target counts were given: finest (largest count)
// first. Every finer cluster is contained in exactly one coarser cluster.
struct Hierarchy {
    int dim = 0;
    std::vector<HierarchyLevel> levels;
};

// Lloyd's algorithm with k-means++ seeding. Empty clusters are repaired by
// stealing the farthest member of the largest cluster. Deterministic under
// seed; iteration stops early once assignments are stable.
void kmeans(const double* X, int N, int dim, int k, int iters, std::uint64_t seed,
            std::vector<int>& assign, std::vector<double>& centroids, std::vector<int>& sizes);

// One snapshot of the merge process: a partition of the k-means base
// clusters, with size-weighted mean prototypes.
struct AggloLevel {
    int n_clusters = 0;
    std::vector<int> group_of_base;  // base cluster -> group index
    std::vector<double> prototypes;  // n_clusters x dim
    std::vector<int> sizes;          // n_clusters, in items
};

// Bottom-up merging of the pair at minimum centroid distance (ties:
// lexicographically smallest id pair), snapshotting whenever the live
// cluster count hits a target. Targets must be strictly descending and
// bounded by K0.
std::vector<AggloLevel> agglomerate(const double* centroids, const int* sizes, int K0, int dim,
                                    const std::vector<int>& targets);

// The k-means cluster count grown from the finest target: 4x the finest
// level, capped at N/2, floored at the finest level, never above N.
int initial_cluster_count(int N, int finest);

// Lift every prototype onto the product manifold (per-subspace tangent
// projection at the origin, norm clip, exponential map).
void lift_prototypes(HierarchyLevel& level, const geo::ProductSpace& space);

// Full pipeline: k-means, merge, per-level item assignments, prototypes
// recomputed exactly as member means, lifted prototypes.
Hierarchy build_hierarchy(const double* X, int N, int dim, const std::vector<int>& targets,
                          const geo::ProductSpace& space, std::uint64_t seed);

// Uniform draw from item's cluster excluding the item itself; returns the
// item (sentinel) when it is alone. The overload restricted to a candidate
// pool (e.g. the current batch) applies the same rule within the pool.
int sample_instance_positive(const HierarchyLevel& level, int item, std::mt19937_64& rng);
int sample_instance_positive(const HierarchyLevel& level, int item,
                             const std::vector<int>& pool, std::mt19937_64& rng);

}  // namespace hipq
