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

#include "hipq/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace hipq {

namespace {

double sq_euclidean(const double* a, const double* b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

// Index of the centroid nearest to x; ties take the smallest index.
int nearest_centroid(const double* x, const double* centroids, int k, int dim) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
        const double d = sq_euclidean(x, centroids + static_cast<std::size_t>(c) * dim, dim);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// k-means++: each next center is drawn with probability proportional to the
// squared distance to the nearest center chosen so far.
void seed_centroids(const double* X, int N, int dim, int k, std::mt19937_64& rng,
                    std::vector<double>& centroids) {
    centroids.assign(static_cast<std::size_t>(k) * dim, 0.0);
    std::vector<double> min_d2(static_cast<std::size_t>(N),
                               std::numeric_limits<double>::infinity());
    int first = static_cast<int>(rng() % static_cast<std::uint64_t>(N));
    std::copy_n(X + static_cast<std::size_t>(first) * dim, dim, centroids.begin());
    for (int c = 1; c < k; ++c) {
        const double* last = centroids.data() + static_cast<std::size_t>(c - 1) * dim;
        double total = 0.0;
        for (int i = 0; i < N; ++i) {
            auto& m = min_d2[static_cast<std::size_t>(i)];
            m = std::min(m, sq_euclidean(X + static_cast<std::size_t>(i) * dim, last, dim));
            total += m;
        }
        int pick = -1;
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double acc = 0.0;
            for (int i = 0; i < N; ++i) {
                acc += min_d2[static_cast<std::size_t>(i)];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = N - 1;  // roundoff on the last prefix sum
        } else {
            // All mass at the chosen centers (duplicate-heavy data): fall
            // back to a deterministic sweep.
            pick = c % N;
        }
        std::copy_n(X + static_cast<std::size_t>(pick) * dim, dim,
                    centroids.begin() + static_cast<std::size_t>(c) * dim);
    }
}

}  // namespace

void kmeans(const double* X, int N, int dim, int k, int iters, std::uint64_t seed,
            std::vector<int>& assign, std::vector<double>& centroids, std::vector<int>& sizes) {
    if (k < 1 || k > N) throw std::invalid_argument("kmeans: need 1 <= k <= N");
    if (iters < 1) throw std::invalid_argument("kmeans: need iters >= 1");

    std::mt19937_64 rng(seed);
    seed_centroids(X, N, dim, k, rng, centroids);
    assign.assign(static_cast<std::size_t>(N), -1);
    sizes.assign(static_cast<std::size_t>(k), 0);

    for (int it = 0; it < iters; ++it) {
        bool changed = false;
        std::fill(sizes.begin(), sizes.end(), 0);
        for (int i = 0; i < N; ++i) {
            const int c = nearest_centroid(X + static_cast<std::size_t>(i) * dim, centroids.data(), k, dim);
            if (c != assign[static_cast<std::size_t>(i)]) changed = true;
            assign[static_cast<std::size_t>(i)] = c;
            ++sizes[static_cast<std::size_t>(c)];
        }
        // Repair empty clusters: hand each one the farthest member of the
        // currently largest cluster.
        for (int c = 0; c < k; ++c) {
            if (sizes[static_cast<std::size_t>(c)] > 0) continue;
            int donor = 0;
            for (int j = 1; j < k; ++j)
                if (sizes[static_cast<std::size_t>(j)] > sizes[static_cast<std::size_t>(donor)]) donor = j;
            int far_item = -1;
            double far_d = -1.0;
            for (int i = 0; i < N; ++i) {
                if (assign[static_cast<std::size_t>(i)] != donor) continue;
                const double d = sq_euclidean(X + static_cast<std::size_t>(i) * dim,
                                              centroids.data() + static_cast<std::size_t>(donor) * dim, dim);
                if (d > far_d) {
                    far_d = d;
                    far_item = i;
                }
            }
            assign[static_cast<std::size_t>(far_item)] = c;
            --sizes[static_cast<std::size_t>(donor)];
            ++sizes[static_cast<std::size_t>(c)];
            changed = true;
        }
        std::fill(centroids.begin(), centroids.end(), 0.0);
        for (int i = 0; i < N; ++i) {
            double* c = centroids.data() + static_cast<std::size_t>(assign[static_cast<std::size_t>(i)]) * dim;
            const double* x = X + static_cast<std::size_t>(i) * dim;
            for (int j = 0; j < dim; ++j) c[j] += x[j];
        }
        for (int c = 0; c < k; ++c) {
            const double inv = 1.0 / sizes[static_cast<std::size_t>(c)];
            double* ctr = centroids.data() + static_cast<std::size_t>(c) * dim;
            for (int j = 0; j < dim; ++j) ctr[j] *= inv;
        }
        if (!changed) break;
    }
}

int initial_cluster_count(int N, int finest) {
    return std::min(N, std::max(finest, std::min(4 * finest, N / 2)));
}

std::vector<AggloLevel> agglomerate(const double* centroids, const int* sizes, int K0, int dim,
                                    const std::vector<int>& targets) {
    if (targets.empty()) throw std::invalid_argument("agglomerate: no target counts");
    for (std::size_t l = 0; l < targets.size(); ++l) {
        if (targets[l] < 1 || targets[l] > K0 || (l > 0 && targets[l] >= targets[l - 1]))
            throw std::invalid_argument(
                "agglomerate: target counts must be strictly descending within [1, K0]");
    }

    // Merged clusters get fresh ids; a cluster's centroid never changes, so
    // heap entries only go stale by death, never by drift.
    std::vector<double> ctr(centroids, centroids + static_cast<std::size_t>(K0) * dim);
    std::vector<long long> weight(sizes, sizes + K0);
    std::vector<int> parent(static_cast<std::size_t>(K0));
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<bool> alive(static_cast<std::size_t>(K0), true);

    struct Pair {
        double dist;
        int a, b;
        bool operator>(const Pair& o) const {
            if (dist != o.dist) return dist > o.dist;
            if (a != o.a) return a > o.a;
            return b > o.b;
        }
    };
    std::priority_queue<Pair, std::vector<Pair>, std::greater<Pair>> heap;
    for (int a = 0; a < K0; ++a)
        for (int b = a + 1; b < K0; ++b)
            heap.push({std::sqrt(sq_euclidean(ctr.data() + static_cast<std::size_t>(a) * dim,
                                              ctr.data() + static_cast<std::size_t>(b) * dim, dim)),
                       a, b});

    const auto find_root = [&parent](int c) {
        while (parent[static_cast<std::size_t>(c)] != c) {
            parent[static_cast<std::size_t>(c)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(c)])];
            c = parent[static_cast<std::size_t>(c)];
        }
        return c;
    };

    std::vector<AggloLevel> out;
    std::size_t next_target = 0;
    int live = K0;
    const auto snapshot_if_due = [&]() {
        while (next_target < targets.size() && live == targets[next_target]) {
            AggloLevel level;
            level.n_clusters = live;
            // Live roots in ascending id order index the level's clusters.
            std::vector<int> roots;
            for (int c = 0; c < static_cast<int>(alive.size()); ++c)
                if (alive[static_cast<std::size_t>(c)]) roots.push_back(c);
            std::vector<int> slot(alive.size(), -1);
            for (std::size_t s = 0; s < roots.size(); ++s) slot[static_cast<std::size_t>(roots[s])] = static_cast<int>(s);
            level.group_of_base.resize(static_cast<std::size_t>(K0));
            for (int c = 0; c < K0; ++c)
                level.group_of_base[static_cast<std::size_t>(c)] = slot[static_cast<std::size_t>(find_root(c))];
            level.prototypes.resize(roots.size() * static_cast<std::size_t>(dim));
            level.sizes.resize(roots.size());
            for (std::size_t s = 0; s < roots.size(); ++s) {
                std::copy_n(ctr.begin() + static_cast<std::size_t>(roots[s]) * dim, dim,
                            level.prototypes.begin() + s * static_cast<std::size_t>(dim));
                level.sizes[s] = static_cast<int>(weight[static_cast<std::size_t>(roots[s])]);
            }
            out.push_back(std::move(level));
            ++next_target;
        }
    };

    snapshot_if_due();
    while (next_target < targets.size()) {
        Pair top = heap.top();
        heap.pop();
        if (!alive[static_cast<std::size_t>(top.a)] || !alive[static_cast<std::size_t>(top.b)]) continue;
        alive[static_cast<std::size_t>(top.a)] = false;
        alive[static_cast<std::size_t>(top.b)] = false;
        const int id = static_cast<int>(alive.size());
        const long long wa = weight[static_cast<std::size_t>(top.a)];
        const long long wb = weight[static_cast<std::size_t>(top.b)];
        const double* ca = ctr.data() + static_cast<std::size_t>(top.a) * dim;
        const double* cb = ctr.data() + static_cast<std::size_t>(top.b) * dim;
        std::vector<double> merged(static_cast<std::size_t>(dim));
        for (int j = 0; j < dim; ++j)
            merged[static_cast<std::size_t>(j)] =
                (static_cast<double>(wa) * ca[j] + static_cast<double>(wb) * cb[j]) / static_cast<double>(wa + wb);
        ctr.insert(ctr.end(), merged.begin(), merged.end());
        weight.push_back(wa + wb);
        parent[static_cast<std::size_t>(top.a)] = id;
        parent[static_cast<std::size_t>(top.b)] = id;
        parent.push_back(id);
        alive.push_back(true);
        for (int c = 0; c < id; ++c) {
            if (!alive[static_cast<std::size_t>(c)]) continue;
            heap.push({std::sqrt(sq_euclidean(ctr.data() + static_cast<std::size_t>(c) * dim,
                                              ctr.data() + static_cast<std::size_t>(id) * dim, dim)),
                       c, id});
        }
        --live;
        snapshot_if_due();
    }
    return out;
}

void lift_prototypes(HierarchyLevel& level, const geo::ProductSpace& space) {
    const int dim = space.point_dim();
    const int n = space.ambient();
    if (level.n_clusters > 0 &&
        level.prototypes.size() != static_cast<std::size_t>(level.n_clusters) * dim)
        throw std::invalid_argument("lift_prototypes: prototype dimension mismatch");
    level.lifted.resize(level.prototypes.size());
    for (int c = 0; c < level.n_clusters; ++c) {
        const double* p = level.prototypes.data() + static_cast<std::size_t>(c) * dim;
        double* out = level.lifted.data() + static_cast<std::size_t>(c) * dim;
        for (int m = 0; m < space.M; ++m)
            geo::lift_to_manifold(p + static_cast<std::size_t>(m) * n, n,
                                  space.theta[static_cast<std::size_t>(m)], geo::kClipNorm,
                                  out + static_cast<std::size_t>(m) * n);
    }
}

Hierarchy build_hierarchy(const double* X, int N, int dim, const std::vector<int>& targets,
                          const geo::ProductSpace& space, std::uint64_t seed) {
    if (targets.empty()) throw std::invalid_argument("build_hierarchy: no target counts");
    if (dim != space.point_dim())
        throw std::invalid_argument("build_hierarchy: vector dim does not match the product space");
    if (targets.front() > N)
        throw std::invalid_argument("build_hierarchy: finest level exceeds item count");

    const int K0 = initial_cluster_count(N, targets.front());
    std::vector<int> base_assign;
    std::vector<double> base_centroids;
    std::vector<int> base_sizes;
    kmeans(X, N, dim, K0, 20, seed, base_assign, base_centroids, base_sizes);
    const std::vector<AggloLevel> agglo =
        agglomerate(base_centroids.data(), base_sizes.data(), K0, dim, targets);

    Hierarchy h;
    h.dim = dim;
    for (const AggloLevel& a : agglo) {
        HierarchyLevel level;
        level.n_clusters = a.n_clusters;
        level.assign.resize(static_cast<std::size_t>(N));
        level.members.assign(static_cast<std::size_t>(a.n_clusters), {});
        for (int i = 0; i < N; ++i) {
            const int c = a.group_of_base[static_cast<std::size_t>(base_assign[static_cast<std::size_t>(i)])];
            level.assign[static_cast<std::size_t>(i)] = c;
            level.members[static_cast<std::size_t>(c)].push_back(i);
        }
        // Prototypes straight from the members, so they match a recomputed
        // mean to roundoff rather than to merge-accumulated drift.
        level.prototypes.assign(static_cast<std::size_t>(a.n_clusters) * dim, 0.0);
        for (int c = 0; c < a.n_clusters; ++c) {
            double* p = level.prototypes.data() + static_cast<std::size_t>(c) * dim;
            for (const int i : level.members[static_cast<std::size_t>(c)]) {
                const double* x = X + static_cast<std::size_t>(i) * dim;
                for (int j = 0; j < dim; ++j) p[j] += x[j];
            }
            const double inv = 1.0 / static_cast<double>(level.members[static_cast<std::size_t>(c)].size());
            for (int j = 0; j < dim; ++j) p[j] *= inv;
        }
        lift_prototypes(level, space);
        h.levels.push_back(std::move(level));
    }
    return h;
}

int sample_instance_positive(const HierarchyLevel& level, int item, std::mt19937_64& rng) {
    const auto& cluster = level.members[static_cast<std::size_t>(level.assign[static_cast<std::size_t>(item)])];
    if (cluster.size() <= 1) return item;
    std::uniform_int_distribution<std::size_t> pick(0, cluster.size() - 2);
    std::size_t j = pick(rng);
    // Skip over the item's own slot in its (sorted) cluster.
    const auto self = std::lower_bound(cluster.begin(), cluster.end(), item) - cluster.begin();
    if (j >= static_cast<std::size_t>(self)) ++j;
    return cluster[j];
}

int sample_instance_positive(const HierarchyLevel& level, int item, const std::vector<int>& pool,
                             std::mt19937_64& rng) {
    const int cluster = level.assign[static_cast<std::size_t>(item)];
    std::vector<int> candidates;
    for (const int p : pool)
        if (p != item && level.assign[static_cast<std::size_t>(p)] == cluster) candidates.push_back(p);
    if (candidates.empty()) return item;
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    return candidates[pick(rng)];
}

}  // namespace hipq
