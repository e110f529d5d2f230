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

// Shared test utilities. The oracles here are deliberately written from
// scratch (own inner products, own exponential map, own linkage loop) so
// they validate the library instead of echoing it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace testutil {

// ---- scratch directory ------------------------------------------------------

class TempDir {
 public:
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "hipq_test_XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (mkdtemp(buf.data()) == nullptr) {
            throw std::runtime_error("mkdtemp failed");
        }
        path_ = buf.data();
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
    std::filesystem::path path_;
};

// ---- synthetic data ---------------------------------------------------------

struct LabeledData {
    int n = 0;
    int dim = 0;
    std::vector<double> features;  // n x dim
    std::vector<int> labels;       // n
};

// Well-separated Gaussian blobs: cluster centers ~ N(0, spread^2), points
// scattered around them with the given noise.
inline LabeledData gaussian_clusters(int n, int dim, int n_clusters, double spread, double noise,
                                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<double> centers(static_cast<std::size_t>(n_clusters) * dim);
    for (double& c : centers) c = spread * unit(rng);
    LabeledData data;
    data.n = n;
    data.dim = dim;
    data.features.resize(static_cast<std::size_t>(n) * dim);
    data.labels.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int c = static_cast<int>(rng() % static_cast<std::uint64_t>(n_clusters));
        data.labels[static_cast<std::size_t>(i)] = c;
        for (int j = 0; j < dim; ++j) {
            data.features[static_cast<std::size_t>(i) * dim + j] =
                centers[static_cast<std::size_t>(c) * dim + j] + noise * unit(rng);
        }
    }
    return data;
}

// A point exactly on the upper sheet: random spatial part, time coordinate
// solved from the constraint (independent of the library's exponential map).
inline std::vector<double> random_manifold_point(int n, double theta, double scale,
                                                 std::mt19937_64& rng) {
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<double> p(static_cast<std::size_t>(n));
    double s2 = 0.0;
    for (int i = 1; i < n; ++i) {
        p[static_cast<std::size_t>(i)] = scale * unit(rng);
        s2 += p[static_cast<std::size_t>(i)] * p[static_cast<std::size_t>(i)];
    }
    p[0] = std::sqrt(1.0 / theta + s2);
    return p;
}

// ---- independent hyperbolic mini-library for oracles ------------------------

inline double omdot(const double* a, const double* b, int n) {
    double s = -a[0] * b[0];
    for (int i = 1; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline double osqdist(const double* a, const double* b, int n, double theta) {
    return -2.0 / theta - 2.0 * omdot(a, b, n);
}

inline double odist(const double* a, const double* b, int n, double theta) {
    double arg = -theta * omdot(a, b, n);
    if (arg < 1.0) arg = 1.0;
    return std::acosh(arg) / std::sqrt(theta);
}

inline void oproject(const double* p, const double* u, int n, double theta, double* out) {
    double pu = omdot(p, u, n);
    for (int i = 0; i < n; ++i) out[i] = u[i] + theta * p[i] * pu;
}

inline void oexp(const double* p, const double* v, int n, double theta, double* out) {
    double vv = omdot(v, v, n);
    double norm = std::sqrt(std::max(vv, 0.0));
    double z = std::sqrt(theta) * norm;
    if (z < 1e-12) {
        for (int i = 0; i < n; ++i) out[i] = p[i];
        return;
    }
    double c = std::cosh(z), s = std::sinh(z) / z;
    for (int i = 0; i < n; ++i) out[i] = c * p[i] + s * v[i];
}

// Projected gradient descent for the weighted squared-distance centroid:
// mu <- exp_mu(-lr * P_mu(J * grad)), gradients derived by hand from
// d/dmu [-2/theta - 2<c,mu>_L].
inline std::vector<double> pgd_centroid(const double* words, const double* w, int K, int n,
                                        double theta, int steps = 500, double lr = 1e-2) {
    // Start from the weight-heaviest codeword.
    int start = 0;
    for (int k = 1; k < K; ++k) {
        if (w[k] > w[start]) start = k;
    }
    std::vector<double> mu(words + static_cast<std::size_t>(start) * n,
                           words + static_cast<std::size_t>(start + 1) * n);
    std::vector<double> g(static_cast<std::size_t>(n)), riem(static_cast<std::size_t>(n));
    std::vector<double> step(static_cast<std::size_t>(n)), next(static_cast<std::size_t>(n));
    for (int it = 0; it < steps; ++it) {
        // Euclidean gradient of sum_k w_k * (-2/theta - 2<c_k, mu>_L).
        for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = 0.0;
        for (int k = 0; k < K; ++k) {
            const double* c = words + static_cast<std::size_t>(k) * n;
            g[0] += w[k] * 2.0 * c[0];
            for (int i = 1; i < n; ++i) g[static_cast<std::size_t>(i)] += w[k] * (-2.0) * c[i];
        }
        g[0] = -g[0];  // metric sign correction
        oproject(mu.data(), g.data(), n, theta, riem.data());
        for (int i = 0; i < n; ++i) step[static_cast<std::size_t>(i)] = -lr * riem[static_cast<std::size_t>(i)];
        oexp(mu.data(), step.data(), n, theta, next.data());
        mu = next;
        // Re-solve the time coordinate to stay exactly on the sheet.
        double s2 = 0.0;
        for (int i = 1; i < n; ++i) s2 += mu[static_cast<std::size_t>(i)] * mu[static_cast<std::size_t>(i)];
        mu[0] = std::sqrt(1.0 / theta + s2);
    }
    return mu;
}

// ---- finite differences ------------------------------------------------------

// Relative error with a floor so near-zero gradients are compared absolutely.
inline double fd_rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-4});
}

// ---- retrieval oracle --------------------------------------------------------

// Literal average-precision evaluation, one pass, no shortcuts.
inline double oracle_map(const std::vector<std::vector<std::pair<std::uint32_t, double>>>& ranked,
                         const std::vector<std::set<int>>& qlab,
                         const std::vector<std::set<int>>& dlab, int n) {
    double total = 0.0;
    for (std::size_t q = 0; q < ranked.size(); ++q) {
        int relevant = 0;
        double ap = 0.0;
        int depth = std::min<int>(n, static_cast<int>(ranked[q].size()));
        for (int k = 0; k < depth; ++k) {
            const std::set<int>& dl = dlab[ranked[q][static_cast<std::size_t>(k)].first];
            bool rel = false;
            for (int label : qlab[q]) {
                if (dl.count(label)) {
                    rel = true;
                    break;
                }
            }
            if (rel) {
                ++relevant;
                ap += static_cast<double>(relevant) / (k + 1);
            }
        }
        if (relevant > 0) total += ap / relevant;
    }
    return ranked.empty() ? 0.0 : total / static_cast<double>(ranked.size());
}

// ---- linkage oracle ----------------------------------------------------------

// Quadratic-scan agglomerative merging: smallest centroid distance first,
// ties by the smallest (id_a, id_b) pair where merged clusters take fresh
// ids, size-weighted means. Returns, for each target count, the partition
// of the base clusters (group index per base cluster, groups ordered by
// ascending live cluster id).
inline std::vector<std::vector<int>> oracle_linkage(const std::vector<std::vector<double>>& base,
                                                    const std::vector<int>& base_sizes,
                                                    const std::vector<int>& targets) {
    struct Cluster {
        int id;
        std::vector<double> centroid;
        double size;
        std::vector<int> members;  // base cluster indices
    };
    int k0 = static_cast<int>(base.size());
    std::vector<Cluster> live;
    for (int i = 0; i < k0; ++i) {
        live.push_back({i, base[static_cast<std::size_t>(i)],
                        static_cast<double>(base_sizes[static_cast<std::size_t>(i)]), {i}});
    }
    int next_id = k0;

    std::vector<std::vector<int>> snapshots;
    std::size_t next_target = 0;
    auto snapshot_if_due = [&]() {
        while (next_target < targets.size() &&
               static_cast<int>(live.size()) == targets[next_target]) {
            std::vector<Cluster> ordered = live;
            std::sort(ordered.begin(), ordered.end(),
                      [](const Cluster& a, const Cluster& b) { return a.id < b.id; });
            std::vector<int> group(static_cast<std::size_t>(k0), -1);
            for (std::size_t g = 0; g < ordered.size(); ++g) {
                for (int m : ordered[g].members) group[static_cast<std::size_t>(m)] = static_cast<int>(g);
            }
            snapshots.push_back(group);
            ++next_target;
        }
    };
    snapshot_if_due();

    while (live.size() > 1 && next_target < targets.size()) {
        std::size_t best_a = 0, best_b = 1;
        double best = -1.0;
        for (std::size_t a = 0; a < live.size(); ++a) {
            for (std::size_t b = a + 1; b < live.size(); ++b) {
                double d2 = 0.0;
                for (std::size_t j = 0; j < live[a].centroid.size(); ++j) {
                    double diff = live[a].centroid[j] - live[b].centroid[j];
                    d2 += diff * diff;
                }
                double d = std::sqrt(d2);
                int lo = std::min(live[a].id, live[b].id), hi = std::max(live[a].id, live[b].id);
                int cur_lo = std::min(live[best_a].id, live[best_b].id);
                int cur_hi = std::max(live[best_a].id, live[best_b].id);
                if (best < 0.0 || d < best ||
                    (d == best && (lo < cur_lo || (lo == cur_lo && hi < cur_hi)))) {
                    best = d;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        Cluster merged;
        merged.id = next_id++;
        merged.size = live[best_a].size + live[best_b].size;
        merged.centroid.resize(live[best_a].centroid.size());
        for (std::size_t j = 0; j < merged.centroid.size(); ++j) {
            merged.centroid[j] = (live[best_a].size * live[best_a].centroid[j] +
                                  live[best_b].size * live[best_b].centroid[j]) /
                                 merged.size;
        }
        merged.members = live[best_a].members;
        merged.members.insert(merged.members.end(), live[best_b].members.begin(),
                              live[best_b].members.end());
        std::sort(merged.members.begin(), merged.members.end());
        if (best_a > best_b) std::swap(best_a, best_b);
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(best_b));
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(best_a));
        live.push_back(merged);
        snapshot_if_due();
    }
    return snapshots;
}

}  // namespace testutil
