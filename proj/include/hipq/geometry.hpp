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

// Lorentz-model hyperbolic geometry.
//
// Points live on the upper sheet {x : <x,x>_L = -1/theta, x0 > 0} of a
// hyperboloid in R^{d+1}, where <.,.>_L negates the time (index 0) term.
// Every kernel is templated over the scalar type so the same code runs on
// plain doubles and on autodiff variables; ad:: provides both overload sets.
// Product points over M subspaces are stored flat, subspace-major, each
// subspace occupying d+1 consecutive ambient coordinates.

#include <cmath>
#include <span>
#include <vector>

#include "hipq/autodiff.hpp"
#include "hipq/common.hpp"

namespace hipq::geo {

// Below this Lorentz norm a tangent vector is treated as zero: the
// exponential map returns its base point and lifts skip the direction term.
inline constexpr double kTinyTangent = 1e-12;

// Aggregations whose Lorentz norm falls below this are degenerate (the mean
// left the timelike cone) and cannot be renormalized onto the sheet.
inline constexpr double kDegenerateNorm = 1e-15;

// Cap on the spatial norm of tangent vectors at the origin, applied before
// every exponential map that lifts an embedding or prototype. Keeps points
// out of the sheet's numerically hostile far field.
inline constexpr double kClipNorm = 1.5;

// <a,b>_L = -a0*b0 + sum_{i>=1} a_i*b_i, over ambient length n = d+1.
// The two sides may have different scalar types (tape variable vs. plain
// double constant); the result takes the wider one.
template <class TA, class TB>
auto minkowski_dot(const TA* a, const TB* b, int n) {
    return ad::dot(std::span<const TA>(a + 1, static_cast<std::size_t>(n - 1)),
                   std::span<const TB>(b + 1, static_cast<std::size_t>(n - 1))) -
           a[0] * b[0];
}

// Squared Lorentzian distance: ||a - b||_L^2 = -2/theta - 2<a,b>_L.
// Nonnegative for points on a sheet of curvature theta.
template <class TA, class TB, class TTheta>
auto sq_distance(const TA* a, const TB* b, int n, const TTheta& theta) {
    return -2.0 / theta - 2.0 * minkowski_dot(a, b, n);
}

// Geodesic distance: sqrt(1/theta) * acosh(-theta * <a,b>_L). The acosh
// argument is clamped to >= 1 so roundoff on near-coincident points cannot
// produce NaN.
template <class TA, class TB, class TTheta>
auto distance(const TA* a, const TB* b, int n, const TTheta& theta) {
    const auto t = -(theta * minkowski_dot(a, b, n)) - 1.0;
    return ad::acosh1p(t) / ad::sqrt(theta);
}

// Orthogonal projection of an ambient vector u onto the tangent space at p:
// proj_p(u) = u + theta * <p,u>_L * p.
template <class T, class TTheta>
void tangent_project(const T* p, const T* u, int n, const TTheta& theta, T* out) {
    const T c = theta * minkowski_dot(p, u, n);
    for (int i = 0; i < n; ++i) out[i] = u[i] + c * p[i];
}

// Exponential map at p of a tangent vector v:
//   exp_p(v) = cosh(z) * p + sinhc(z) * v,   z = sqrt(theta) * ||v||_L.
// Vanishing tangents map to p itself.
template <class T, class TTheta>
void exp_map(const T* p, const T* v, int n, const TTheta& theta, T* out) {
    const T norm = ad::sqrt_abs(minkowski_dot(v, v, n));
    if (ad::value_of(norm) < kTinyTangent) {
        for (int i = 0; i < n; ++i) out[i] = p[i];
        return;
    }
    const T z = ad::sqrt(theta) * norm;
    const T ch = ad::cosh(z);
    const T sc = ad::sinhc(z);
    for (int i = 0; i < n; ++i) out[i] = ch * p[i] + sc * v[i];
}

// The sheet's base point (sqrt(1/theta), 0, ..., 0).
inline std::vector<double> origin(int n, double theta) {
    std::vector<double> o(static_cast<std::size_t>(n), 0.0);
    o[0] = std::sqrt(1.0 / theta);
    return o;
}

// Recompute the time coordinate from the spatial ones so the point satisfies
// <x,x>_L = -1/theta exactly. Used after optimizer updates.
inline void fix_time_coordinate(double* x, int n, double theta) {
    double s = 0.0;
    for (int i = 1; i < n; ++i) s += x[i] * x[i];
    x[0] = std::sqrt(1.0 / theta + s);
}

// |<x,x>_L + 1/theta|: how far x is off the sheet. Diagnostic.
inline double manifold_defect(const double* x, int n, double theta) {
    return std::fabs(minkowski_dot(x, x, n) + 1.0 / theta);
}

// In-place norm clip of a tangent vector at the origin: if the Euclidean
// norm of the spatial part (indices 1..d) exceeds max_norm, rescale it to
// exactly max_norm. The time component is untouched (it is zero for
// tangents at the origin).
inline void clip_tangent(double* v, int n, double max_norm = kClipNorm) {
    double n2 = 0.0;
    for (int i = 1; i < n; ++i) n2 += v[i] * v[i];
    if (n2 <= max_norm * max_norm) return;
    const double scale = max_norm / std::sqrt(n2);
    for (int i = 1; i < n; ++i) v[i] *= scale;
}

// Exponential map at the origin of a tangent vector with zero time
// component (the only kind that exists there).
template <class T, class TTheta>
void exp_at_origin(const T* v, int n, const TTheta& theta, T* out) {
    const std::span<const T> s(v + 1, static_cast<std::size_t>(n - 1));
    const T n2 = ad::dot(s, s);
    const T inv_sqrt_theta = T(1.0) / ad::sqrt(theta);
    if (ad::value_of(n2) < kTinyTangent * kTinyTangent) {
        out[0] = inv_sqrt_theta;
        for (int i = 1; i < n; ++i) out[i] = v[i];
        return;
    }
    const T z = ad::sqrt(theta) * ad::sqrt(n2);
    out[0] = ad::cosh(z) * inv_sqrt_theta;
    const T sc = ad::sinhc(z);
    for (int i = 1; i < n; ++i) out[i] = sc * v[i];
}

// Lift an ambient parameter vector u (length n = d+1) onto the sheet:
// project onto the tangent space at the origin (which zeroes the time
// component), clip the spatial norm to `clip`, and apply the exponential
// map at the origin. `point_out` receives the manifold point and
// `tangent_out` the clipped tangent vector; either may be null.
template <class T, class TTheta>
void lift_to_manifold(const T* u, int n, const TTheta& theta, double clip, T* point_out,
                      T* tangent_out = nullptr) {
    const std::span<const T> s(u + 1, static_cast<std::size_t>(n - 1));
    const T n2 = ad::dot(s, s);
    T scale(1.0);
    if (ad::value_of(n2) > clip * clip) scale = T(clip) / ad::sqrt(n2);
    std::vector<T> v(static_cast<std::size_t>(n));
    v[0] = T(0.0);
    for (int i = 1; i < n; ++i) v[static_cast<std::size_t>(i)] = scale * u[i];
    if (tangent_out)
        for (int i = 0; i < n; ++i) tangent_out[i] = v[static_cast<std::size_t>(i)];
    if (point_out) exp_at_origin(v.data(), n, theta, point_out);
}

// ---- product manifold -------------------------------------------------------

// Shape and curvatures of a product of M hyperboloids of intrinsic dim d.
struct ProductSpace {
    int M = 0;
    int d = 0;
    std::vector<double> theta;  // size M

    int ambient() const { return d + 1; }
    int point_dim() const { return M * (d + 1); }
};

// Product geodesic distance: the sum of per-subspace distances, accumulated
// in subspace order (all distance paths in this library keep this order so
// results match bit-for-bit).
template <class TA, class TB, class TTheta>
auto product_distance(const TA* a, const TB* b, int M, int n, const TTheta* theta) {
    auto total = distance(a, b, n, theta[0]);
    for (int m = 1; m < M; ++m) {
        const int off = m * n;
        total += distance(a + off, b + off, n, theta[m]);
    }
    return total;
}

inline double product_distance(const double* a, const double* b, const ProductSpace& space) {
    return product_distance(a, b, space.M, space.ambient(), space.theta.data());
}

}  // namespace hipq::geo
