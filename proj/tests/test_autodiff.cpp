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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "hipq/autodiff.hpp"

using hipq::ad::Tape;
using hipq::ad::Var;

namespace {

// Central-difference derivative of a scalar function of n variables.
double central_diff(const std::function<double(const std::vector<double>&)>& f,
                    std::vector<double> x, std::size_t i, double h = 1e-6) {
    x[i] += h;
    double up = f(x);
    x[i] -= 2 * h;
    double down = f(x);
    return (up - down) / (2 * h);
}

}  // namespace

TEST_CASE("constants stay off the tape and mix with tracked values", "[autodiff]") {
    Tape tape;
    Var c(3.0);
    REQUIRE(c.is_const());
    Var x = tape.leaf(2.0);
    Var y = x * 3.0 + 1.0;  // implicit constants on both sides
    REQUIRE(y.v == Catch::Approx(7.0));
    tape.backward(y);
    REQUIRE(tape.adjoint(x) == Catch::Approx(3.0));

    Var pure = Var(2.0) * Var(5.0) + hipq::ad::exp(Var(0.0));
    REQUIRE(pure.is_const());
    REQUIRE(pure.v == Catch::Approx(11.0));
}

TEST_CASE("arithmetic operator adjoints match calculus", "[autodiff]") {
    Tape tape;
    Var x = tape.leaf(1.7);
    Var y = tape.leaf(-0.6);
    Var f = (x * y - x / y + (-y)) * 2.0;
    tape.backward(f);
    // f = 2(xy - x/y - y); df/dx = 2(y - 1/y); df/dy = 2(x + x/y^2 - 1).
    REQUIRE(tape.adjoint(x) == Catch::Approx(2 * (-0.6 - 1.0 / -0.6)).epsilon(1e-12));
    REQUIRE(tape.adjoint(y) == Catch::Approx(2 * (1.7 + 1.7 / 0.36 - 1)).epsilon(1e-12));
}

TEST_CASE("unary primitives match closed-form derivatives", "[autodiff]") {
    struct Case {
        double x;
        std::function<Var(const Var&)> op;
        std::function<double(double)> val;
        std::function<double(double)> deriv;
    };
    std::vector<Case> cases = {
        {0.8, [](const Var& v) { return hipq::ad::exp(v); },
         [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); }},
        {2.3, [](const Var& v) { return hipq::ad::log(v); },
         [](double x) { return std::log(x); }, [](double x) { return 1.0 / x; }},
        {1.9, [](const Var& v) { return hipq::ad::sqrt(v); },
         [](double x) { return std::sqrt(x); }, [](double x) { return 0.5 / std::sqrt(x); }},
        {0.4, [](const Var& v) { return hipq::ad::cosh(v); },
         [](double x) { return std::cosh(x); }, [](double x) { return std::sinh(x); }},
        {0.4, [](const Var& v) { return hipq::ad::sinh(v); },
         [](double x) { return std::sinh(x); }, [](double x) { return std::cosh(x); }},
    };
    for (const Case& c : cases) {
        Tape tape;
        Var x = tape.leaf(c.x);
        Var y = c.op(x);
        REQUIRE(y.v == Catch::Approx(c.val(c.x)).epsilon(1e-14));
        tape.backward(y);
        REQUIRE(tape.adjoint(x) == Catch::Approx(c.deriv(c.x)).epsilon(1e-12));
    }
}

TEST_CASE("sinhc handles the removable singularity and its derivative", "[autodiff]") {
    // Large argument: plain sinh(z)/z.
    {
        Tape tape;
        Var z = tape.leaf(1.3);
        Var y = hipq::ad::sinhc(z);
        REQUIRE(y.v == Catch::Approx(std::sinh(1.3) / 1.3).epsilon(1e-14));
        tape.backward(y);
        double expect = std::cosh(1.3) / 1.3 - std::sinh(1.3) / (1.3 * 1.3);
        REQUIRE(tape.adjoint(z) == Catch::Approx(expect).epsilon(1e-12));
    }
    // Series branch.
    for (double z0 : {0.0, 1e-6, 5e-5, -5e-5}) {
        Tape tape;
        Var z = tape.leaf(z0);
        Var y = hipq::ad::sinhc(z);
        double expect_v = z0 == 0.0 ? 1.0 : std::sinh(z0) / z0;
        REQUIRE(y.v == Catch::Approx(expect_v).margin(1e-15));
        tape.backward(y);
        double fd = central_diff([](const std::vector<double>& x) { return hipq::ad::sinhc(x[0]); },
                                 {z0}, 0, 1e-6);
        REQUIRE(tape.adjoint(z) == Catch::Approx(fd).margin(1e-9));
    }
    // Both branches agree with sinh(z)/z right at the switch point |z| = 1e-4.
    REQUIRE(hipq::ad::sinhc(0.99e-4) ==
            Catch::Approx(std::sinh(0.99e-4) / 0.99e-4).epsilon(1e-14));
    REQUIRE(hipq::ad::sinhc(1.01e-4) ==
            Catch::Approx(std::sinh(1.01e-4) / 1.01e-4).epsilon(1e-14));
}

TEST_CASE("acosh1p computes acosh(1 + t) with a clamped lower branch", "[autodiff]") {
    {
        Tape tape;
        Var t = tape.leaf(0.9);
        Var y = hipq::ad::acosh1p(t);
        REQUIRE(y.v == Catch::Approx(std::acosh(1.9)).epsilon(1e-14));
        tape.backward(y);
        double expect = 1.0 / std::sqrt(0.9 * (0.9 + 2.0));
        REQUIRE(tape.adjoint(t) == Catch::Approx(expect).epsilon(1e-12));
    }
    // At or below the clamp the value and the partial are both zero.
    for (double t0 : {0.0, -1e-9, -0.5}) {
        Tape tape;
        Var t = tape.leaf(t0);
        Var y = hipq::ad::acosh1p(t);
        REQUIRE(y.v == 0.0);
        tape.backward(y);
        REQUIRE(tape.adjoint(t) == 0.0);
    }
}

TEST_CASE("sqrt_abs differentiates sqrt(|x|) on both sides", "[autodiff]") {
    for (double x0 : {2.5, -2.5}) {
        Tape tape;
        Var x = tape.leaf(x0);
        Var y = hipq::ad::sqrt_abs(x);
        REQUIRE(y.v == Catch::Approx(std::sqrt(std::fabs(x0))).epsilon(1e-14));
        tape.backward(y);
        double sign = x0 < 0 ? -1.0 : 1.0;
        REQUIRE(tape.adjoint(x) ==
                Catch::Approx(sign * 0.5 / std::sqrt(std::fabs(x0))).epsilon(1e-12));
    }
}

TEST_CASE("fused dot products match manual loops and gradients", "[autodiff]") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> unit(0.0, 1.0);
    const int n = 7;
    std::vector<double> av(n), bv(n);
    for (int i = 0; i < n; ++i) {
        av[i] = unit(rng);
        bv[i] = unit(rng);
    }

    Tape tape;
    std::vector<Var> a(n), b(n);
    for (int i = 0; i < n; ++i) {
        a[i] = tape.leaf(av[i]);
        b[i] = tape.leaf(bv[i]);
    }
    Var d = hipq::ad::dot(std::span<const Var>(a), std::span<const Var>(b));
    double manual = 0.0;
    for (int i = 0; i < n; ++i) manual += av[i] * bv[i];
    REQUIRE(d.v == Catch::Approx(manual).epsilon(1e-14));
    tape.backward(d);
    for (int i = 0; i < n; ++i) {
        REQUIRE(tape.adjoint(a[i]) == Catch::Approx(bv[i]));
        REQUIRE(tape.adjoint(b[i]) == Catch::Approx(av[i]));
    }

    // Mixed Var/double dot: only the tracked side gets gradient.
    Tape tape2;
    std::vector<Var> a2(n);
    for (int i = 0; i < n; ++i) a2[i] = tape2.leaf(av[i]);
    Var d2 = hipq::ad::dot(std::span<const Var>(a2), std::span<const double>(bv));
    REQUIRE(d2.v == Catch::Approx(manual).epsilon(1e-14));
    tape2.backward(d2);
    for (int i = 0; i < n; ++i) REQUIRE(tape2.adjoint(a2[i]) == Catch::Approx(bv[i]));

    // Double/double dot stays a plain number.
    REQUIRE(hipq::ad::dot(std::span<const double>(av), std::span<const double>(bv)) ==
            Catch::Approx(manual));
}

TEST_CASE("sum fuses n partials into one node", "[autodiff]") {
    Tape tape;
    std::vector<Var> xs;
    double expect = 0.0;
    for (int i = 0; i < 9; ++i) {
        xs.push_back(tape.leaf(0.3 * i - 1.0));
        expect += 0.3 * i - 1.0;
    }
    Var s = hipq::ad::sum(std::span<const Var>(xs));
    REQUIRE(s.v == Catch::Approx(expect).epsilon(1e-14));
    Var f = s * s;
    tape.backward(f);
    for (const Var& x : xs) REQUIRE(tape.adjoint(x) == Catch::Approx(2 * expect).epsilon(1e-12));
}

TEST_CASE("logsumexp is stable for huge logits and differentiates to softmax",
          "[autodiff]") {
    Tape tape;
    std::vector<double> raw = {1000.0, 999.0, 996.5, -2000.0};
    std::vector<Var> xs;
    for (double r : raw) xs.push_back(tape.leaf(r));
    Var lse = hipq::ad::logsumexp(std::span<const Var>(xs));
    REQUIRE(std::isfinite(lse.v));

    double mx = 1000.0, acc = 0.0;
    for (double r : raw) acc += std::exp(r - mx);
    REQUIRE(lse.v == Catch::Approx(mx + std::log(acc)).epsilon(1e-14));

    tape.backward(lse);
    double wsum = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        double w = std::exp(raw[i] - lse.v);
        REQUIRE(tape.adjoint(xs[i]) == Catch::Approx(w).margin(1e-15));
        wsum += tape.adjoint(xs[i]);
    }
    REQUIRE(wsum == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("composite expression gradients agree with finite differences", "[autodiff]") {
    auto f = [](const std::vector<double>& in) {
        double x = in[0], y = in[1], z = in[2];
        return std::exp(x * y) + std::sqrt(x / z) * std::cosh(y) - std::log(z + x * x);
    };
    std::vector<double> at = {1.2, -0.7, 2.1};

    Tape tape;
    Var x = tape.leaf(at[0]), y = tape.leaf(at[1]), z = tape.leaf(at[2]);
    Var out = hipq::ad::exp(x * y) + hipq::ad::sqrt(x / z) * hipq::ad::cosh(y) -
              hipq::ad::log(z + x * x);
    REQUIRE(out.v == Catch::Approx(f(at)).epsilon(1e-12));
    tape.backward(out);
    std::vector<Var> leaves = {x, y, z};
    for (std::size_t i = 0; i < 3; ++i) {
        double fd = central_diff(f, at, i);
        REQUIRE(tape.adjoint(leaves[i]) == Catch::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("tape clear supports reuse without stale state", "[autodiff]") {
    Tape tape;
    Var x = tape.leaf(2.0);
    Var y = hipq::ad::exp(x);
    tape.backward(y);
    double first = tape.adjoint(x);
    std::size_t nodes_first = tape.size();

    tape.clear();
    REQUIRE(tape.size() == 0);
    Var x2 = tape.leaf(2.0);
    Var y2 = hipq::ad::exp(x2);
    tape.backward(y2);
    REQUIRE(tape.adjoint(x2) == Catch::Approx(first));
    REQUIRE(tape.size() == nodes_first);
}

TEST_CASE("backward accumulates fan-out contributions", "[autodiff]") {
    Tape tape;
    Var x = tape.leaf(0.9);
    Var a = x * x;       // x^2
    Var b = a + x;       // x^2 + x
    Var f = a * b;       // x^4 + x^3
    tape.backward(f);
    double x0 = 0.9;
    REQUIRE(tape.adjoint(x) == Catch::Approx(4 * x0 * x0 * x0 + 3 * x0 * x0).epsilon(1e-12));
}
