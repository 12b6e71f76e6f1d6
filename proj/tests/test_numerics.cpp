// SPDX-License-Identifier: Apache-2.0
//
// scmlink: spatial channel model and STBC MIMO-OFDM link simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "scmlink/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace scmlink;

namespace
{
    double max_err(std::span<const cplx> a, std::span<const cplx> b)
    {
        double m = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            m = std::max(m, std::abs(a[i] - b[i]));
        return m;
    }

    CVector random_vector(std::size_t n, std::uint64_t seed)
    {
        RngStream rng(seed, "test-vector");
        CVector v(n);
        for (auto &x : v)
            x = rng.complex_normal(1.0);
        return v;
    }
} // namespace

TEST_CASE("fft inverse pair restores the input")
{
    const CVector x = random_vector(64, 1);
    CHECK(max_err(ifft(fft(x)), x) < 1e-12);
}

TEST_CASE("fft of a delta is flat at 1/sqrt(N)")
{
    CVector x(64, 0.0);
    x[0] = 1.0;
    for (const auto &v : fft(x))
        CHECK(std::abs(v - cplx(1.0 / 8.0, 0.0)) < 1e-14);
}

TEST_CASE("fft agrees with the direct DFT sum")
{
    const std::size_t n = 64;
    const CVector x = random_vector(n, 2);
    CVector direct(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        cplx acc = 0.0;
        for (std::size_t t = 0; t < n; ++t)
            acc += x[t] * std::polar(1.0, -2.0 * pi * static_cast<double>(k * t) / static_cast<double>(n));
        direct[k] = acc / std::sqrt(static_cast<double>(n));
    }
    CHECK(max_err(fft(x), direct) < 1e-10);
}

TEST_CASE("fft rejects lengths that are not powers of two")
{
    CVector x(12);
    CHECK_THROWS_AS(fft(x), std::invalid_argument);
}

TEST_CASE("fft rejects non-finite input")
{
    CVector x(8, 0.0);
    x[3] = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
    CHECK_THROWS_AS(fft(x), std::invalid_argument);
}

TEST_CASE("herm_eig basic spectra")
{
    const EigenDecomposition id = herm_eig(CMatrix::identity(4));
    for (double v : id.values)
        CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

    CMatrix d(3, 3);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    d(2, 2) = 2.0;
    const EigenDecomposition e = herm_eig(d);
    CHECK(e.values[0] == doctest::Approx(1.0));
    CHECK(e.values[1] == doctest::Approx(2.0));
    CHECK(e.values[2] == doctest::Approx(3.0));
}

TEST_CASE("herm_eig reconstructs a random Hermitian matrix")
{
    const std::size_t n = 8;
    const CVector v = random_vector(n * n, 3);
    CMatrix b(n, n);
    for (std::size_t i = 0; i < n * n; ++i)
        b.data()[i] = v[i];
    const CMatrix a = b * b.adjoint(); // Hermitian by construction
    const EigenDecomposition e = herm_eig(a);

    CMatrix lambda(n, n);
    for (std::size_t i = 0; i < n; ++i)
        lambda(i, i) = e.values[i];
    const CMatrix recon = e.vectors * lambda * e.vectors.adjoint();
    CHECK((recon - a).max_abs() < 1e-8 * a.max_abs());
    CHECK((e.vectors.adjoint() * e.vectors - CMatrix::identity(n)).max_abs() < 1e-10);
    for (std::size_t i = 1; i < n; ++i)
        CHECK(e.values[i] >= e.values[i - 1]);
}

TEST_CASE("herm_eig rejects non-Hermitian input")
{
    CMatrix a{{1.0, 2.0}, {0.0, 1.0}};
    CHECK_THROWS_AS(herm_eig(a), std::invalid_argument);
}

TEST_CASE("bessel_j0 values")
{
    CHECK(bessel_j0(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(bessel_j0(2.404825557695773)) < 1e-9);
    CHECK(bessel_j0(-3.7) == doctest::Approx(bessel_j0(3.7)).epsilon(1e-15));
    // power-series oracle at moderate argument
    const double x = 5.3;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 60; ++k)
    {
        term *= -(x * x / 4.0) / (static_cast<double>(k) * static_cast<double>(k));
        sum += term;
    }
    CHECK(std::abs(bessel_j0(x) - sum) < 1e-9);
}

TEST_CASE("RngStream determinism and independence")
{
    RngStream a(7, "tag", {1, 2});
    RngStream b(7, "tag", {1, 2});
    for (int i = 0; i < 100; ++i)
        CHECK(a.next_u64() == b.next_u64());

    RngStream s1(7, "tag", {1});
    RngStream s2(7, "tag", {2});
    const std::size_t n = 1'000'000;
    double sxy = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double x = s1.normal(), y = s2.normal();
        sxy += x * y;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
    }
    const double dn = static_cast<double>(n);
    const double mx = sx / dn, my = sy / dn;
    const double vx = sxx / dn - mx * mx, vy = syy / dn - my * my;
    const double corr = (sxy / dn - mx * my) / std::sqrt(vx * vy);
    CHECK(std::abs(corr) < 0.01);
    // mean within 3 standard errors, variance within 3 standard errors (sd of s^2 ~ sqrt(2/n))
    CHECK(std::abs(mx) < 3.0 / std::sqrt(dn));
    CHECK(std::abs(vx - 1.0) < 3.0 * std::sqrt(2.0 / dn));
}

TEST_CASE("require_finite flags NaN and Inf")
{
    CHECK_NOTHROW(require_finite(1.0, "x"));
    CHECK_THROWS_AS(require_finite(std::numeric_limits<double>::infinity(), "x"), std::invalid_argument);
}

TEST_CASE("uniform draws stay in range")
{
    RngStream r(3, "u");
    for (int i = 0; i < 10000; ++i)
    {
        const double u = r.uniform();
        CHECK((u >= 0.0 && u < 1.0));
    }
}
