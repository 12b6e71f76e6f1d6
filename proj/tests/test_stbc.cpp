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

#include "scmlink/stbc.hpp"

#include <doctest.h>

using namespace scmlink;

namespace
{
    CMatrix random_channel(std::size_t rows, std::size_t cols, RngStream &rng)
    {
        CMatrix h(rows, cols);
        for (auto &v : h.data())
            v = rng.complex_normal(1.0);
        return h;
    }

    // r[t][j] = sum_i h[j][i] x[t][i]
    CMatrix transmit(const stbc::StbcBlock &b, const CMatrix &h)
    {
        CMatrix r(2, h.rows());
        for (std::size_t t = 0; t < 2; ++t)
            for (std::size_t j = 0; j < h.rows(); ++j)
                r(t, j) = h(j, 0) * b.tx_grid[t][0] + h(j, 1) * b.tx_grid[t][1];
        return r;
    }
} // namespace

TEST_CASE("alamouti code matrix")
{
    const stbc::StbcBlock b = stbc::alamouti_encode(cplx(1.0, 0.0), cplx(0.0, 0.0));
    CHECK(b.tx_grid[0][0] == cplx(1.0, 0.0));
    CHECK(b.tx_grid[0][1] == cplx(0.0, 0.0));
    CHECK(b.tx_grid[1][0] == cplx(0.0, 0.0));
    CHECK(b.tx_grid[1][1] == cplx(1.0, 0.0));

    const cplx s1(0.3, -0.7), s2(-0.2, 0.5);
    const stbc::StbcBlock c = stbc::alamouti_encode(s1, s2);
    CHECK(c.tx_grid[1][0] == -std::conj(s2));
    CHECK(c.tx_grid[1][1] == std::conj(s1));
}

TEST_CASE("noiseless combining recovers both symbols")
{
    RngStream rng(1, "stbc");
    for (std::size_t nr : {1u, 2u, 4u})
        for (int trial = 0; trial < 50; ++trial)
        {
            const CMatrix h = random_channel(nr, 2, rng);
            const cplx s1 = rng.complex_normal(1.0), s2 = rng.complex_normal(1.0);
            const stbc::Combined c = stbc::alamouti_combine(transmit(stbc::alamouti_encode(s1, s2), h), h);
            double g = 0.0;
            for (const auto &v : h.data())
                g += std::norm(v);
            CHECK(c.gain == doctest::Approx(g).epsilon(1e-12));
            CHECK(std::abs(c.s1 / c.gain - s1) < 1e-12);
            CHECK(std::abs(c.s2 / c.gain - s2) < 1e-12);
        }
}

TEST_CASE("combining has no cross-talk between the two symbols")
{
    RngStream rng(2, "stbc");
    const CMatrix h = random_channel(2, 2, rng);
    const stbc::Combined only1 = stbc::alamouti_combine(transmit(stbc::alamouti_encode(1.0, 0.0), h), h);
    const stbc::Combined only2 = stbc::alamouti_combine(transmit(stbc::alamouti_encode(0.0, 1.0), h), h);
    CHECK(std::abs(only1.s2) < 1e-12);
    CHECK(std::abs(only2.s1) < 1e-12);
}

TEST_CASE("combiner gain scales with the square of the channel")
{
    RngStream rng(3, "stbc");
    const CMatrix h = random_channel(2, 2, rng);
    CMatrix h2 = h;
    for (auto &v : h2.data())
        v *= 2.0;
    const stbc::Combined a = stbc::alamouti_combine(transmit(stbc::alamouti_encode(1.0, 1.0), h), h);
    const stbc::Combined b = stbc::alamouti_combine(transmit(stbc::alamouti_encode(1.0, 1.0), h2), h2);
    CHECK(b.gain == doctest::Approx(4.0 * a.gain));
}

TEST_CASE("hadamard pilot rows are orthogonal")
{
    for (std::size_t len : {2u, 4u, 8u, 64u})
    {
        const stbc::PilotFrame f = stbc::make_pilot_frame(2, len);
        REQUIRE(f.num_tx() == 2);
        REQUIRE(f.length() == len);
        double dot = 0.0, e0 = 0.0;
        for (std::size_t t = 0; t < len; ++t)
        {
            CHECK(std::abs(f.sequences[0][t]) == 1.0);
            dot += f.sequences[0][t] * f.sequences[1][t];
            e0 += f.sequences[0][t] * f.sequences[0][t];
        }
        CHECK(dot == 0.0);
        CHECK(e0 == static_cast<double>(len));
    }
    CHECK_THROWS_AS(stbc::make_pilot_frame(2, 6), std::invalid_argument);
    CHECK_THROWS_AS(stbc::make_pilot_frame(4, 2), std::invalid_argument);
}

TEST_CASE("pilot estimation is exact without noise and unbiased with it")
{
    const std::size_t nr = 2, nt = 2, nk = 16, len = 8;
    RngStream rng(4, "stbc");
    const stbc::PilotFrame f = stbc::make_pilot_frame(nt, len);
    CVector h(nr * nt * nk);
    for (auto &v : h)
        v = rng.complex_normal(1.0);

    const auto observe = [&](double sigma2, RngStream &nrng) {
        stbc::PilotObservation obs{nr, len, nk, CVector(nr * len * nk)};
        for (std::size_t j = 0; j < nr; ++j)
            for (std::size_t t = 0; t < len; ++t)
                for (std::size_t k = 0; k < nk; ++k)
                {
                    cplx r = sigma2 > 0.0 ? nrng.complex_normal(sigma2) : cplx(0.0);
                    for (std::size_t i = 0; i < nt; ++i)
                        r += h[(j * nt + i) * nk + k] * f.sequences[i][t];
                    obs.at(j, t, k) = r;
                }
        return obs;
    };

    RngStream nrng(5, "stbc-noise");
    const stbc::CsiEstimate clean = stbc::estimate_csi(observe(0.0, nrng), f);
    for (std::size_t i = 0; i < h.size(); ++i)
        CHECK(std::abs(clean.h[i] - h[i]) < 1e-12);

    const double sigma2 = 0.5;
    double err = 0.0;
    std::size_t count = 0;
    for (int trial = 0; trial < 200; ++trial)
    {
        const stbc::CsiEstimate est = stbc::estimate_csi(observe(sigma2, nrng), f);
        for (std::size_t i = 0; i < h.size(); ++i, ++count)
            err += std::norm(est.h[i] - h[i]);
    }
    CHECK(err / static_cast<double>(count) == doctest::Approx(sigma2 / static_cast<double>(len)).epsilon(0.2));
}

TEST_CASE("row selection drops correlated and duplicate rows")
{
    // duplicate rows collapse
    const CMatrix dup{{1.0, 2.0}, {1.0, 2.0}, {0.0, 1.0}};
    const stbc::RowSelection a = stbc::select_channel_rows(dup);
    CHECK(a.kept == std::vector<std::size_t>{0, 2});

    // scaled copy: the weaker one goes
    const CMatrix scaled{{0.1, 0.2}, {1.0, 2.0}};
    CHECK(stbc::select_channel_rows(scaled).kept == std::vector<std::size_t>{1});

    // nearly parallel rows: the stronger survives
    const CMatrix near{{0.99, 0.01}, {1.0, 0.0}};
    CHECK(stbc::select_channel_rows(near).kept == std::vector<std::size_t>{1});

    // orthogonal rows stay even at very different power
    const CMatrix orth{{1.0, 0.0}, {0.0, 0.01}};
    CHECK(stbc::select_channel_rows(orth).kept == std::vector<std::size_t>{0, 1});

    // pruning is idempotent
    RngStream rng(6, "rows");
    CMatrix h = random_channel(6, 2, rng);
    const stbc::RowSelection once = stbc::select_channel_rows(h);
    const stbc::RowSelection twice = stbc::select_channel_rows(once.reduced);
    CHECK(twice.kept.size() == once.kept.size());
    CHECK((twice.reduced - once.reduced).max_abs() == 0.0);

    CHECK_THROWS_AS(stbc::select_channel_rows(CMatrix{}), std::invalid_argument);
}
