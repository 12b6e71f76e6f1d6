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

#include "scmlink/aoa.hpp"

#include <doctest.h>

#include <algorithm>

using namespace scmlink;

namespace
{
    aoa::ArraySnapshotSet sources(const std::vector<double> &angles, std::size_t elements, std::size_t snapshots,
                                  double noise_var, std::uint64_t seed)
    {
        RngStream rng(seed, "aoa-test");
        aoa::ArraySnapshotSet s;
        s.snapshots = CMatrix(elements, snapshots);
        for (std::size_t t = 0; t < snapshots; ++t)
        {
            for (double ang : angles)
            {
                const CVector a = aoa::steering_vector(ang, elements, 0.5);
                const cplx amp = rng.complex_normal(1.0);
                for (std::size_t l = 0; l < elements; ++l)
                    s.snapshots(l, t) += amp * a[l];
            }
            if (noise_var > 0.0)
                for (std::size_t l = 0; l < elements; ++l)
                    s.snapshots(l, t) += rng.complex_normal(noise_var);
        }
        return s;
    }
} // namespace

TEST_CASE("steering vector phases")
{
    for (const auto &v : aoa::steering_vector(0.0, 8, 0.5))
        CHECK(std::abs(v - cplx(1.0, 0.0)) < 1e-15);

    // half-wavelength spacing at 30 degrees: pi/2 per element
    const CVector a = aoa::steering_vector(30.0, 4, 0.5);
    for (std::size_t l = 0; l < 4; ++l)
        CHECK(std::abs(a[l] - std::polar(1.0, 0.5 * pi * static_cast<double>(l))) < 1e-12);

    const CVector p = aoa::steering_vector(23.0, 6, 0.5);
    const CVector m = aoa::steering_vector(-23.0, 6, 0.5);
    for (std::size_t l = 0; l < 6; ++l)
        CHECK(std::abs(p[l] - std::conj(m[l])) < 1e-12);
}

TEST_CASE("noiseless single source at broadside")
{
    const aoa::AoaEstimate e = aoa::music_estimate(sources({0.0}, 8, 20, 0.0, 1), 1);
    REQUIRE(e.peaks.size() == 1);
    CHECK(std::abs(e.peaks[0].angle_deg) <= 0.1 + 1e-9);
}

TEST_CASE("noiseless sources are recovered within one grid step")
{
    RngStream rng(5, "aoa-angles");
    for (int trial = 0; trial < 20; ++trial)
    {
        const std::size_t p = 1 + static_cast<std::size_t>(rng.uniform() * 3);
        std::vector<double> want;
        while (want.size() < p)
        {
            const double ang = std::round(rng.uniform(-60.0, 60.0));
            if (std::all_of(want.begin(), want.end(), [&](double w) { return std::abs(w - ang) >= 15.0; }))
                want.push_back(ang);
        }
        const aoa::AoaEstimate e = aoa::music_estimate(sources(want, 8, 50, 0.0, 100 + trial), p);
        REQUIRE(e.peaks.size() == p);
        for (double w : want)
        {
            double best = 1e9;
            for (const auto &pk : e.peaks)
                best = std::min(best, std::abs(pk.angle_deg - w));
            CHECK(best <= 0.1 + 1e-9);
        }
    }
}

TEST_CASE("two sources are resolved")
{
    const aoa::AoaEstimate e = aoa::music_estimate(sources({-15.0, 15.0}, 8, 200, 0.01, 2), 2);
    REQUIRE(e.peaks.size() == 2);
    std::vector<double> got{e.peaks[0].angle_deg, e.peaks[1].angle_deg};
    std::sort(got.begin(), got.end());
    CHECK(got[0] == doctest::Approx(-15.0).epsilon(0.5 / 15.0));
    CHECK(got[1] == doctest::Approx(15.0).epsilon(0.5 / 15.0));
}

TEST_CASE("estimate is invariant to snapshot scaling and spectrum is positive")
{
    auto s = sources({10.0, -40.0}, 8, 100, 0.05, 3);
    const aoa::AoaEstimate a = aoa::music_estimate(s, 2);
    for (auto &v : s.snapshots.data())
        v *= cplx(3.0, -2.0);
    const aoa::AoaEstimate b = aoa::music_estimate(s, 2);
    REQUIRE(a.peaks.size() == b.peaks.size());
    for (std::size_t i = 0; i < a.peaks.size(); ++i)
        CHECK(std::abs(a.peaks[i].angle_deg - b.peaks[i].angle_deg) <= 0.1 + 1e-9);
    for (double v : a.spectrum)
        CHECK(v > 0.0);
    CHECK(a.angles_deg.size() == 1801);
}

TEST_CASE("argument checks")
{
    const auto s = sources({0.0}, 4, 10, 0.0, 4);
    CHECK_THROWS_AS(aoa::music_estimate(s, 0), std::invalid_argument);
    CHECK_THROWS_AS(aoa::music_estimate(s, 4), std::invalid_argument);
    CHECK_THROWS_AS((aoa::AzimuthGrid{10.0, 0.0, 1.0}.angles()), std::invalid_argument);
}
