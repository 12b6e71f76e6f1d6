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

#include "scmlink/fading.hpp"

#include <doctest.h>

#include <algorithm>

using namespace scmlink;

namespace
{
    fading::TdlConfig two_tap(double fd)
    {
        fading::TdlConfig c;
        c.tap_delays_s = {0.0, 1e-6};
        c.tap_powers = {0.7, 0.3};
        c.doppler_hz = fd;
        return c;
    }
} // namespace

TEST_CASE("tap autocorrelation follows J0")
{
    fading::TdlConfig cfg;
    cfg.doppler_hz = 100.0;
    cfg.sample_time_s = 1e-4; // 10 kHz sampling so lags reach the first J0 zero
    const std::vector<std::size_t> lags{0, 5, 10, 20, 38, 60};
    std::vector<cplx> acc(lags.size(), 0.0);
    const int trials = 400;
    for (int s = 0; s < trials; ++s)
    {
        const fading::TdlProcess p(cfg, static_cast<std::uint64_t>(s));
        const cplx h0 = p.taps_at(0.0)[0];
        for (std::size_t i = 0; i < lags.size(); ++i)
            acc[i] += p.taps_at(static_cast<double>(lags[i]))[0] * std::conj(h0);
    }
    for (std::size_t i = 0; i < lags.size(); ++i)
    {
        const double tau = static_cast<double>(lags[i]) * cfg.sample_time_s;
        const double want = bessel_j0(2.0 * pi * cfg.doppler_hz * tau);
        CAPTURE(lags[i]);
        CHECK(std::abs(acc[i].real() / trials - want) < 0.05);
    }
}

TEST_CASE("tap envelope is Rayleigh")
{
    fading::TdlConfig cfg;
    cfg.doppler_hz = 50.0;
    std::vector<double> r;
    for (std::uint64_t s = 0; s < 100000; ++s)
        r.push_back(std::abs(fading::TdlProcess(cfg, s).taps_at(0.0)[0]));
    std::sort(r.begin(), r.end());
    // Kolmogorov-Smirnov against F(r) = 1 - exp(-r^2) for unit power
    double d = 0.0;
    const double n = static_cast<double>(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
    {
        const double f = 1.0 - std::exp(-r[i] * r[i]);
        d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
    }
    CHECK(d <= 0.01);
}

TEST_CASE("tap powers and cross-correlation")
{
    const fading::TdlConfig cfg = two_tap(100.0);
    double p0 = 0.0, p1 = 0.0;
    cplx x = 0.0;
    const int trials = 4000;
    for (int s = 0; s < trials; ++s)
    {
        const CVector t = fading::TdlProcess(cfg, static_cast<std::uint64_t>(s)).taps_at(123.0);
        p0 += std::norm(t[0]);
        p1 += std::norm(t[1]);
        x += t[0] * std::conj(t[1]);
    }
    CHECK(p0 / trials == doctest::Approx(0.7).epsilon(0.05));
    CHECK(p1 / trials == doctest::Approx(0.3).epsilon(0.05));
    CHECK(std::abs(x) / trials / std::sqrt(0.7 * 0.3) < 0.05);
}

TEST_CASE("zero Doppler freezes the taps")
{
    const fading::TdlProcess p(two_tap(0.0), 3);
    const auto w = p.window(0, 500);
    for (std::size_t s = 1; s < 500; ++s)
    {
        CHECK(w.taps(0, s) == w.taps(0, 0));
        CHECK(w.taps(1, s) == w.taps(1, 0));
    }
}

TEST_CASE("windows are position independent and interpolation stays close")
{
    const fading::TdlProcess p(two_tap(100.0), 4);
    const auto whole = p.window(0, 300);
    const auto part = p.window(100, 50);
    for (std::size_t s = 0; s < 50; ++s)
        CHECK(std::abs(part.taps(0, s) - whole.taps(0, 100 + s)) < 1e-12);

    const auto interp = p.window_interpolated(0, 300, 74);
    for (std::size_t s = 0; s < 300; ++s)
        CHECK(std::abs(interp.taps(1, s) - whole.taps(1, s)) < 1e-3);
    CHECK(std::abs(interp.taps(0, 148) - whole.taps(0, 148)) < 1e-12);
}

TEST_CASE("apply matches a direct time-varying convolution")
{
    const fading::TdlConfig cfg = two_tap(100.0); // delays 0 and 5 samples
    const fading::TdlProcess p(cfg, 5);
    RngStream rng(6, "tx");
    CVector tx(64);
    for (auto &v : tx)
        v = rng.complex_normal(1.0);
    const auto d = cfg.delay_samples();
    REQUIRE(d == std::vector<std::size_t>{0, 5});
    const auto real = p.window(0, tx.size() + d.back());
    const CVector y = fading::apply(tx, real, cfg);
    REQUIRE(y.size() == tx.size() + 5);
    for (std::size_t n = 0; n < y.size(); ++n)
    {
        cplx want = 0.0;
        for (std::size_t k = 0; k < 2; ++k)
            if (n >= d[k] && n - d[k] < tx.size())
                want += real.taps(k, n) * tx[n - d[k]];
        CHECK(std::abs(y[n] - want) < 1e-12);
    }
}

TEST_CASE("tap frequency response")
{
    const CVector one{cplx(0.6, -0.2)};
    const std::vector<std::size_t> d0{0};
    for (const auto &h : fading::tap_frequency_response(one, d0, 64))
        CHECK(std::abs(h - one[0]) < 1e-15);

    const CVector taps{cplx(0.8, 0.0), cplx(0.0, 0.6)};
    const std::vector<std::size_t> d{0, 3};
    const CVector h = fading::tap_frequency_response(taps, d, 64);
    double lo = 1e9, hi = 0.0, mean_power = 0.0;
    for (std::size_t k = 0; k < 64; ++k)
    {
        const cplx want = taps[0] + taps[1] * std::polar(1.0, -2.0 * pi * 3.0 * static_cast<double>(k) / 64.0);
        CHECK(std::abs(h[k] - want) < 1e-12);
        lo = std::min(lo, std::abs(h[k]));
        hi = std::max(hi, std::abs(h[k]));
        mean_power += std::norm(h[k]) / 64.0;
    }
    CHECK(hi - lo > 0.5); // frequency selective
    CHECK(mean_power == doctest::Approx(1.0).epsilon(1e-12)); // Parseval
    CHECK_THROWS_AS(fading::tap_frequency_response(taps, d0, 64), std::invalid_argument);
}

TEST_CASE("uniform profile and validation")
{
    const auto cfg = fading::uniform_profile(3, 2e-6, 50.0, 0.2e-6);
    CHECK(cfg.tap_delays_s.size() == 3);
    CHECK(cfg.tap_delays_s.back() == doctest::Approx(2e-6));
    CHECK(cfg.max_delay_samples() == 10);
    fading::TdlConfig bad = two_tap(10.0);
    bad.tap_powers = {0.5, 0.6};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("SCM adapter bounds")
{
    scm::ScmConfig cfg;
    scm::LinkConfig l;
    l.ap_user_distance_m = {100.0};
    l.theta_ap_deg = {0.0};
    l.theta_user_deg = {0.0};
    l.user_velocity_mps = {1.0};
    l.user_direction_deg = {0.0};
    l.user_height_m = {1.5};
    l.ap_height_m = {32.0};
    l.user_ids = {1};
    const auto t = scm::generate(cfg, scm::AntennaConfig::uniform(8, 2), l, 2, 1);
    const ofdm::OfdmConfig ofdm;
    const auto fr = fading::scm_frequency_response(t, 0, 1, ofdm);
    CHECK(fr.num_rx == 8);
    CHECK(fr.num_tx == 2);
    CHECK(fr.num_subcarriers == 64);
    CHECK_THROWS_AS(fading::scm_frequency_response(t, 1, 0, ofdm), std::out_of_range);
    CHECK_THROWS_AS(fading::scm_frequency_response(t, 0, 2, ofdm), std::out_of_range);

    // subcarrier 0 is the plain sum of path coefficients
    cplx sum = 0.0;
    for (std::size_t k = 0; k < t.dims[3]; ++k)
        sum += t.at(2, 1, 0, k, 1);
    CHECK(std::abs(fr.at(2, 1, 0) - sum) < 1e-12);
}
