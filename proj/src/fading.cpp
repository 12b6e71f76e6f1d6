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

#include <algorithm>
#include <numeric>

namespace scmlink::fading
{
    void TdlConfig::validate() const
    {
        if (tap_delays_s.empty())
            throw std::invalid_argument("tdl.tap_delays_s must hold at least one tap");
        if (tap_powers.size() != tap_delays_s.size())
            throw std::invalid_argument("tdl.tap_powers and tdl.tap_delays_s lengths differ");
        if (tap_delays_s.front() < 0.0)
            throw std::invalid_argument("tdl.tap_delays_s must be nonnegative");
        for (std::size_t i = 1; i < tap_delays_s.size(); ++i)
            if (!(tap_delays_s[i] > tap_delays_s[i - 1]))
                throw std::invalid_argument("tdl.tap_delays_s must be ascending and unique");
        for (double p : tap_powers)
            if (!(p >= 0.0))
                throw std::invalid_argument("tdl.tap_powers must be nonnegative");
        const double total = std::accumulate(tap_powers.begin(), tap_powers.end(), 0.0);
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("tdl.tap_powers must sum to 1");
        if (!(doppler_hz >= 0.0))
            throw std::invalid_argument("tdl.doppler_hz must be nonnegative");
        if (!(sample_time_s > 0.0))
            throw std::invalid_argument("tdl.sample_time_s must be positive");
        if (num_sinusoids < 1)
            throw std::invalid_argument("tdl.num_sinusoids must be positive");
    }

    std::vector<std::size_t> TdlConfig::delay_samples() const
    {
        std::vector<std::size_t> out;
        out.reserve(tap_delays_s.size());
        for (double d : tap_delays_s)
            out.push_back(static_cast<std::size_t>(std::llround(d / sample_time_s)));
        return out;
    }

    std::size_t TdlConfig::max_delay_samples() const
    {
        const auto d = delay_samples();
        return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
    }

    TdlConfig uniform_profile(std::size_t num_taps, double max_delay_s, double doppler_hz, double sample_time_s)
    {
        if (num_taps < 1)
            throw std::invalid_argument("uniform_profile: need at least one tap");
        TdlConfig cfg;
        cfg.doppler_hz = doppler_hz;
        cfg.sample_time_s = sample_time_s;
        cfg.tap_delays_s.resize(num_taps);
        cfg.tap_powers.assign(num_taps, 1.0 / static_cast<double>(num_taps));
        const double max_samples = max_delay_s / sample_time_s;
        for (std::size_t p = 0; p < num_taps; ++p)
        {
            const double frac = num_taps == 1 ? 0.0 : static_cast<double>(p) / static_cast<double>(num_taps - 1);
            // snap to the sample grid so rounding never merges taps
            cfg.tap_delays_s[p] = std::round(frac * max_samples) * sample_time_s;
        }
        // renormalize so the sum is exactly 1 within floating point
        const double total = std::accumulate(cfg.tap_powers.begin(), cfg.tap_powers.end(), 0.0);
        for (auto &p : cfg.tap_powers)
            p /= total;
        return cfg;
    }

    // ----- sum of sinusoids --------------------------------------------------

    TdlProcess::TdlProcess(const TdlConfig &cfg, std::uint64_t seed, std::uint64_t stream_index) : cfg_(cfg)
    {
        cfg_.validate();
        const std::size_t taps = cfg_.num_taps();
        const std::size_t n_sin = cfg_.num_sinusoids;
        omega_.assign(taps, std::vector<double>(n_sin));
        phase_.assign(taps, std::vector<double>(n_sin));
        amplitude_.resize(taps);

        RngStream rng(seed, "tdl", {stream_index});
        const double w_max = 2.0 * pi * cfg_.doppler_hz * cfg_.sample_time_s;
        for (std::size_t p = 0; p < taps; ++p)
        {
            amplitude_[p] = std::sqrt(cfg_.tap_powers[p] / static_cast<double>(n_sin));
            const double offset = rng.uniform(-pi, pi);
            for (std::size_t n = 0; n < n_sin; ++n)
            {
                const double angle = (2.0 * pi * static_cast<double>(n) + offset) / static_cast<double>(n_sin);
                omega_[p][n] = w_max * std::cos(angle);
                phase_[p][n] = rng.uniform(0.0, 2.0 * pi);
            }
        }
    }

    CVector TdlProcess::taps_at(double sample_index) const
    {
        CVector out(cfg_.num_taps());
        for (std::size_t p = 0; p < out.size(); ++p)
        {
            double re = 0.0, im = 0.0;
            for (std::size_t n = 0; n < omega_[p].size(); ++n)
            {
                const double ph = omega_[p][n] * sample_index + phase_[p][n];
                re += std::cos(ph);
                im += std::sin(ph);
            }
            out[p] = amplitude_[p] * cplx(re, im);
        }
        return out;
    }

    FadingRealization TdlProcess::window(std::uint64_t start, std::size_t count) const
    {
        if (count < 1)
            throw std::invalid_argument("TdlProcess::window: count must be positive");
        FadingRealization out;
        out.taps = CMatrix(cfg_.num_taps(), count);
        // phasor recursion, re-anchored every block to bound rounding drift
        constexpr std::size_t anchor = 256;
        for (std::size_t p = 0; p < cfg_.num_taps(); ++p)
        {
            auto row = out.taps.row(p);
            const std::size_t n_sin = omega_[p].size();
            CVector phasor(n_sin), rot(n_sin);
            for (std::size_t n = 0; n < n_sin; ++n)
                rot[n] = std::polar(1.0, omega_[p][n]);
            for (std::size_t s = 0; s < count; ++s)
            {
                if (s % anchor == 0)
                {
                    const double t = static_cast<double>(start + s);
                    for (std::size_t n = 0; n < n_sin; ++n)
                        phasor[n] = std::polar(1.0, omega_[p][n] * t + phase_[p][n]);
                }
                cplx acc = 0.0;
                for (std::size_t n = 0; n < n_sin; ++n)
                {
                    acc += phasor[n];
                    phasor[n] *= rot[n];
                }
                row[s] = amplitude_[p] * acc;
            }
        }
        return out;
    }

    FadingRealization TdlProcess::window_interpolated(std::uint64_t start, std::size_t count,
                                                      std::size_t knot_stride) const
    {
        if (count < 1)
            throw std::invalid_argument("TdlProcess::window_interpolated: count must be positive");
        if (knot_stride < 1)
            throw std::invalid_argument("TdlProcess::window_interpolated: knot_stride must be positive");
        FadingRealization out;
        out.taps = CMatrix(cfg_.num_taps(), count);
        const std::size_t first_knot = static_cast<std::size_t>(start / knot_stride);
        CVector lo = taps_at(static_cast<double>(first_knot * knot_stride));
        CVector hi = taps_at(static_cast<double>((first_knot + 1) * knot_stride));
        std::size_t knot = first_knot;
        for (std::size_t s = 0; s < count; ++s)
        {
            const std::uint64_t abs_index = start + s;
            while (abs_index >= (knot + 1) * knot_stride)
            {
                ++knot;
                lo = std::move(hi);
                hi = taps_at(static_cast<double>((knot + 1) * knot_stride));
            }
            const double w = static_cast<double>(abs_index - knot * knot_stride) / static_cast<double>(knot_stride);
            for (std::size_t p = 0; p < cfg_.num_taps(); ++p)
                out.taps(p, s) = (1.0 - w) * lo[p] + w * hi[p];
        }
        return out;
    }

    FadingRealization generate_taps(const TdlConfig &cfg, std::size_t num_samples, std::uint64_t seed)
    {
        return TdlProcess(cfg, seed).window(0, num_samples);
    }

    CVector apply(std::span<const cplx> tx, const FadingRealization &real, const TdlConfig &cfg)
    {
        if (tx.empty())
            throw std::invalid_argument("fading::apply: empty input");
        if (real.num_taps() != cfg.num_taps())
            throw std::invalid_argument("fading::apply: realization tap count differs from config");
        const auto delays = cfg.delay_samples();
        const std::size_t max_d = cfg.max_delay_samples();
        const std::size_t last = real.num_samples() - 1;
        CVector y(tx.size() + max_d, 0.0);
        for (std::size_t p = 0; p < delays.size(); ++p)
        {
            const auto taps = real.taps.row(p);
            const std::size_t d = delays[p];
            for (std::size_t i = 0; i < tx.size(); ++i)
            {
                const std::size_t n = i + d;
                y[n] += taps[std::min(n, last)] * tx[i];
            }
        }
        return y;
    }

    CVector tap_frequency_response(std::span<const cplx> taps, std::span<const std::size_t> delay_samples,
                                   std::size_t num_subcarriers)
    {
        if (taps.size() != delay_samples.size())
            throw std::invalid_argument("tap_frequency_response: taps and delays differ in length");
        CVector h(num_subcarriers, 0.0);
        const double n = static_cast<double>(num_subcarriers);
        for (std::size_t p = 0; p < taps.size(); ++p)
        {
            const double step = -2.0 * pi * static_cast<double>(delay_samples[p]) / n;
            for (std::size_t k = 0; k < num_subcarriers; ++k)
                h[k] += taps[p] * std::polar(1.0, step * static_cast<double>(k));
        }
        return h;
    }

    // ----- SCM adapter -------------------------------------------------------

    FrequencyResponse scm_frequency_response(std::span<const CMatrix> path_coefficients,
                                             std::span<const double> delays_s, const ofdm::OfdmConfig &cfg)
    {
        cfg.validate();
        if (path_coefficients.empty() || path_coefficients.size() != delays_s.size())
            throw std::invalid_argument("scm_frequency_response: need one delay per path");
        FrequencyResponse out;
        out.num_rx = path_coefficients.front().rows();
        out.num_tx = path_coefficients.front().cols();
        out.num_subcarriers = cfg.num_subcarriers;
        out.h.assign(out.num_rx * out.num_tx * out.num_subcarriers, 0.0);
        const double df = cfg.subcarrier_spacing_hz();
        for (std::size_t p = 0; p < path_coefficients.size(); ++p)
        {
            const CMatrix &hp = path_coefficients[p];
            const double step = -2.0 * pi * df * delays_s[p];
            for (std::size_t k = 0; k < out.num_subcarriers; ++k)
            {
                const cplx rot = std::polar(1.0, step * static_cast<double>(k));
                for (std::size_t j = 0; j < out.num_rx; ++j)
                    for (std::size_t i = 0; i < out.num_tx; ++i)
                        out.at(j, i, k) += hp(j, i) * rot;
            }
        }
        return out;
    }

    FrequencyResponse scm_frequency_response(const scm::ChannelTensor &tensor, std::size_t link,
                                             std::size_t time_sample, const ofdm::OfdmConfig &cfg)
    {
        const auto &d = tensor.dims;
        if (link >= d[2])
            throw std::out_of_range("scm_frequency_response: link " + std::to_string(link) + " out of range");
        if (time_sample >= d[4])
            throw std::out_of_range("scm_frequency_response: time sample " + std::to_string(time_sample) +
                                    " out of range");
        if (link >= tensor.links.size())
            throw std::out_of_range("scm_frequency_response: tensor carries no path metadata for this link");

        std::vector<CMatrix> paths(d[3], CMatrix(d[0], d[1]));
        for (std::size_t k = 0; k < d[3]; ++k)
            for (std::size_t l = 0; l < d[0]; ++l)
                for (std::size_t m = 0; m < d[1]; ++m)
                    paths[k](l, m) = tensor.at(l, m, link, k, time_sample);
        return scm_frequency_response(paths, tensor.links[link].delays_s, cfg);
    }

} // namespace scmlink::fading
