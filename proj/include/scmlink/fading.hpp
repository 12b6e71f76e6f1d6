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

#pragma once

#include "scmlink/numerics.hpp"
#include "scmlink/ofdm.hpp"
#include "scmlink/scm_channel.hpp"

#include <vector>

namespace scmlink::fading
{
    struct TdlConfig
    {
        std::vector<double> tap_delays_s{0.0};
        std::vector<double> tap_powers{1.0};
        double doppler_hz = 0.0;
        double sample_time_s = 0.2e-6;
        std::size_t num_sinusoids = 64;

        void validate() const;
        std::size_t num_taps() const { return tap_delays_s.size(); }

        // Delays rounded to the sample grid.
        std::vector<std::size_t> delay_samples() const;
        std::size_t max_delay_samples() const;
    };

    // Equal-power taps spread evenly over [0, max_delay_s].
    TdlConfig uniform_profile(std::size_t num_taps, double max_delay_s, double doppler_hz, double sample_time_s);

    struct FadingRealization
    {
        CMatrix taps; // [num_taps x num_samples]

        std::size_t num_taps() const { return taps.rows(); }
        std::size_t num_samples() const { return taps.cols(); }
    };

    // Sum-of-sinusoids Rayleigh process for every tap of one antenna pair.
    // Tap p is sqrt(P_p / N) * sum_n exp(j(2 pi f_d cos(a_pn) t + phi_pn)) with
    // N equally spaced arrival angles a_pn rotated by a per-tap random offset.
    // Evaluation at any sample index is stateless, so windows can be produced
    // in any order.
    class TdlProcess
    {
    public:
        TdlProcess(const TdlConfig &cfg, std::uint64_t seed, std::uint64_t stream_index = 0);

        // Exact per-sample taps for samples [start, start + count).
        FadingRealization window(std::uint64_t start, std::size_t count) const;

        // Same window with taps evaluated exactly every `knot_stride` samples and
        // linearly interpolated in between.
        FadingRealization window_interpolated(std::uint64_t start, std::size_t count, std::size_t knot_stride) const;

        // Tap values at one sample index.
        CVector taps_at(double sample_index) const;

        const TdlConfig &config() const { return cfg_; }

    private:
        TdlConfig cfg_;
        std::vector<std::vector<double>> omega_; // rad per sample, [tap][sinusoid]
        std::vector<std::vector<double>> phase_;
        std::vector<double> amplitude_;
    };

    FadingRealization generate_taps(const TdlConfig &cfg, std::size_t num_samples, std::uint64_t seed);

    // y[n] = sum_p tap_p[n] * tx[n - d_p]; output is longer than tx by the
    // largest delay. Tap indices past the realization reuse its last column.
    CVector apply(std::span<const cplx> tx, const FadingRealization &real, const TdlConfig &cfg);

    // Frequency response of one set of taps on an N-point grid:
    // H[k] = sum_p tap_p * exp(-j 2 pi k d_p / N).
    CVector tap_frequency_response(std::span<const cplx> taps, std::span<const std::size_t> delay_samples,
                                   std::size_t num_subcarriers);

    // ----- SCM adapter -------------------------------------------------------

    // Indexed [rx][tx][subcarrier], rx = AP element, tx = user element.
    struct FrequencyResponse
    {
        std::size_t num_rx = 0;
        std::size_t num_tx = 0;
        std::size_t num_subcarriers = 0;
        CVector h;

        cplx &at(std::size_t j, std::size_t i, std::size_t k) { return h[(j * num_tx + i) * num_subcarriers + k]; }
        const cplx &at(std::size_t j, std::size_t i, std::size_t k) const
        {
            return h[(j * num_tx + i) * num_subcarriers + k];
        }
    };

    // H[j,i,k] = sum_paths h_path[j,i] * exp(-j 2 pi k df delay_path), df = 1/(N Ts).
    FrequencyResponse scm_frequency_response(std::span<const CMatrix> path_coefficients,
                                             std::span<const double> delays_s, const ofdm::OfdmConfig &cfg);

    FrequencyResponse scm_frequency_response(const scm::ChannelTensor &tensor, std::size_t link,
                                             std::size_t time_sample, const ofdm::OfdmConfig &cfg);

} // namespace scmlink::fading
