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

namespace scmlink::ofdm
{
    struct OfdmConfig
    {
        std::size_t num_subcarriers = 64;
        std::size_t cp_length = 10;
        double sample_time_s = 0.2e-6;

        // Throws std::invalid_argument on a bad field.
        void validate() const;

        std::size_t symbol_length() const { return num_subcarriers + cp_length; }
        double symbol_duration_s() const { return static_cast<double>(symbol_length()) * sample_time_s; }
        double subcarrier_spacing_hz() const { return 1.0 / (static_cast<double>(num_subcarriers) * sample_time_s); }

        // Longest channel delay (seconds) that the cyclic prefix absorbs.
        double max_delay_s() const { return static_cast<double>(cp_length) * sample_time_s; }
    };

    // Unitary IDFT of one block of subcarrier symbols, then the last cp_length
    // samples are prepended.
    CVector modulate(std::span<const cplx> symbols, const OfdmConfig &cfg);

    // Strips the cyclic prefix and applies the unitary DFT.
    CVector demodulate(std::span<const cplx> samples, const OfdmConfig &cfg);

    inline constexpr double equalizer_epsilon = 1e-9;

    struct Equalized
    {
        CVector symbols;
        std::vector<bool> erased; // true where |h| < equalizer_epsilon; symbol set to 0
    };

    // Per-bin zero-forcing: received[k] / h[k].
    Equalized equalize(std::span<const cplx> received, std::span<const cplx> h_est);

    // True when a channel of `num_taps` sample-spaced taps would spill past the
    // cyclic prefix (more than cp_length + 1 taps).
    inline bool violates_cyclic_prefix(std::size_t num_taps, const OfdmConfig &cfg)
    {
        return num_taps > cfg.cp_length + 1;
    }

} // namespace scmlink::ofdm
