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

#include "scmlink/ofdm.hpp"

#include <algorithm>

namespace scmlink::ofdm
{
    void OfdmConfig::validate() const
    {
        if (!is_power_of_two(num_subcarriers))
            throw std::invalid_argument("ofdm.num_subcarriers must be a power of two");
        if (cp_length >= num_subcarriers)
            throw std::invalid_argument("ofdm.cp_length must be smaller than ofdm.num_subcarriers");
        if (!(sample_time_s > 0.0))
            throw std::invalid_argument("ofdm.sample_time_s must be positive");
    }

    CVector modulate(std::span<const cplx> symbols, const OfdmConfig &cfg)
    {
        cfg.validate();
        const std::size_t n = cfg.num_subcarriers;
        if (symbols.size() != n)
            throw std::invalid_argument("ofdm::modulate: expected " + std::to_string(n) + " symbols, got " +
                                        std::to_string(symbols.size()));

        const CVector body = ifft(symbols);
        CVector out(cfg.symbol_length());
        std::copy(body.end() - static_cast<std::ptrdiff_t>(cfg.cp_length), body.end(), out.begin());
        std::copy(body.begin(), body.end(), out.begin() + static_cast<std::ptrdiff_t>(cfg.cp_length));
        return out;
    }

    CVector demodulate(std::span<const cplx> samples, const OfdmConfig &cfg)
    {
        cfg.validate();
        if (samples.size() != cfg.symbol_length())
            throw std::invalid_argument("ofdm::demodulate: expected " + std::to_string(cfg.symbol_length()) +
                                        " samples, got " + std::to_string(samples.size()));
        return fft(samples.subspan(cfg.cp_length, cfg.num_subcarriers));
    }

    Equalized equalize(std::span<const cplx> received, std::span<const cplx> h_est)
    {
        if (received.size() != h_est.size())
            throw std::invalid_argument("ofdm::equalize: received and channel lengths differ");

        Equalized out;
        out.symbols.resize(received.size());
        out.erased.assign(received.size(), false);
        for (std::size_t k = 0; k < received.size(); ++k)
        {
            if (std::abs(h_est[k]) < equalizer_epsilon)
            {
                out.erased[k] = true;
                continue;
            }
            out.symbols[k] = received[k] / h_est[k];
        }
        return out;
    }

} // namespace scmlink::ofdm
