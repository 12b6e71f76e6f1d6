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

#include <algorithm>
#include <bit>
#include <numeric>

namespace scmlink::stbc
{
    StbcBlock alamouti_encode(cplx s1, cplx s2)
    {
        StbcBlock b;
        b.tx_grid[0] = {s1, s2};
        b.tx_grid[1] = {-std::conj(s2), std::conj(s1)};
        return b;
    }

    Combined alamouti_combine(std::span<const cplx> r_slot1, std::span<const cplx> r_slot2,
                              std::span<const cplx> h_tx1, std::span<const cplx> h_tx2)
    {
        const std::size_t nr = r_slot1.size();
        if (nr == 0 || r_slot2.size() != nr || h_tx1.size() != nr || h_tx2.size() != nr)
            throw std::invalid_argument("alamouti_combine: receive antenna counts differ");

        Combined out{0.0, 0.0, 0.0};
        for (std::size_t j = 0; j < nr; ++j)
        {
            const cplx h1 = h_tx1[j], h2 = h_tx2[j];
            const cplx r1 = r_slot1[j], r2c = std::conj(r_slot2[j]);
            out.s1 += std::conj(h1) * r1 + h2 * r2c;
            out.s2 += std::conj(h2) * r1 - h1 * r2c;
            out.gain += std::norm(h1) + std::norm(h2);
        }
        return out;
    }

    Combined alamouti_combine(const CMatrix &r, const CMatrix &h)
    {
        if (r.rows() != 2 || h.cols() != 2 || h.rows() != r.cols())
            throw std::invalid_argument("alamouti_combine: expected r [2 x Nr] and h [Nr x 2]");
        const std::size_t nr = h.rows();
        CVector h1(nr), h2(nr);
        for (std::size_t j = 0; j < nr; ++j)
        {
            h1[j] = h(j, 0);
            h2[j] = h(j, 1);
        }
        return alamouti_combine(r.row(0), r.row(1), h1, h2);
    }

    // ----- Hadamard pilots ---------------------------------------------------

    PilotFrame make_pilot_frame(std::size_t num_tx, std::size_t frame_len)
    {
        if (num_tx == 0)
            throw std::invalid_argument("make_pilot_frame: num_tx must be positive");
        if (!is_power_of_two(frame_len))
            throw std::invalid_argument("make_pilot_frame: frame_len must be a power of two");
        if (frame_len < num_tx)
            throw std::invalid_argument("make_pilot_frame: frame_len must be at least num_tx");

        // Sylvester construction: H[i][t] = (-1)^popcount(i & t)
        PilotFrame frame;
        frame.sequences.assign(num_tx, std::vector<double>(frame_len));
        for (std::size_t i = 0; i < num_tx; ++i)
            for (std::size_t t = 0; t < frame_len; ++t)
                frame.sequences[i][t] = (std::popcount(i & t) & 1U) ? -1.0 : 1.0;
        return frame;
    }

    CsiEstimate estimate_csi(const PilotObservation &received, const PilotFrame &pilots)
    {
        const std::size_t len = pilots.length();
        if (received.frame_len != len)
            throw std::invalid_argument("estimate_csi: observation length differs from pilot frame length");
        if (received.samples.size() != received.num_rx * len * received.num_subcarriers)
            throw std::invalid_argument("estimate_csi: observation buffer has the wrong size");

        CsiEstimate est;
        est.num_rx = received.num_rx;
        est.num_tx = pilots.num_tx();
        est.num_subcarriers = received.num_subcarriers;
        est.h.assign(est.num_rx * est.num_tx * est.num_subcarriers, 0.0);
        est.quality.assign(est.num_rx * est.num_subcarriers, 0.0);

        const double inv_len = 1.0 / static_cast<double>(len);
        for (std::size_t j = 0; j < est.num_rx; ++j)
        {
            for (std::size_t i = 0; i < est.num_tx; ++i)
            {
                const auto &seq = pilots.sequences[i];
                for (std::size_t t = 0; t < len; ++t)
                {
                    const double p = seq[t];
                    for (std::size_t k = 0; k < est.num_subcarriers; ++k)
                        est.at(j, i, k) += received.at(j, t, k) * p;
                }
                for (std::size_t k = 0; k < est.num_subcarriers; ++k)
                    est.at(j, i, k) *= inv_len;
            }
            for (std::size_t k = 0; k < est.num_subcarriers; ++k)
            {
                double resid = 0.0;
                for (std::size_t t = 0; t < len; ++t)
                {
                    cplx fit = 0.0;
                    for (std::size_t i = 0; i < est.num_tx; ++i)
                        fit += est.at(j, i, k) * pilots.sequences[i][t];
                    resid += std::norm(received.at(j, t, k) - fit);
                }
                est.quality[j * est.num_subcarriers + k] = resid * inv_len;
            }
        }
        return est;
    }

    // ----- channel row selection ---------------------------------------------

    RowSelection select_channel_rows(const CMatrix &h, double power_tol_db, double corr_threshold)
    {
        if (h.empty())
            throw std::invalid_argument("select_channel_rows: empty channel matrix");

        const std::size_t n = h.rows();
        std::vector<double> power(n, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (const auto &v : h.row(r))
                power[r] += std::norm(v);

        const auto correlation = [&](std::size_t a, std::size_t b) {
            if (power[a] == 0.0 || power[b] == 0.0)
                return 0.0;
            cplx dot = 0.0;
            for (std::size_t c = 0; c < h.cols(); ++c)
                dot += h(a, c) * std::conj(h(b, c));
            return std::abs(dot) / std::sqrt(power[a] * power[b]);
        };

        // Of a correlated pair, drop the lower-power row; equal powers drop the
        // later one. Power alone never removes a row, so power_tol_db only
        // documents that rule and does not change the outcome.
        (void)power_tol_db;
        const auto loser = [&](std::size_t a, std::size_t b) {
            if (power[a] == power[b])
                return std::max(a, b);
            return power[a] < power[b] ? a : b;
        };

        std::vector<bool> alive(n, true);
        for (;;)
        {
            double best = corr_threshold;
            std::size_t ba = n, bb = n;
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = a + 1; b < n; ++b)
                {
                    if (!alive[a] || !alive[b])
                        continue;
                    const double c = correlation(a, b);
                    if (c > best)
                    {
                        best = c;
                        ba = a;
                        bb = b;
                    }
                }
            if (ba == n)
                break;
            alive[loser(ba, bb)] = false;
        }

        RowSelection out;
        for (std::size_t r = 0; r < n; ++r)
            if (alive[r])
                out.kept.push_back(r);
        out.reduced = CMatrix(out.kept.size(), h.cols());
        for (std::size_t i = 0; i < out.kept.size(); ++i)
            for (std::size_t c = 0; c < h.cols(); ++c)
                out.reduced(i, c) = h(out.kept[i], c);
        return out;
    }

} // namespace scmlink::stbc
