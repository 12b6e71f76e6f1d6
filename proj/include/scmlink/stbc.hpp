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

#include <array>
#include <vector>

namespace scmlink::stbc
{
    // Alamouti block: row = time slot, column = transmit antenna.
    struct StbcBlock
    {
        std::array<std::array<cplx, 2>, 2> tx_grid{};
    };

    StbcBlock alamouti_encode(cplx s1, cplx s2);

    struct Combined
    {
        cplx s1;
        cplx s2;
        double gain; // sum of |h|^2 over all rx/tx pairs
    };

    // r: [2 slots x Nr], h: [Nr x 2]. Returns the matched-filter outputs
    // s_hat_i = gain * s_i + noise terms.
    Combined alamouti_combine(const CMatrix &r, const CMatrix &h);

    // Same combiner without the matrix wrappers; r_slot1/r_slot2/h_tx1/h_tx2
    // each have one entry per receive antenna.
    Combined alamouti_combine(std::span<const cplx> r_slot1, std::span<const cplx> r_slot2,
                              std::span<const cplx> h_tx1, std::span<const cplx> h_tx2);

    // ----- Hadamard pilots ---------------------------------------------------

    struct PilotFrame
    {
        // sequences[i][t] in {+1, -1}: pilot of transmit antenna i at slot t
        std::vector<std::vector<double>> sequences;

        std::size_t num_tx() const { return sequences.size(); }
        std::size_t length() const { return sequences.empty() ? 0 : sequences.front().size(); }
    };

    // Rows 0..num_tx-1 of the Sylvester-Hadamard matrix of order frame_len.
    PilotFrame make_pilot_frame(std::size_t num_tx, std::size_t frame_len);

    // Channel estimate indexed [rx][tx][subcarrier].
    struct CsiEstimate
    {
        std::size_t num_rx = 0;
        std::size_t num_tx = 0;
        std::size_t num_subcarriers = 0;
        CVector h;       // flattened [rx][tx][k]
        std::vector<double> quality; // residual power per (rx, k) after removing the fitted pilots

        cplx &at(std::size_t rx, std::size_t tx, std::size_t k) { return h[(rx * num_tx + tx) * num_subcarriers + k]; }
        const cplx &at(std::size_t rx, std::size_t tx, std::size_t k) const
        {
            return h[(rx * num_tx + tx) * num_subcarriers + k];
        }
    };

    // Received pilots indexed [rx][slot][subcarrier] (flattened, slot-major per rx).
    struct PilotObservation
    {
        std::size_t num_rx = 0;
        std::size_t frame_len = 0;
        std::size_t num_subcarriers = 0;
        CVector samples;

        cplx &at(std::size_t rx, std::size_t t, std::size_t k) { return samples[(rx * frame_len + t) * num_subcarriers + k]; }
        const cplx &at(std::size_t rx, std::size_t t, std::size_t k) const
        {
            return samples[(rx * frame_len + t) * num_subcarriers + k];
        }
    };

    // h_hat[j][i][k] = (1/frame_len) * sum_t r_j[t, k] * pilot_i[t]
    CsiEstimate estimate_csi(const PilotObservation &received, const PilotFrame &pilots);

    // ----- channel row selection ---------------------------------------------

    struct RowSelection
    {
        CMatrix reduced;
        std::vector<std::size_t> kept; // indices into the input rows, ascending
    };

    inline constexpr double default_corr_threshold = 0.9;
    inline constexpr double default_power_tol_db = 1.0;

    // Prunes channel-matrix rows: duplicates collapse to one row, and of any
    // pair whose normalized correlation exceeds corr_threshold the lower-power
    // row is dropped. Rows differing only in power are never dropped for that
    // reason alone, whatever power_tol_db says.
    RowSelection select_channel_rows(const CMatrix &h, double power_tol_db = default_power_tol_db,
                                     double corr_threshold = default_corr_threshold);

} // namespace scmlink::stbc
