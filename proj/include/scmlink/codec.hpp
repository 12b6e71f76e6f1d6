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
#include <cstdint>
#include <string>
#include <vector>

// Bit-level processing: rate-1/2 convolutional code with Viterbi decoding,
// block interleaving and Gray-labelled PSK/QAM mapping.
namespace scmlink::codec
{
    using Bits = std::vector<std::uint8_t>;

    // ----- convolutional code ------------------------------------------------

    struct ConvCodeConfig
    {
        int constraint_length = 3;
        std::array<unsigned, 2> generators{07, 05}; // octal, MSB taps the current input
        int traceback_depth = 15;

        void validate() const;
        int num_states() const { return 1 << (constraint_length - 1); }
    };

    // Encodes from the all-zero state and appends constraint_length - 1 zero tail
    // bits, so the output holds 2 * (bits.size() + constraint_length - 1) bits.
    Bits conv_encode(std::span<const std::uint8_t> bits, const ConvCodeConfig &cfg);

    // Hard-decision Viterbi with Hamming branch metric. Positions flagged in
    // `erased` (same length as `code_bits`, or empty) contribute no metric.
    // Returns the information bits, tail removed.
    Bits viterbi_decode(std::span<const std::uint8_t> code_bits, const ConvCodeConfig &cfg,
                        std::span<const std::uint8_t> erased = {});

    // Soft-decision Viterbi. Reliabilities are positive for a likely 0 and
    // negative for a likely 1; they are clipped to [-1, 1] and scored by
    // absolute difference against the expected +1/-1 code symbol.
    Bits viterbi_decode_soft(std::span<const double> reliabilities, const ConvCodeConfig &cfg);

    // ----- interleaver -------------------------------------------------------

    enum class InterleaverDomain
    {
        Frequency,
        Time
    };

    struct InterleaverConfig
    {
        std::size_t rows = 1;
        std::size_t cols = 1;
        InterleaverDomain domain = InterleaverDomain::Frequency;

        std::size_t length() const { return rows * cols; }
    };

    // Write row-wise, read column-wise.
    template <typename T>
    std::vector<T> interleave(std::span<const T> in, const InterleaverConfig &cfg)
    {
        if (in.size() != cfg.length())
            throw std::invalid_argument("interleave: length " + std::to_string(in.size()) + " != rows*cols " +
                                        std::to_string(cfg.length()));
        std::vector<T> out(in.size());
        for (std::size_t r = 0; r < cfg.rows; ++r)
            for (std::size_t c = 0; c < cfg.cols; ++c)
                out[c * cfg.rows + r] = in[r * cfg.cols + c];
        return out;
    }

    template <typename T>
    std::vector<T> deinterleave(std::span<const T> in, const InterleaverConfig &cfg)
    {
        if (in.size() != cfg.length())
            throw std::invalid_argument("deinterleave: length " + std::to_string(in.size()) + " != rows*cols " +
                                        std::to_string(cfg.length()));
        std::vector<T> out(in.size());
        for (std::size_t r = 0; r < cfg.rows; ++r)
            for (std::size_t c = 0; c < cfg.cols; ++c)
                out[r * cfg.cols + c] = in[c * cfg.rows + r];
        return out;
    }

    // ----- modulation --------------------------------------------------------

    enum class ModulationFamily
    {
        PSK,
        QAM
    };

    struct ModulationScheme
    {
        ModulationFamily family = ModulationFamily::PSK;
        int order = 4;

        void validate() const;
        int bits_per_symbol() const;
        std::string name() const; // e.g. "qpsk", "16qam"
    };

    ModulationScheme parse_modulation(std::string_view name);

    // Constellation indexed by bit label (first bit is the MSB of the index).
    // Gray labelling, unit average energy:
    //   BPSK            0 -> +1, 1 -> -1
    //   M-PSK           label gray(i) -> exp(j*2*pi*i/M)
    //   4-QAM           per axis 0 -> +1, 1 -> -1, scaled 1/sqrt(2)
    //   16-QAM          per axis 00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3, scaled 1/sqrt(10)
    //                   first two bits select I, last two Q
    const CVector &constellation(const ModulationScheme &scheme);

    CVector map_bits(std::span<const std::uint8_t> bits, const ModulationScheme &scheme);

    Bits demap_hard(std::span<const cplx> symbols, const ModulationScheme &scheme);

    // Per-bit min-distance difference: min|y-s|^2 over s with bit=1 minus the
    // same over bit=0. Positive favours 0.
    std::vector<double> demap_soft(std::span<const cplx> symbols, const ModulationScheme &scheme);

} // namespace scmlink::codec
