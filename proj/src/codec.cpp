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

#include "scmlink/codec.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <map>
#include <mutex>

namespace scmlink::codec
{
    // ----- convolutional code ------------------------------------------------

    void ConvCodeConfig::validate() const
    {
        if (constraint_length < 2 || constraint_length > 9)
            throw std::invalid_argument("code.constraint_length must be in [2, 9]");
        for (unsigned g : generators)
        {
            const int degree = static_cast<int>(std::bit_width(g)) - 1;
            if (degree != constraint_length - 1)
                throw std::invalid_argument("code.generators must have degree constraint_length - 1");
        }
        if (traceback_depth < constraint_length)
            throw std::invalid_argument("code.traceback_depth must be at least constraint_length");
    }

    namespace
    {
        struct Trellis
        {
            int num_states = 0;
            // outputs[state][input] = two code bits packed as (g0 << 1) | g1
            std::vector<std::array<unsigned, 2>> outputs;
            std::vector<std::array<int, 2>> next;
        };

        Trellis build_trellis(const ConvCodeConfig &cfg)
        {
            Trellis t;
            t.num_states = cfg.num_states();
            t.outputs.resize(static_cast<std::size_t>(t.num_states));
            t.next.resize(static_cast<std::size_t>(t.num_states));
            const int shift = cfg.constraint_length - 1;
            for (int s = 0; s < t.num_states; ++s)
                for (int u = 0; u < 2; ++u)
                {
                    const unsigned reg = (static_cast<unsigned>(u) << shift) | static_cast<unsigned>(s);
                    const unsigned o0 = std::popcount(reg & cfg.generators[0]) & 1U;
                    const unsigned o1 = std::popcount(reg & cfg.generators[1]) & 1U;
                    t.outputs[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)] = (o0 << 1) | o1;
                    t.next[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)] = static_cast<int>(reg >> 1);
                }
            return t;
        }

        // Generic add-compare-select over a per-step branch metric callback.
        // metric(step, packed_output) returns the cost of emitting that pair.
        template <typename Metric>
        Bits viterbi_core(std::size_t num_steps, const ConvCodeConfig &cfg, Metric metric)
        {
            cfg.validate();
            const Trellis trellis = build_trellis(cfg);
            const auto ns = static_cast<std::size_t>(trellis.num_states);
            const std::size_t tail = static_cast<std::size_t>(cfg.constraint_length - 1);
            if (num_steps < tail)
                throw std::invalid_argument("viterbi_decode: block shorter than the code tail");

            constexpr double inf = std::numeric_limits<double>::infinity();
            std::vector<double> cost(ns, inf), next_cost(ns);
            cost[0] = 0.0;

            // survivors[step][state] = (previous state, input bit)
            std::vector<std::vector<std::pair<int, std::uint8_t>>> survivors(
                num_steps, std::vector<std::pair<int, std::uint8_t>>(ns, {0, 0}));

            const auto traceback = [&](std::size_t from_step, int state, std::size_t depth) {
                // walks back `depth` steps from the end of from_step; returns the
                // input bit decided at step from_step + 1 - depth
                std::uint8_t bit = 0;
                for (std::size_t d = 0; d < depth; ++d)
                {
                    const auto &sv = survivors[from_step - d][static_cast<std::size_t>(state)];
                    bit = sv.second;
                    state = sv.first;
                }
                return bit;
            };

            const auto depth = static_cast<std::size_t>(cfg.traceback_depth);
            Bits decoded(num_steps, 0);

            for (std::size_t step = 0; step < num_steps; ++step)
            {
                std::fill(next_cost.begin(), next_cost.end(), inf);
                for (std::size_t s = 0; s < ns; ++s)
                {
                    if (cost[s] == inf)
                        continue;
                    for (int u = 0; u < 2; ++u)
                    {
                        const auto uu = static_cast<std::size_t>(u);
                        const auto nx = static_cast<std::size_t>(trellis.next[s][uu]);
                        const double c = cost[s] + metric(step, trellis.outputs[s][uu]);
                        if (c < next_cost[nx])
                        {
                            next_cost[nx] = c;
                            survivors[step][nx] = {static_cast<int>(s), static_cast<std::uint8_t>(u)};
                        }
                    }
                }
                std::swap(cost, next_cost);

                // sliding traceback: once `depth` steps are buffered, release the oldest decision
                if (step + 1 >= depth)
                {
                    const auto best = static_cast<int>(std::min_element(cost.begin(), cost.end()) - cost.begin());
                    decoded[step + 1 - depth] = traceback(step, best, depth);
                }
            }

            // terminated block: flush the remaining decisions from the zero state
            const std::size_t flushed_from = num_steps >= depth ? num_steps - depth + 1 : 0;
            int state = 0;
            for (std::size_t step = num_steps; step-- > flushed_from;)
            {
                const auto &sv = survivors[step][static_cast<std::size_t>(state)];
                decoded[step] = sv.second;
                state = sv.first;
            }

            decoded.resize(num_steps - tail);
            return decoded;
        }
    } // namespace

    Bits conv_encode(std::span<const std::uint8_t> bits, const ConvCodeConfig &cfg)
    {
        cfg.validate();
        const Trellis trellis = build_trellis(cfg);
        const std::size_t tail = static_cast<std::size_t>(cfg.constraint_length - 1);
        Bits out;
        out.reserve(2 * (bits.size() + tail));
        int state = 0;
        const auto push = [&](std::uint8_t u) {
            const auto s = static_cast<std::size_t>(state);
            const unsigned o = trellis.outputs[s][u];
            out.push_back(static_cast<std::uint8_t>(o >> 1));
            out.push_back(static_cast<std::uint8_t>(o & 1U));
            state = trellis.next[s][u];
        };
        for (std::uint8_t b : bits)
            push(b & 1U);
        for (std::size_t i = 0; i < tail; ++i)
            push(0);
        return out;
    }

    Bits viterbi_decode(std::span<const std::uint8_t> code_bits, const ConvCodeConfig &cfg,
                        std::span<const std::uint8_t> erased)
    {
        if (code_bits.size() % 2 != 0)
            throw std::invalid_argument("viterbi_decode: input length must be even");
        if (!erased.empty() && erased.size() != code_bits.size())
            throw std::invalid_argument("viterbi_decode: erasure mask length mismatch");
        return viterbi_core(code_bits.size() / 2, cfg, [&](std::size_t step, unsigned packed) {
            double m = 0.0;
            for (std::size_t i = 0; i < 2; ++i)
            {
                const std::size_t pos = 2 * step + i;
                if (!erased.empty() && erased[pos])
                    continue;
                const unsigned expected = (packed >> (1 - i)) & 1U;
                m += (code_bits[pos] & 1U) != expected ? 1.0 : 0.0;
            }
            return m;
        });
    }

    Bits viterbi_decode_soft(std::span<const double> reliabilities, const ConvCodeConfig &cfg)
    {
        if (reliabilities.size() % 2 != 0)
            throw std::invalid_argument("viterbi_decode_soft: input length must be even");
        return viterbi_core(reliabilities.size() / 2, cfg, [&](std::size_t step, unsigned packed) {
            double m = 0.0;
            for (std::size_t i = 0; i < 2; ++i)
            {
                const double r = std::clamp(reliabilities[2 * step + i], -1.0, 1.0);
                const double expected = ((packed >> (1 - i)) & 1U) ? -1.0 : 1.0;
                m += std::abs(r - expected);
            }
            return m;
        });
    }

    // ----- modulation --------------------------------------------------------

    void ModulationScheme::validate() const
    {
        if (order != 2 && order != 4 && order != 16)
            throw std::invalid_argument("modulation.order must be 2, 4 or 16");
    }

    int ModulationScheme::bits_per_symbol() const
    {
        validate();
        return std::countr_zero(static_cast<unsigned>(order));
    }

    std::string ModulationScheme::name() const
    {
        if (order == 2)
            return "bpsk";
        if (family == ModulationFamily::PSK)
            return order == 4 ? "qpsk" : "16psk";
        return std::to_string(order) + "qam";
    }

    ModulationScheme parse_modulation(std::string_view name)
    {
        if (name == "bpsk")
            return {ModulationFamily::PSK, 2};
        if (name == "qpsk" || name == "4psk")
            return {ModulationFamily::PSK, 4};
        if (name == "16psk")
            return {ModulationFamily::PSK, 16};
        if (name == "4qam")
            return {ModulationFamily::QAM, 4};
        if (name == "16qam")
            return {ModulationFamily::QAM, 16};
        throw std::invalid_argument("unknown modulation '" + std::string(name) +
                                    "' (expected bpsk, qpsk, 4qam, 16qam, 16psk)");
    }

    namespace
    {
        CVector build_constellation(const ModulationScheme &scheme)
        {
            const auto m = static_cast<std::size_t>(scheme.order);
            CVector points(m);
            if (scheme.order == 2)
            {
                points = {1.0, -1.0};
                return points;
            }
            if (scheme.family == ModulationFamily::PSK)
            {
                for (std::size_t i = 0; i < m; ++i)
                {
                    const std::size_t label = i ^ (i >> 1);
                    points[label] = std::polar(1.0, 2.0 * pi * static_cast<double>(i) / static_cast<double>(m));
                }
                return points;
            }
            if (scheme.order == 4)
            {
                const double a = 1.0 / std::sqrt(2.0);
                for (std::size_t label = 0; label < 4; ++label)
                    points[label] = {(label & 2U) ? -a : a, (label & 1U) ? -a : a};
                return points;
            }
            // 16-QAM, per-axis Gray 4-PAM indexed by the two-bit label
            constexpr std::array<double, 4> level{3.0, 1.0, -3.0, -1.0};
            const double scale = 1.0 / std::sqrt(10.0);
            for (std::size_t label = 0; label < 16; ++label)
                points[label] = {scale * level[label >> 2], scale * level[label & 3U]};
            return points;
        }
    } // namespace

    const CVector &constellation(const ModulationScheme &scheme)
    {
        scheme.validate();
        static std::mutex mutex;
        static std::map<std::pair<int, int>, CVector> cache;
        const std::lock_guard lock(mutex);
        const auto key = std::make_pair(static_cast<int>(scheme.family), scheme.order);
        auto it = cache.find(key);
        if (it == cache.end())
            it = cache.emplace(key, build_constellation(scheme)).first;
        return it->second;
    }

    CVector map_bits(std::span<const std::uint8_t> bits, const ModulationScheme &scheme)
    {
        const auto bps = static_cast<std::size_t>(scheme.bits_per_symbol());
        if (bits.size() % bps != 0)
            throw std::invalid_argument("map_bits: bit count " + std::to_string(bits.size()) +
                                        " not divisible by bits per symbol " + std::to_string(bps));
        const CVector &points = constellation(scheme);
        CVector out(bits.size() / bps);
        for (std::size_t s = 0; s < out.size(); ++s)
        {
            std::size_t label = 0;
            for (std::size_t b = 0; b < bps; ++b)
                label = (label << 1) | (bits[s * bps + b] & 1U);
            out[s] = points[label];
        }
        return out;
    }

    Bits demap_hard(std::span<const cplx> symbols, const ModulationScheme &scheme)
    {
        const auto bps = static_cast<std::size_t>(scheme.bits_per_symbol());
        const CVector &points = constellation(scheme);
        Bits out(symbols.size() * bps);
        for (std::size_t s = 0; s < symbols.size(); ++s)
        {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t label = 0; label < points.size(); ++label)
            {
                const double d = std::norm(symbols[s] - points[label]);
                if (d < best_d)
                {
                    best_d = d;
                    best = label;
                }
            }
            for (std::size_t b = 0; b < bps; ++b)
                out[s * bps + b] = static_cast<std::uint8_t>((best >> (bps - 1 - b)) & 1U);
        }
        return out;
    }

    std::vector<double> demap_soft(std::span<const cplx> symbols, const ModulationScheme &scheme)
    {
        const auto bps = static_cast<std::size_t>(scheme.bits_per_symbol());
        const CVector &points = constellation(scheme);
        constexpr double inf = std::numeric_limits<double>::infinity();
        std::vector<double> out(symbols.size() * bps);
        for (std::size_t s = 0; s < symbols.size(); ++s)
        {
            for (std::size_t b = 0; b < bps; ++b)
            {
                double d0 = inf, d1 = inf;
                for (std::size_t label = 0; label < points.size(); ++label)
                {
                    const double d = std::norm(symbols[s] - points[label]);
                    if ((label >> (bps - 1 - b)) & 1U)
                        d1 = std::min(d1, d);
                    else
                        d0 = std::min(d0, d);
                }
                out[s * bps + b] = d1 - d0;
            }
        }
        return out;
    }

} // namespace scmlink::codec
