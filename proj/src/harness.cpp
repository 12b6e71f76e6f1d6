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

#include "scmlink/harness.hpp"

#include "scmlink/stbc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace scmlink::harness
{
    std::string to_string(ChannelKind c)
    {
        switch (c)
        {
        case ChannelKind::AWGN: return "awgn";
        case ChannelKind::RayleighTDL: return "rayleigh";
        case ChannelKind::SCM: return "scm";
        }
        return "?";
    }

    std::string to_string(Estimation e)
    {
        return e == Estimation::Perfect ? "perfect" : "hadamard";
    }

    // ----- ExperimentConfig ----------------------------------------------------

    void ExperimentConfig::validate() const
    {
        const auto fail = [](const std::string &what) { throw std::invalid_argument(what); };
        ofdm.validate();
        modulation.validate();
        if (coded)
            code.validate();
        if (tx_antennas != 1 && tx_antennas != 2)
            fail("tx_antennas must be 1 or 2 (Alamouti)");
        if (rx_antennas < 1)
            fail("rx_antennas must be at least 1");
        if (symbols_per_block != ofdm.num_subcarriers)
            fail("symbols_per_block must equal ofdm.num_subcarriers");
        if (block_ofdm_symbols < 2 || block_ofdm_symbols % 2 != 0)
            fail("block_ofdm_symbols must be a positive even number (Alamouti pairs)");
        if (snr_grid_db.empty())
            fail("snr_grid_db must not be empty");
        for (std::size_t i = 0; i < snr_grid_db.size(); ++i)
        {
            require_finite(snr_grid_db[i], "snr_grid_db");
            if (i > 0 && !(snr_grid_db[i] > snr_grid_db[i - 1]))
                fail("snr_grid_db must be strictly ascending");
        }
        if (num_blocks < 1)
            fail("num_blocks must be at least 1");
        if (max_burst_blocks < 1)
            fail("max_burst_blocks must be at least 1");
        if (workers < 1)
            fail("workers must be at least 1");
        if (fast && fast_error_target < 1)
            fail("fast_error_target must be at least 1");
        if (estimation == Estimation::HadamardPilot &&
            (!is_power_of_two(pilot_length) || pilot_length < tx_antennas))
            fail("pilot_length must be a power of two and at least tx_antennas");
        if (coded && info_bits_per_block() < 1)
            fail("block too short for the code tail");

        switch (channel)
        {
        case ChannelKind::AWGN: break;
        case ChannelKind::RayleighTDL:
            if (tdl.num_taps < 1)
                fail("tdl.num_taps must be at least 1");
            if (!(tdl.max_delay_s >= 0.0))
                fail("tdl.max_delay_s must be nonnegative");
            if (!(tdl.doppler_hz >= 0.0))
                fail("tdl.doppler_hz must be nonnegative");
            tdl_config().validate();
            break;
        case ChannelKind::SCM:
            scm.scm.validate();
            scm.links.validate();
            if (scm.links.num_links() < 1)
                fail("scm.links must hold at least one link");
            if (!(scm_doppler_hz >= 0.0))
                fail("scm.doppler_hz must be nonnegative");
            break;
        }
    }

    std::size_t ExperimentConfig::coded_bits_per_block() const
    {
        return block_ofdm_symbols * ofdm.num_subcarriers * static_cast<std::size_t>(modulation.bits_per_symbol());
    }

    std::size_t ExperimentConfig::info_bits_per_block() const
    {
        const std::size_t b = coded_bits_per_block();
        if (!coded)
            return b;
        const std::size_t tail = static_cast<std::size_t>(code.constraint_length - 1);
        return b / 2 > tail ? b / 2 - tail : 0;
    }

    codec::InterleaverConfig ExperimentConfig::interleaver() const
    {
        // One row per OFDM symbol (times bits per symbol), one column per
        // subcarrier: neighbouring coded bits land on neighbouring subcarriers
        // instead of consecutive OFDM symbols of one subcarrier.
        const auto bps = static_cast<std::size_t>(modulation.bits_per_symbol());
        codec::InterleaverConfig ic;
        ic.rows = block_ofdm_symbols * bps;
        ic.cols = ofdm.num_subcarriers;
        ic.domain = codec::InterleaverDomain::Frequency;
        return ic;
    }

    double ExperimentConfig::effective_max_delay_s() const
    {
        if (strict_paper_params)
            return tdl.max_delay_s;
        return std::min(tdl.max_delay_s, ofdm.max_delay_s());
    }

    fading::TdlConfig ExperimentConfig::tdl_config() const
    {
        return fading::uniform_profile(tdl.num_taps, effective_max_delay_s(), tdl.doppler_hz, ofdm.sample_time_s);
    }

    double ExperimentConfig::doppler_hz() const
    {
        switch (channel)
        {
        case ChannelKind::RayleighTDL: return tdl.doppler_hz;
        case ChannelKind::SCM: return scm_doppler_hz;
        default: return 0.0;
        }
    }

    double ExperimentConfig::block_duration_s() const
    {
        return static_cast<double>(block_ofdm_symbols) * ofdm.symbol_duration_s();
    }

    std::size_t ExperimentConfig::burst_blocks() const
    {
        const double fd = doppler_hz();
        if (!(fd > 0.0))
            return max_burst_blocks;
        const double coherence_s = 0.423 / fd;
        const auto fit = static_cast<std::size_t>(std::floor(coherence_s / block_duration_s()));
        return std::clamp<std::size_t>(fit, 1, max_burst_blocks);
    }

    double noise_variance(const ExperimentConfig &cfg, double snr_db)
    {
        const double scale = cfg.snr_per_receive_antenna ? 1.0 : static_cast<double>(cfg.rx_antennas);
        return scale / db_to_linear(snr_db);
    }

    // ----- BerCurve ------------------------------------------------------------

    std::optional<double> BerCurve::snr_at_ber(double target) const
    {
        for (std::size_t i = 0; i < rows.size(); ++i)
        {
            if (rows[i].total_bits == 0 || rows[i].ber > target)
                continue;
            if (i == 0)
                return rows[0].snr_db;
            const BerPoint &a = rows[i - 1];
            const BerPoint &b = rows[i];
            if (a.ber <= 0.0)
                return b.snr_db;
            // zero-error points interpolate against the one-error resolution
            const double lb = std::log10(b.ber > 0.0 ? b.ber : 0.5 / static_cast<double>(b.total_bits));
            const double la = std::log10(a.ber);
            const double lt = std::log10(target);
            if (la == lb)
                return b.snr_db;
            const double f = std::clamp((la - lt) / (la - lb), 0.0, 1.0);
            return a.snr_db + f * (b.snr_db - a.snr_db);
        }
        return std::nullopt;
    }

    const BerPoint *BerCurve::at_snr(double snr_db) const
    {
        for (const auto &r : rows)
            if (std::abs(r.snr_db - snr_db) < 1e-9)
                return &r;
        return nullptr;
    }

    // ----- sweep ---------------------------------------------------------------

    namespace
    {
        // Frequency-domain grid indexed [antenna][ofdm symbol][subcarrier].
        struct Grid
        {
            std::size_t ant = 0, syms = 0, n = 0;
            CVector v;

            Grid() = default;
            Grid(std::size_t a, std::size_t s, std::size_t k) : ant(a), syms(s), n(k), v(a * s * k) {}
            cplx &at(std::size_t a, std::size_t s, std::size_t k) { return v[(a * syms + s) * n + k]; }
            const cplx &at(std::size_t a, std::size_t s, std::size_t k) const { return v[(a * syms + s) * n + k]; }
        };

        // Channel per OFDM symbol, indexed [symbol][rx][tx][subcarrier].
        struct ChannelTrack
        {
            std::size_t syms = 0, nr = 0, nt = 0, n = 0;
            CVector v;

            ChannelTrack() = default;
            ChannelTrack(std::size_t s, std::size_t r, std::size_t t, std::size_t k)
                : syms(s), nr(r), nt(t), n(k), v(s * r * t * k) {}
            cplx &at(std::size_t s, std::size_t j, std::size_t i, std::size_t k)
            {
                return v[((s * nr + j) * nt + i) * n + k];
            }
            const cplx &at(std::size_t s, std::size_t j, std::size_t i, std::size_t k) const
            {
                return v[((s * nr + j) * nt + i) * n + k];
            }
        };

        struct BatchOutput
        {
            // [snr][block] bit errors; blocks excluded from counting hold -1
            std::vector<std::vector<std::int64_t>> errors;
        };

        class Sweep
        {
        public:
            explicit Sweep(const ExperimentConfig &cfg) : cfg_(cfg)
            {
                cfg_.validate();
                n_ = cfg_.ofdm.num_subcarriers;
                nt_ = cfg_.tx_antennas;
                nr_ = cfg_.rx_antennas;
                rows_ = cfg_.block_ofdm_symbols;
                burst_ = cfg_.burst_blocks();
                pilots_ = cfg_.estimation == Estimation::HadamardPilot ? cfg_.pilot_length : 0;
                num_batches_ = (cfg_.num_blocks + burst_ - 1) / burst_;
                tx_scale_ = 1.0 / std::sqrt(static_cast<double>(nt_));
                if (pilots_ > 0)
                    frame_ = stbc::make_pilot_frame(nt_, pilots_);
                ileave_ = cfg_.interleaver();

                if (cfg_.channel == ChannelKind::RayleighTDL)
                    setup_tdl();
                if (cfg_.channel == ChannelKind::SCM)
                    setup_scm();

                const double fd = cfg_.doppler_hz();
                if (fd > 0.0)
                {
                    const double span = static_cast<double>(pilots_) * cfg_.ofdm.symbol_duration_s() +
                                        static_cast<double>(burst_) * cfg_.block_duration_s();
                    const double tc = 0.423 / fd;
                    if (span > tc)
                        warnings_.push_back("pilot frame plus burst (" + fmt(span * 1e3) +
                                            " ms) exceeds the coherence time (" + fmt(tc * 1e3) +
                                            " ms); CSI is stale");
                    const double pair_drift = fd * 2.0 * cfg_.ofdm.symbol_duration_s();
                    if (nt_ == 2 && pair_drift > 0.01)
                        warnings_.push_back("Doppler times Alamouti pair duration is " + fmt(pair_drift) +
                                            " (> 0.01); the channel is not constant over a symbol pair");
                }
            }

            BerCurve run()
            {
                const std::size_t num_snr = cfg_.snr_grid_db.size();
                std::vector<std::uint64_t> errs(num_snr, 0), bits(num_snr, 0);
                std::vector<bool> done(num_snr, false);
                const std::uint64_t info_bits = cfg_.info_bits_per_block();

                const std::size_t round = std::max<std::size_t>(8, 4 * cfg_.workers);
                std::size_t next = 0;
                while (next < num_batches_ && !std::all_of(done.begin(), done.end(), [](bool d) { return d; }))
                {
                    const std::size_t count = std::min(round, num_batches_ - next);
                    std::vector<BatchOutput> outs(count);
                    const std::vector<bool> active = [&] {
                        std::vector<bool> a(num_snr);
                        for (std::size_t s = 0; s < num_snr; ++s)
                            a[s] = !done[s];
                        return a;
                    }();

                    std::atomic<std::size_t> cursor{0};
                    std::exception_ptr failure;
                    std::mutex failure_mutex;
                    const auto work = [&] {
                        for (;;)
                        {
                            const std::size_t i = cursor.fetch_add(1);
                            if (i >= count)
                                return;
                            try
                            {
                                outs[i] = run_batch(next + i, active);
                            }
                            catch (...)
                            {
                                std::lock_guard lock(failure_mutex);
                                if (!failure)
                                    failure = std::current_exception();
                            }
                        }
                    };
                    const std::size_t nthreads = std::min(cfg_.workers, count);
                    if (nthreads <= 1)
                        work();
                    else
                    {
                        std::vector<std::jthread> pool;
                        for (std::size_t t = 0; t < nthreads; ++t)
                            pool.emplace_back(work);
                    }
                    if (failure)
                        std::rethrow_exception(failure);

                    // aggregate in batch and block order so results do not depend
                    // on scheduling
                    for (std::size_t i = 0; i < count; ++i)
                        for (std::size_t s = 0; s < num_snr; ++s)
                        {
                            if (done[s])
                                continue;
                            for (std::int64_t e : outs[i].errors[s])
                            {
                                if (e < 0)
                                    continue;
                                errs[s] += static_cast<std::uint64_t>(e);
                                bits[s] += info_bits;
                                if (cfg_.fast && errs[s] >= cfg_.fast_error_target)
                                {
                                    done[s] = true;
                                    break;
                                }
                            }
                        }
                    next += count;
                }

                BerCurve curve;
                for (std::size_t s = 0; s < num_snr; ++s)
                {
                    const double ber = bits[s] ? static_cast<double>(errs[s]) / static_cast<double>(bits[s]) : 0.0;
                    curve.rows.push_back({cfg_.snr_grid_db[s], errs[s], bits[s], ber});
                }
                curve.warnings = warnings_;
                return curve;
            }

        private:
            static std::string fmt(double v)
            {
                std::ostringstream os;
                os.precision(4);
                os << v;
                return os.str();
            }

            void setup_tdl()
            {
                tdl_ = cfg_.tdl_config();
                delays_ = tdl_.delay_samples();
                if (ofdm::violates_cyclic_prefix(tdl_.max_delay_samples() + 1, cfg_.ofdm))
                    warnings_.push_back("channel delay spread (" + std::to_string(tdl_.max_delay_samples()) +
                                        " samples) exceeds the cyclic prefix (" +
                                        std::to_string(cfg_.ofdm.cp_length) + " samples); ISI is simulated");
                else if (cfg_.tdl.max_delay_s > cfg_.ofdm.max_delay_s())
                    warnings_.push_back("maximum delay " + fmt(cfg_.tdl.max_delay_s * 1e6) +
                                        " us clamped to the cyclic prefix (" +
                                        fmt(cfg_.ofdm.max_delay_s() * 1e6) + " us)");
                const std::uint64_t tdl_seed = mix64(cfg_.seed ^ 0x7464'6c00ULL);
                for (std::size_t j = 0; j < nr_; ++j)
                    for (std::size_t i = 0; i < nt_; ++i)
                        processes_.emplace_back(tdl_, tdl_seed, j * nt_ + i);
            }

            void setup_scm()
            {
                scm_ = cfg_.scm;
                scm_.scm.num_ap_elements = nr_;
                scm_.scm.num_user_elements = nt_;
                if (scm_.antennas.ap_element_positions.size() != nr_ ||
                    scm_.antennas.user_element_positions.size() != nt_)
                    scm_.antennas = scm::AntennaConfig::uniform(nr_, nt_);
                scm_.antennas.validate(scm_.scm);
                // the link simulation follows the first link; its speed sets f_d
                const double v = cfg_.scm_doppler_hz * scm_.scm.wavelength_m();
                for (auto &u : scm_.links.user_velocity_mps)
                    u = v;
            }

            std::size_t batch_blocks(std::size_t b) const
            {
                return std::min(burst_, cfg_.num_blocks - b * burst_);
            }

            // Transmit grid [tx][symbol][k]: pilot frame, then each block's
            // symbols in subcarrier-major order, consecutive pairs forming
            // Alamouti pairs on one subcarrier.
            Grid transmit(const std::vector<CVector> &block_symbols) const
            {
                const std::size_t syms = pilots_ + rows_ * block_symbols.size();
                Grid x(nt_, syms, n_);
                for (std::size_t t = 0; t < pilots_; ++t)
                    for (std::size_t i = 0; i < nt_; ++i)
                        for (std::size_t k = 0; k < n_; ++k)
                            x.at(i, t, k) = frame_.sequences[i][t] * tx_scale_;
                for (std::size_t m = 0; m < block_symbols.size(); ++m)
                {
                    const CVector &sym = block_symbols[m];
                    const std::size_t q0 = pilots_ + rows_ * m;
                    for (std::size_t k = 0; k < n_; ++k)
                        for (std::size_t p = 0; p < rows_; p += 2)
                        {
                            const cplx s1 = sym[k * rows_ + p], s2 = sym[k * rows_ + p + 1];
                            const std::size_t q = q0 + p;
                            if (nt_ == 1)
                            {
                                x.at(0, q, k) = s1;
                                x.at(0, q + 1, k) = s2;
                                continue;
                            }
                            const stbc::StbcBlock blk = stbc::alamouti_encode(s1, s2);
                            for (std::size_t slot = 0; slot < 2; ++slot)
                                for (std::size_t i = 0; i < 2; ++i)
                                    x.at(i, q + slot, k) = blk.tx_grid[slot][i] * tx_scale_;
                        }
                }
                return x;
            }

            // Noiseless received grid plus the true effective channel (transmit
            // power split included) for every OFDM symbol.
            void propagate(std::size_t b, const Grid &x, Grid &y, ChannelTrack &g) const
            {
                const std::size_t syms = x.syms;
                y = Grid(nr_, syms, n_);
                g = ChannelTrack(syms, nr_, nt_, n_);
                switch (cfg_.channel)
                {
                case ChannelKind::AWGN:
                    for (std::size_t q = 0; q < syms; ++q)
                        for (std::size_t j = 0; j < nr_; ++j)
                            for (std::size_t i = 0; i < nt_; ++i)
                                for (std::size_t k = 0; k < n_; ++k)
                                    g.at(q, j, i, k) = tx_scale_;
                    break;
                case ChannelKind::RayleighTDL: propagate_tdl(b, x, y, g); return;
                case ChannelKind::SCM: propagate_scm(b, syms, g); break;
                }
                // frequency-domain channel: Y = sum_i G X / tx_scale
                for (std::size_t q = 0; q < syms; ++q)
                    for (std::size_t j = 0; j < nr_; ++j)
                        for (std::size_t k = 0; k < n_; ++k)
                        {
                            cplx acc = 0.0;
                            for (std::size_t i = 0; i < nt_; ++i)
                                acc += g.at(q, j, i, k) * x.at(i, q, k);
                            y.at(j, q, k) = acc / tx_scale_;
                        }
            }

            void propagate_tdl(std::size_t b, const Grid &x, Grid &y, ChannelTrack &g) const
            {
                const ofdm::OfdmConfig &oc = cfg_.ofdm;
                const std::size_t sl = oc.symbol_length();
                const std::size_t syms = x.syms;
                const std::size_t samples = syms * sl;
                // batches sit back to back on one continuous fading timeline
                const std::uint64_t start = static_cast<std::uint64_t>(b) * (pilots_ + rows_ * burst_) * sl;

                std::vector<CVector> tx_time(nt_, CVector(samples));
                for (std::size_t i = 0; i < nt_; ++i)
                    for (std::size_t q = 0; q < syms; ++q)
                    {
                        const CVector s = ofdm::modulate(std::span(x.v).subspan((i * syms + q) * n_, n_), oc);
                        std::copy(s.begin(), s.end(), tx_time[i].begin() + static_cast<std::ptrdiff_t>(q * sl));
                    }

                CVector avg(tdl_.num_taps());
                for (std::size_t j = 0; j < nr_; ++j)
                {
                    CVector rx(samples, 0.0);
                    for (std::size_t i = 0; i < nt_; ++i)
                    {
                        const fading::FadingRealization real =
                            processes_[j * nt_ + i].window_interpolated(start, samples, sl);
                        const CVector out = fading::apply(tx_time[i], real, tdl_);
                        for (std::size_t s = 0; s < samples; ++s)
                            rx[s] += out[s];
                        // genie CSI: taps averaged over each FFT window
                        for (std::size_t q = 0; q < syms && pilots_ == 0; ++q)
                        {
                            for (std::size_t p = 0; p < avg.size(); ++p)
                            {
                                cplx acc = 0.0;
                                for (std::size_t s = q * sl + oc.cp_length; s < (q + 1) * sl; ++s)
                                    acc += real.taps(p, s);
                                avg[p] = acc / static_cast<double>(n_);
                            }
                            const CVector h = fading::tap_frequency_response(avg, delays_, n_);
                            for (std::size_t k = 0; k < n_; ++k)
                                g.at(q, j, i, k) = h[k] * tx_scale_;
                        }
                    }
                    for (std::size_t q = 0; q < syms; ++q)
                    {
                        const CVector f = ofdm::demodulate(std::span(rx).subspan(q * sl, sl), oc);
                        for (std::size_t k = 0; k < n_; ++k)
                            y.at(j, q, k) = f[k];
                    }
                }
            }

            void propagate_scm(std::size_t b, std::size_t syms, ChannelTrack &g) const
            {
                // a fresh drop for every batch, evaluated at the OFDM symbol times
                const std::uint64_t drop_seed = mix64(cfg_.seed ^ mix64(0x73636d00ULL + b));
                std::vector<scm::PathParams> drops = scm::draw_bulk_parameters(scm_.scm, scm_.links, drop_seed);
                scm::PathParams &p = drops.front();
                p.shadow_fading = 1.0;
                std::vector<double> delays = p.delays_s;
                const double cp = cfg_.ofdm.max_delay_s();
                for (auto &d : delays)
                    d = scm_.flat ? 0.0 : std::min(d, cp);

                const double tsym = cfg_.ofdm.symbol_duration_s();
                for (std::size_t q = 0; q < syms; ++q)
                {
                    const std::vector<CMatrix> paths = scm::channel_coefficients(
                        p, scm_.antennas, scm_.links, 0, scm_.scm, static_cast<double>(q) * tsym);
                    const fading::FrequencyResponse h = fading::scm_frequency_response(paths, delays, cfg_.ofdm);
                    for (std::size_t j = 0; j < nr_; ++j)
                        for (std::size_t i = 0; i < nt_; ++i)
                            for (std::size_t k = 0; k < n_; ++k)
                                g.at(q, j, i, k) = h.at(j, i, k) * tx_scale_;
                }
            }

            BatchOutput run_batch(std::size_t b, const std::vector<bool> &active) const
            {
                const std::size_t nb = batch_blocks(b);
                const std::size_t info_len = cfg_.info_bits_per_block();
                const auto bps = static_cast<std::size_t>(cfg_.modulation.bits_per_symbol());

                // source bits and symbols are common to every SNR point
                RngStream bit_rng(cfg_.seed, "bits", {b});
                std::vector<codec::Bits> info(nb, codec::Bits(info_len));
                std::vector<CVector> symbols(nb);
                for (std::size_t m = 0; m < nb; ++m)
                {
                    for (auto &v : info[m])
                        v = static_cast<std::uint8_t>(bit_rng.bit());
                    codec::Bits coded = cfg_.coded ? codec::conv_encode(info[m], cfg_.code) : info[m];
                    if (cfg_.interleaved)
                        coded = codec::interleave<std::uint8_t>(coded, ileave_);
                    symbols[m] = codec::map_bits(coded, cfg_.modulation);
                }

                const Grid x = transmit(symbols);
                Grid y;
                ChannelTrack g;
                propagate(b, x, y, g);

                BatchOutput out;
                out.errors.assign(cfg_.snr_grid_db.size(), {});
                for (std::size_t s = 0; s < cfg_.snr_grid_db.size(); ++s)
                {
                    if (!active[s])
                        continue;
                    const double var = noise_variance(cfg_, cfg_.snr_grid_db[s]);
                    RngStream noise_rng(cfg_.seed, "noise", {s, b});
                    Grid yn = y;
                    for (auto &v : yn.v)
                        v += noise_rng.complex_normal(var);

                    std::optional<stbc::CsiEstimate> est;
                    if (pilots_ > 0)
                    {
                        stbc::PilotObservation obs;
                        obs.num_rx = nr_;
                        obs.frame_len = pilots_;
                        obs.num_subcarriers = n_;
                        obs.samples.resize(nr_ * pilots_ * n_);
                        for (std::size_t j = 0; j < nr_; ++j)
                            for (std::size_t t = 0; t < pilots_; ++t)
                                for (std::size_t k = 0; k < n_; ++k)
                                    obs.at(j, t, k) = yn.at(j, t, k);
                        est = stbc::estimate_csi(obs, frame_);
                    }

                    auto &errs = out.errors[s];
                    errs.resize(nb);
                    for (std::size_t m = 0; m < nb; ++m)
                    {
                        const codec::Bits decoded = detect_block(yn, g, est, m, bps);
                        std::int64_t e = 0;
                        for (std::size_t t = 0; t < info_len; ++t)
                            e += decoded[t] != info[m][t];
                        // the very first block of a run is warm-up and not counted
                        errs[m] = (b == 0 && m == 0) ? -1 : e;
                    }
                }
                return out;
            }

            codec::Bits detect_block(const Grid &yn, const ChannelTrack &g, const std::optional<stbc::CsiEstimate> &est,
                                     std::size_t m, std::size_t bps) const
            {
                const std::size_t q0 = pilots_ + rows_ * m;
                CVector eq(rows_ * n_);
                std::vector<std::uint8_t> erased(rows_ * n_, 0);
                CVector r1(nr_), r2(nr_), h1(nr_), h2(nr_);
                for (std::size_t p = 0; p < rows_; p += 2)
                {
                    const std::size_t q = q0 + p;
                    const auto channel = [&](std::size_t j, std::size_t i, std::size_t k) -> cplx {
                        if (est)
                            return est->at(j, i, k);
                        return 0.5 * (g.at(q, j, i, k) + g.at(q + 1, j, i, k));
                    };
                    for (std::size_t k = 0; k < n_; ++k)
                    {
                        const std::size_t a = k * rows_ + p;
                        for (std::size_t j = 0; j < nr_; ++j)
                        {
                            r1[j] = yn.at(j, q, k);
                            r2[j] = yn.at(j, q + 1, k);
                            h1[j] = channel(j, 0, k);
                            if (nt_ == 2)
                                h2[j] = channel(j, 1, k);
                        }
                        if (nt_ == 2)
                        {
                            const stbc::Combined c = stbc::alamouti_combine(r1, r2, h1, h2);
                            if (c.gain < ofdm::equalizer_epsilon)
                                erased[a] = erased[a + 1] = 1;
                            else
                            {
                                eq[a] = c.s1 / c.gain;
                                eq[a + 1] = c.s2 / c.gain;
                            }
                            continue;
                        }
                        // maximum-ratio combining; plain zero forcing with one receiver
                        cplx a1 = 0.0, a2 = 0.0;
                        double gain = 0.0;
                        for (std::size_t j = 0; j < nr_; ++j)
                        {
                            a1 += std::conj(h1[j]) * r1[j];
                            a2 += std::conj(h1[j]) * r2[j];
                            gain += std::norm(h1[j]);
                        }
                        if (gain < ofdm::equalizer_epsilon * ofdm::equalizer_epsilon)
                            erased[a] = erased[a + 1] = 1;
                        else
                        {
                            eq[a] = a1 / gain;
                            eq[a + 1] = a2 / gain;
                        }
                    }
                }

                if (cfg_.coded && cfg_.soft_decision)
                {
                    std::vector<double> rel = codec::demap_soft(eq, cfg_.modulation);
                    for (std::size_t i = 0; i < rel.size(); ++i)
                        if (erased[i / bps])
                            rel[i] = 0.0;
                    if (cfg_.interleaved)
                        rel = codec::deinterleave<double>(rel, ileave_);
                    return codec::viterbi_decode_soft(rel, cfg_.code);
                }

                codec::Bits hard = codec::demap_hard(eq, cfg_.modulation);
                if (!cfg_.coded)
                    return cfg_.interleaved ? codec::deinterleave<std::uint8_t>(hard, ileave_) : hard;
                std::vector<std::uint8_t> mask(hard.size());
                for (std::size_t i = 0; i < mask.size(); ++i)
                    mask[i] = erased[i / bps];
                if (cfg_.interleaved)
                {
                    hard = codec::deinterleave<std::uint8_t>(hard, ileave_);
                    mask = codec::deinterleave<std::uint8_t>(mask, ileave_);
                }
                return codec::viterbi_decode(hard, cfg_.code, mask);
            }

            ExperimentConfig cfg_;
            std::size_t n_ = 0, nt_ = 0, nr_ = 0, rows_ = 2;
            std::size_t burst_ = 1, pilots_ = 0, num_batches_ = 0;
            double tx_scale_ = 1.0;
            stbc::PilotFrame frame_;
            codec::InterleaverConfig ileave_;
            fading::TdlConfig tdl_;
            std::vector<std::size_t> delays_;
            std::vector<fading::TdlProcess> processes_;
            ScmSetup scm_;
            std::vector<std::string> warnings_;
        };

        std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL)
        {
            for (unsigned char c : s)
            {
                h ^= c;
                h *= 0x100000001b3ULL;
            }
            return h;
        }

    } // namespace

    BerCurve run_ber_sweep(const ExperimentConfig &cfg)
    {
        Sweep sweep(cfg);
        BerCurve curve = sweep.run();

        for (const auto &[k, v] : to_key_values(cfg))
            curve.metadata["config." + k] = v;
        curve.metadata["seed"] = std::to_string(cfg.seed);
        curve.metadata["snr_definition"] =
            cfg.snr_per_receive_antenna
                ? "Es/N0 per receive antenna per subcarrier: noise variance = 1/snr_linear, unit received power per antenna"
                : "total received Es/N0: noise variance per antenna per subcarrier = rx_antennas/snr_linear";
        curve.metadata["channel_evolution"] =
            cfg.channel == ChannelKind::SCM
                ? "new SCM drop per pilot burst; coefficients evaluated at physical OFDM symbol times"
                : "Rayleigh taps evolve continuously across the run";
        curve.metadata["burst_blocks"] = std::to_string(cfg.burst_blocks());
        curve.metadata["info_bits_per_block"] = std::to_string(cfg.info_bits_per_block());
        curve.metadata["counting"] = cfg.fast ? "fast: stop at " + std::to_string(cfg.fast_error_target) + " errors"
                                              : "full: all blocks";
        std::string warn;
        for (const auto &w : curve.warnings)
            warn += (warn.empty() ? "" : "; ") + w;
        curve.metadata["warnings"] = warn;

        std::string canonical = to_csv(curve);
        for (const auto &[k, v] : curve.metadata)
            canonical += k + "=" + v + "\n";
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
        curve.metadata["content_hash"] = hash;
        return curve;
    }

} // namespace scmlink::harness
