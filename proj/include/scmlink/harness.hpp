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

#include "scmlink/aoa.hpp"
#include "scmlink/codec.hpp"
#include "scmlink/fading.hpp"
#include "scmlink/ofdm.hpp"
#include "scmlink/scm_channel.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

// Monte Carlo BER-vs-SNR runner for the coded STBC MIMO-OFDM chain, scenario
// presets, and result emission.
namespace scmlink::harness
{
    enum class ChannelKind
    {
        AWGN,
        RayleighTDL,
        SCM
    };

    enum class Estimation
    {
        Perfect,
        HadamardPilot
    };

    std::string to_string(ChannelKind c);
    std::string to_string(Estimation e);

    // Everything needed to build SCM links: the three parameter sets plus the
    // number of tensor samples used for the AoA experiments.
    struct ScmSetup
    {
        scm::ScmConfig scm;
        scm::AntennaConfig antennas;
        scm::LinkConfig links;
        std::size_t num_time_samples = 10;
        bool flat = false; // force every path delay to zero
    };

    struct TdlSetup
    {
        std::size_t num_taps = 2;
        double max_delay_s = 5e-6;  // as listed for the presets
        double doppler_hz = 100.0;
    };

    struct ExperimentConfig
    {
        std::string name;
        ChannelKind channel = ChannelKind::RayleighTDL;
        std::size_t tx_antennas = 2;
        std::size_t rx_antennas = 2;
        ofdm::OfdmConfig ofdm;
        bool coded = true;
        codec::ConvCodeConfig code;
        codec::ModulationScheme modulation{codec::ModulationFamily::PSK, 4};
        bool interleaved = true; // frequency-domain block interleaver over one block
        bool soft_decision = false;
        Estimation estimation = Estimation::HadamardPilot;
        std::size_t pilot_length = 8;           // OFDM symbols per Hadamard pilot frame
        std::size_t max_burst_blocks = 1;       // data blocks between pilot frames, upper bound
        TdlSetup tdl;
        ScmSetup scm;
        double scm_doppler_hz = 100.0;          // sets the user speed for link simulations
        std::vector<double> snr_grid_db;
        std::size_t num_blocks = 20000;
        std::size_t symbols_per_block = 64;     // modulation symbols per OFDM symbol
        std::size_t block_ofdm_symbols = 16;    // OFDM symbols per codeword, even
        std::uint64_t seed = 1;
        bool fast = false;
        std::size_t fast_error_target = 500;
        bool strict_paper_params = false;
        std::size_t workers = 1;
        // SNR is Es/N0 per receive antenna per subcarrier when true, else the
        // total received Es/N0 summed over receive antennas.
        bool snr_per_receive_antenna = true;

        void validate() const;

        // Bits per block at each stage.
        std::size_t coded_bits_per_block() const;
        std::size_t info_bits_per_block() const;
        codec::InterleaverConfig interleaver() const;

        // Delay actually simulated for the Rayleigh channel: the listed maximum
        // in strict mode, else clamped to the cyclic prefix.
        double effective_max_delay_s() const;
        fading::TdlConfig tdl_config() const;

        // A block is one codeword spread over block_ofdm_symbols OFDM symbols.
        // Without interleaving its symbols fill each subcarrier in time order
        // before moving to the next subcarrier.
        double block_duration_s() const;

        // Data blocks between pilot frames: the coherence time 0.423/f_d in
        // blocks, capped at max_burst_blocks.
        std::size_t burst_blocks() const;
        double doppler_hz() const;
    };

    // Complex noise variance per subcarrier for a unit-power transmit signal.
    double noise_variance(const ExperimentConfig &cfg, double snr_db);

    // ----- key=value configuration ----------------------------------------------

    // Flattened view of every tunable field, keys dot-separated.
    std::map<std::string, std::string> to_key_values(const ExperimentConfig &cfg);

    // Applies one override; throws std::invalid_argument naming the key.
    void apply_override(ExperimentConfig &cfg, const std::string &key, const std::string &value);

    // Reads a flat key=value file ('#' comments, blank lines ignored).
    void apply_config_file(ExperimentConfig &cfg, const std::filesystem::path &path);

    // "A:B[:step]" -> ascending grid.
    std::vector<double> parse_snr_range(std::string_view spec);

    // ----- results ---------------------------------------------------------------

    struct BerPoint
    {
        double snr_db;
        std::uint64_t bit_errors;
        std::uint64_t total_bits;
        double ber;
    };

    struct BerCurve
    {
        std::vector<BerPoint> rows;
        std::map<std::string, std::string> metadata;
        std::vector<std::string> warnings;

        // log-linear interpolation of the SNR where BER crosses `target`;
        // nullopt if the curve never gets there
        std::optional<double> snr_at_ber(double target) const;
        const BerPoint *at_snr(double snr_db) const;
    };

    BerCurve run_ber_sweep(const ExperimentConfig &cfg);

    // ----- presets -----------------------------------------------------------------

    ExperimentConfig preset(std::string_view name);
    std::vector<std::string> preset_names();
    std::string preset_description(std::string_view name);

    // ----- emission ------------------------------------------------------------------

    enum class EmitFormat
    {
        Csv,
        Svg
    };

    // CSV: header snr_db,bit_errors,total_bits,ber and one row per point; the
    // metadata goes to <path>.json. SVG: log-scale BER plot.
    void emit(const BerCurve &curve, const std::filesystem::path &path, EmitFormat format);
    void emit_svg(std::span<const BerCurve> curves, std::span<const std::string> labels,
                  const std::filesystem::path &path, const std::string &title);

    std::string to_csv(const BerCurve &curve);
    BerCurve parse_csv(std::string_view text);

    // ----- AoA -------------------------------------------------------------------------

    struct AoaRow
    {
        int user;
        double aoa_estimate_deg;
        double configured_aoa_deg;
        double distance_m;
        double direction_deg;
    };

    struct AoaReport
    {
        std::vector<AoaRow> rows;
        aoa::AoaEstimate estimate;
        std::array<std::size_t, 5> tensor_dims{};
    };

    AoaReport aoa_report(std::string_view preset_name, std::uint64_t seed = 1);
    std::string to_csv(const AoaReport &report);

} // namespace scmlink::harness
