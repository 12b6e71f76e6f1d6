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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

// Geometry-based spatial channel model for multi-user uplinks between a
// linear AP array and linear user arrays. Each link carries K paths, each
// path 20 sub-paths at fixed angular offsets around a drawn mean direction.
namespace scmlink::scm
{
    enum class Scenario
    {
        UrbanMacro,
        UrbanMicro
    };

    enum class ScmOption
    {
        None,
        LOS
    };

    enum class ArraySide
    {
        AP,
        User
    };

    std::string to_string(Scenario s);
    std::string to_string(ScmOption o);
    Scenario parse_scenario(std::string_view s);
    ScmOption parse_option(std::string_view s);

    inline constexpr std::size_t table_subpaths = 20;

    // Per-path statistics. Unset fields resolve from scenario/option, see
    // resolved_model().
    struct ModelOverrides
    {
        std::optional<double> delay_spread_s;
        std::optional<double> shadow_sigma_db;
        std::optional<double> path_loss_intercept_db;
        std::optional<double> path_loss_slope_db; // per decade of distance
        std::optional<double> los_k_factor_db;
    };

    struct ScmConfig
    {
        Scenario scenario = Scenario::UrbanMacro;
        std::size_t num_ap_elements = 8;
        std::size_t num_user_elements = 2;
        std::size_t num_paths = 6;
        std::size_t num_subpaths = table_subpaths;
        double sample_density = 3.0;        // samples per half wavelength of travel
        double center_frequency_hz = 2.0e9;
        double ap_mean_angle_spread_deg = 80.0; // macro only; carried as metadata
        ScmOption option = ScmOption::None;
        ModelOverrides model;

        void validate() const;
        double wavelength_m() const { return speed_of_light / center_frequency_hz; }
    };

    struct ResolvedModel
    {
        double delay_spread_s;
        double shadow_sigma_db;
        double path_loss_intercept_db;
        double path_loss_slope_db;
        double los_k_factor_db;
        double ap_path_angle_spread_deg;
        double user_path_angle_spread_deg;
        double path_power_sigma_db;
    };

    ResolvedModel resolved_model(const ScmConfig &scm);

    struct AntennaConfig
    {
        // Gain pattern samples over an azimuth grid in radians; an empty
        // pattern means unit gain in every direction.
        std::vector<double> ap_gain_pattern;
        std::vector<double> ap_azimuth_grid;
        std::vector<double> ap_element_positions; // wavelengths
        std::vector<double> user_gain_pattern;
        std::vector<double> user_azimuth_grid;
        std::vector<double> user_element_positions;

        // Uniform linear arrays, unit gain.
        static AntennaConfig uniform(std::size_t ap_elements, std::size_t user_elements, double spacing = 0.5);

        void validate(const ScmConfig &scm) const;
    };

    // Linear interpolation of a gain pattern; angle in degrees.
    double pattern_gain(std::span<const double> gains, std::span<const double> grid_rad, double angle_deg);

    // One entry per link n.
    struct LinkConfig
    {
        std::vector<double> ap_user_distance_m;
        std::vector<double> theta_ap_deg;
        std::vector<double> theta_user_deg;
        std::vector<double> user_velocity_mps;
        std::vector<double> user_direction_deg;
        std::vector<double> user_height_m;
        std::vector<double> ap_height_m;
        std::vector<int> user_ids;

        std::size_t num_links() const { return ap_user_distance_m.size(); }
        void validate() const;
    };

    struct SubPath
    {
        double aod_deg;   // AP side
        double aoa_deg;   // user side
        double phase_rad; // [0, 2*pi)
    };

    struct PathParams
    {
        std::vector<double> powers;   // linear, sum to 1
        std::vector<double> delays_s; // ascending, first is 0
        std::vector<double> mean_aod_deg;
        std::vector<double> mean_aoa_deg;
        std::vector<std::vector<SubPath>> subpaths; // [path][subpath]
        double shadow_fading = 1.0;   // linear
        double path_loss_db = 0.0;
        double los_k_factor = 0.0;    // linear; 0 when the LOS option is off
        double los_phase_rad = 0.0;

        std::size_t num_paths() const { return powers.size(); }
    };

    // The 20 sub-path offsets in degrees as +/- pairs in table order. The user
    // side uses the 35 degree column for both scenarios.
    std::array<double, table_subpaths> subpath_offsets(Scenario scenario, ArraySide side);

    // Wraps into (-180, 180]; -180 maps to +180.
    double wrap_degrees(double deg);

    double path_loss_db(double distance_m, const ScmConfig &scm);

    // One PathParams per link; deterministic given seed. Link n draws from its
    // own stream so links are independent of evaluation order.
    std::vector<PathParams> draw_bulk_parameters(const ScmConfig &scm, const LinkConfig &links, std::uint64_t seed);

    // Coefficient matrices [ap element x user element], one per path, for link
    // `link` at time t (seconds).
    std::vector<CMatrix> channel_coefficients(const PathParams &params, const AntennaConfig &ant,
                                              const LinkConfig &links, std::size_t link, const ScmConfig &scm,
                                              double t);

    // Direct-path phasor for element pair (l, m) of link `link` at time t,
    // before power scaling. Exposed for tests of the LOS construction.
    cplx los_component(const PathParams &params, const AntennaConfig &ant, const LinkConfig &links,
                       std::size_t link, const ScmConfig &scm, std::size_t l, std::size_t m, double t);

    // 5-D tensor [L][M][N][K][S], row-major, plus per-link metadata.
    struct ChannelTensor
    {
        std::array<std::size_t, 5> dims{}; // L, M, N, K, S
        CVector coefficients;
        double time_step_s = 0.0;
        std::vector<PathParams> links;

        std::size_t index(std::size_t l, std::size_t m, std::size_t n, std::size_t k, std::size_t s) const
        {
            return (((l * dims[1] + m) * dims[2] + n) * dims[3] + k) * dims[4] + s;
        }
        cplx &at(std::size_t l, std::size_t m, std::size_t n, std::size_t k, std::size_t s)
        {
            return coefficients[index(l, m, n, k, s)];
        }
        const cplx &at(std::size_t l, std::size_t m, std::size_t n, std::size_t k, std::size_t s) const
        {
            return coefficients[index(l, m, n, k, s)];
        }

        std::vector<std::vector<double>> path_delays_s() const;
    };

    // lambda / (2 * sample_density * v_max); 1 ms when every user is static.
    double time_step_s(const ScmConfig &scm, const LinkConfig &links);

    ChannelTensor generate(const ScmConfig &scm, const AntennaConfig &ant, const LinkConfig &links,
                           std::size_t num_time_samples, std::uint64_t seed);

    // ----- export ------------------------------------------------------------
    //
    // Binary layout, little-endian:
    //   bytes 0..3    magic "SCM5"
    //   5 x u32       L, M, N, K, S
    //   f64           time step in seconds
    //   then L*M*N*K*S (re, im) f64 pairs, row-major over [l][m][n][k][s]
    // The sidecar JSON holds the per-link PathParams.

    void write_tensor(const ChannelTensor &tensor, const std::filesystem::path &path);
    ChannelTensor read_tensor(const std::filesystem::path &path); // coefficients and dims only
    void write_metadata_json(const ChannelTensor &tensor, const std::filesystem::path &path);

} // namespace scmlink::scm
