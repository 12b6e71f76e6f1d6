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

#include "scmlink/scm_channel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>

namespace scmlink::scm
{
    std::string to_string(Scenario s)
    {
        return s == Scenario::UrbanMacro ? "urban_macro" : "urban_micro";
    }

    std::string to_string(ScmOption o)
    {
        return o == ScmOption::LOS ? "los" : "none";
    }

    Scenario parse_scenario(std::string_view s)
    {
        if (s == "urban_macro" || s == "macro")
            return Scenario::UrbanMacro;
        if (s == "urban_micro" || s == "micro")
            return Scenario::UrbanMicro;
        throw std::invalid_argument("scm.scenario: unknown scenario '" + std::string(s) + "'");
    }

    ScmOption parse_option(std::string_view s)
    {
        if (s == "none")
            return ScmOption::None;
        if (s == "los" || s == "LOS")
            return ScmOption::LOS;
        throw std::invalid_argument("scm.option: unknown option '" + std::string(s) + "'");
    }

    // ----- configuration -----------------------------------------------------

    void ScmConfig::validate() const
    {
        if (num_ap_elements < 1)
            throw std::invalid_argument("scm.num_ap_elements must be positive");
        if (num_user_elements < 1)
            throw std::invalid_argument("scm.num_user_elements must be positive");
        if (num_paths < 1)
            throw std::invalid_argument("scm.num_paths must be positive");
        if (num_subpaths != table_subpaths)
            throw std::invalid_argument("scm.num_subpaths must be 20 (the offset tables define 20 sub-paths)");
        if (!(sample_density >= 1.0))
            throw std::invalid_argument("scm.sample_density must be at least 1");
        if (!(center_frequency_hz > 0.0))
            throw std::invalid_argument("scm.center_frequency_hz must be positive");
        if (scenario == Scenario::UrbanMacro && ap_mean_angle_spread_deg != 80.0 && ap_mean_angle_spread_deg != 150.0)
            throw std::invalid_argument("scm.ap_mean_angle_spread_deg must be 80 or 150 for urban macro");
        if (model.delay_spread_s && !(*model.delay_spread_s > 0.0))
            throw std::invalid_argument("scm.model.delay_spread_s must be positive");
        if (model.shadow_sigma_db && !(*model.shadow_sigma_db >= 0.0))
            throw std::invalid_argument("scm.model.shadow_sigma_db must be nonnegative");
    }

    ResolvedModel resolved_model(const ScmConfig &scm)
    {
        const bool macro = scm.scenario == Scenario::UrbanMacro;
        const bool los = scm.option == ScmOption::LOS;
        ResolvedModel m{};
        m.delay_spread_s = scm.model.delay_spread_s.value_or(macro ? 0.65e-6 : 0.25e-6);
        m.shadow_sigma_db = scm.model.shadow_sigma_db.value_or(los ? 4.0 : (macro ? 8.0 : 10.0));
        if (los)
        {
            // exponent 2.6 with a free-space style frequency term
            m.path_loss_intercept_db = -35.4 + 20.0 * std::log10(scm.center_frequency_hz / 1e6);
            m.path_loss_slope_db = 26.0;
        }
        else if (macro)
        {
            m.path_loss_intercept_db = 34.5;
            m.path_loss_slope_db = 35.0;
        }
        else
        {
            m.path_loss_intercept_db = 34.53;
            m.path_loss_slope_db = 38.0;
        }
        m.path_loss_intercept_db = scm.model.path_loss_intercept_db.value_or(m.path_loss_intercept_db);
        m.path_loss_slope_db = scm.model.path_loss_slope_db.value_or(m.path_loss_slope_db);
        m.los_k_factor_db = scm.model.los_k_factor_db.value_or(6.0);
        m.ap_path_angle_spread_deg = macro ? 2.0 : 5.0;
        m.user_path_angle_spread_deg = 35.0;
        m.path_power_sigma_db = 3.0;
        return m;
    }

    AntennaConfig AntennaConfig::uniform(std::size_t ap_elements, std::size_t user_elements, double spacing)
    {
        AntennaConfig a;
        for (std::size_t i = 0; i < ap_elements; ++i)
            a.ap_element_positions.push_back(spacing * static_cast<double>(i));
        for (std::size_t i = 0; i < user_elements; ++i)
            a.user_element_positions.push_back(spacing * static_cast<double>(i));
        return a;
    }

    namespace
    {
        void validate_side(std::string_view side, std::span<const double> gains, std::span<const double> grid,
                           std::span<const double> positions, std::size_t expected)
        {
            const std::string s(side);
            if (positions.size() != expected)
                throw std::invalid_argument("antenna." + s + "_element_positions: expected " +
                                            std::to_string(expected) + " entries, got " +
                                            std::to_string(positions.size()));
            for (std::size_t i = 1; i < positions.size(); ++i)
                if (!(positions[i] > positions[i - 1]))
                    throw std::invalid_argument("antenna." + s + "_element_positions must be strictly increasing");
            if (gains.size() != grid.size())
                throw std::invalid_argument("antenna." + s + "_gain_pattern and azimuth grid lengths differ");
            for (double g : gains)
                if (!(g >= 0.0))
                    throw std::invalid_argument("antenna." + s + "_gain_pattern values must be nonnegative");
            for (std::size_t i = 1; i < grid.size(); ++i)
                if (!(grid[i] > grid[i - 1]))
                    throw std::invalid_argument("antenna." + s + "_azimuth_grid must be strictly increasing");
        }
    } // namespace

    void AntennaConfig::validate(const ScmConfig &scm) const
    {
        validate_side("ap", ap_gain_pattern, ap_azimuth_grid, ap_element_positions, scm.num_ap_elements);
        validate_side("user", user_gain_pattern, user_azimuth_grid, user_element_positions, scm.num_user_elements);
    }

    double pattern_gain(std::span<const double> gains, std::span<const double> grid_rad, double angle_deg)
    {
        if (gains.empty())
            return 1.0;
        if (gains.size() == 1)
            return gains[0];
        const double a = wrap_degrees(angle_deg) * pi / 180.0;
        if (a <= grid_rad.front())
            return gains.front();
        if (a >= grid_rad.back())
            return gains.back();
        const auto it = std::upper_bound(grid_rad.begin(), grid_rad.end(), a);
        const auto hi = static_cast<std::size_t>(it - grid_rad.begin());
        const std::size_t lo = hi - 1;
        const double w = (a - grid_rad[lo]) / (grid_rad[hi] - grid_rad[lo]);
        return (1.0 - w) * gains[lo] + w * gains[hi];
    }

    void LinkConfig::validate() const
    {
        const std::size_t n = ap_user_distance_m.size();
        if (n == 0)
            throw std::invalid_argument("links.ap_user_distance_m must hold at least one link");
        const auto check_len = [n](std::size_t got, const char *field) {
            if (got != n)
                throw std::invalid_argument(std::string("links.") + field + ": expected " + std::to_string(n) +
                                            " entries, got " + std::to_string(got));
        };
        check_len(theta_ap_deg.size(), "theta_ap_deg");
        check_len(theta_user_deg.size(), "theta_user_deg");
        check_len(user_velocity_mps.size(), "user_velocity_mps");
        check_len(user_direction_deg.size(), "user_direction_deg");
        check_len(user_height_m.size(), "user_height_m");
        check_len(ap_height_m.size(), "ap_height_m");
        check_len(user_ids.size(), "user_ids");
        for (std::size_t i = 0; i < n; ++i)
        {
            if (!(ap_user_distance_m[i] > 0.0))
                throw std::invalid_argument("links.ap_user_distance_m must be positive");
            if (!(user_height_m[i] > 0.0))
                throw std::invalid_argument("links.user_height_m must be positive");
            if (!(ap_height_m[i] > 0.0))
                throw std::invalid_argument("links.ap_height_m must be positive");
            if (!(user_velocity_mps[i] >= 0.0))
                throw std::invalid_argument("links.user_velocity_mps must be nonnegative");
            require_finite(theta_ap_deg[i], "links.theta_ap_deg");
            require_finite(theta_user_deg[i], "links.theta_user_deg");
            require_finite(user_direction_deg[i], "links.user_direction_deg");
        }
    }

    // ----- sub-path offsets --------------------------------------------------

    std::array<double, table_subpaths> subpath_offsets(Scenario scenario, ArraySide side)
    {
        static constexpr std::array<double, 10> macro_ap{0.0784, 0.3197, 0.5013, 0.8014, 1.1348,
                                                         1.2945, 1.8541, 2.3416, 2.9984, 4.2132};
        static constexpr std::array<double, 10> micro_ap{0.3012, 0.7573, 1.1989, 1.9147, 2.6524,
                                                         3.4572, 4.5142, 5.6942, 7.4265, 10.8754};
        static constexpr std::array<double, 10> user{1.4985,  5.1425,  9.0190,  12.8045, 15.8562,
                                                     22.8766, 31.0487, 39.5124, 51.2375, 74.5423};
        const auto &half = side == ArraySide::User ? user : (scenario == Scenario::UrbanMacro ? macro_ap : micro_ap);
        std::array<double, table_subpaths> out{};
        for (std::size_t i = 0; i < half.size(); ++i)
        {
            out[2 * i] = half[i];
            out[2 * i + 1] = -half[i];
        }
        return out;
    }

    double wrap_degrees(double deg)
    {
        double w = std::fmod(deg, 360.0);
        if (w > 180.0)
            w -= 360.0;
        else if (w <= -180.0)
            w += 360.0;
        return w;
    }

    double path_loss_db(double distance_m, const ScmConfig &scm)
    {
        if (!(distance_m > 0.0))
            throw std::domain_error("path_loss_db: distance must be positive");
        const ResolvedModel m = resolved_model(scm);
        return m.path_loss_intercept_db + m.path_loss_slope_db * std::log10(distance_m);
    }

    // ----- bulk parameters ---------------------------------------------------

    std::vector<PathParams> draw_bulk_parameters(const ScmConfig &scm, const LinkConfig &links, std::uint64_t seed)
    {
        scm.validate();
        links.validate();
        const ResolvedModel model = resolved_model(scm);
        const auto ap_offsets = subpath_offsets(scm.scenario, ArraySide::AP);
        const auto user_offsets = subpath_offsets(scm.scenario, ArraySide::User);
        const std::size_t num_paths = scm.num_paths;

        std::vector<PathParams> out(links.num_links());
        for (std::size_t n = 0; n < links.num_links(); ++n)
        {
            RngStream rng(seed, "scm-bulk", {n});
            PathParams &p = out[n];

            p.delays_s.resize(num_paths);
            for (auto &d : p.delays_s)
                d = rng.exponential(model.delay_spread_s);
            std::sort(p.delays_s.begin(), p.delays_s.end());
            const double first = p.delays_s.front();
            for (auto &d : p.delays_s)
                d -= first;

            p.powers.resize(num_paths);
            for (std::size_t k = 0; k < num_paths; ++k)
                p.powers[k] = std::exp(-p.delays_s[k] / model.delay_spread_s) *
                              std::pow(10.0, -0.1 * model.path_power_sigma_db * rng.normal());
            const double total = std::accumulate(p.powers.begin(), p.powers.end(), 0.0);
            for (auto &pw : p.powers)
                pw /= total;

            p.shadow_fading = std::pow(10.0, 0.1 * model.shadow_sigma_db * rng.normal());
            p.path_loss_db = path_loss_db(links.ap_user_distance_m[n], scm);

            p.mean_aod_deg.resize(num_paths);
            p.mean_aoa_deg.resize(num_paths);
            p.subpaths.assign(num_paths, std::vector<SubPath>(scm.num_subpaths));
            for (std::size_t k = 0; k < num_paths; ++k)
            {
                p.mean_aod_deg[k] = wrap_degrees(links.theta_ap_deg[n] + model.ap_path_angle_spread_deg * rng.normal());
                p.mean_aoa_deg[k] =
                    wrap_degrees(links.theta_user_deg[n] + model.user_path_angle_spread_deg * rng.normal());
                for (std::size_t m = 0; m < scm.num_subpaths; ++m)
                {
                    SubPath &sp = p.subpaths[k][m];
                    sp.aod_deg = wrap_degrees(p.mean_aod_deg[k] + ap_offsets[m]);
                    sp.aoa_deg = wrap_degrees(p.mean_aoa_deg[k] + user_offsets[m]);
                    sp.phase_rad = rng.uniform(0.0, 2.0 * pi);
                }
            }

            if (scm.option == ScmOption::LOS)
            {
                p.los_k_factor = db_to_linear(model.los_k_factor_db);
                p.los_phase_rad = rng.uniform(0.0, 2.0 * pi);
            }
        }
        return out;
    }

    // ----- coefficients ------------------------------------------------------

    namespace
    {
        double deg2rad(double d) { return d * pi / 180.0; }

        struct LinkGeometry
        {
            double wave_number; // rad per metre
            double speed;
            double direction_deg;
            std::vector<double> ap_pos; // wavelengths, relative to element 0
            std::vector<double> user_pos;
        };

        LinkGeometry geometry(const AntennaConfig &ant, const LinkConfig &links, std::size_t link,
                              const ScmConfig &scm)
        {
            LinkGeometry g;
            g.wave_number = 2.0 * pi / scm.wavelength_m();
            g.speed = links.user_velocity_mps[link];
            g.direction_deg = links.user_direction_deg[link];
            for (double x : ant.ap_element_positions)
                g.ap_pos.push_back(x - ant.ap_element_positions.front());
            for (double x : ant.user_element_positions)
                g.user_pos.push_back(x - ant.user_element_positions.front());
            return g;
        }
    } // namespace

    cplx los_component(const PathParams &params, const AntennaConfig &ant, const LinkConfig &links,
                       std::size_t link, const ScmConfig &scm, std::size_t l, std::size_t m, double t)
    {
        const LinkGeometry g = geometry(ant, links, link, scm);
        const double ap_angle = links.theta_ap_deg[link];
        const double user_angle = links.theta_user_deg[link];
        const double gain = std::sqrt(pattern_gain(ant.ap_gain_pattern, ant.ap_azimuth_grid, ap_angle) *
                                      pattern_gain(ant.user_gain_pattern, ant.user_azimuth_grid, user_angle));
        const double phase = 2.0 * pi * g.ap_pos[l] * std::sin(deg2rad(ap_angle)) +
                             2.0 * pi * g.user_pos[m] * std::sin(deg2rad(user_angle)) + params.los_phase_rad +
                             g.wave_number * g.speed * std::cos(deg2rad(user_angle - g.direction_deg)) * t;
        return std::polar(gain, phase);
    }

    std::vector<CMatrix> channel_coefficients(const PathParams &params, const AntennaConfig &ant,
                                              const LinkConfig &links, std::size_t link, const ScmConfig &scm,
                                              double t)
    {
        if (!(t >= 0.0))
            throw std::invalid_argument("channel_coefficients: t must be nonnegative");
        if (link >= links.num_links())
            throw std::out_of_range("channel_coefficients: link index out of range");

        const LinkGeometry g = geometry(ant, links, link, scm);
        const std::size_t L = g.ap_pos.size();
        const std::size_t M = g.user_pos.size();
        const double k_los = params.los_k_factor;
        const double scatter_scale = 1.0 / std::sqrt(1.0 + k_los);

        std::vector<CMatrix> out;
        out.reserve(params.num_paths());
        CVector ap_phasor(L), user_phasor(M);
        for (std::size_t k = 0; k < params.num_paths(); ++k)
        {
            const auto &subs = params.subpaths[k];
            const double amp =
                scatter_scale * std::sqrt(params.powers[k] * params.shadow_fading / static_cast<double>(subs.size()));
            CMatrix h(L, M);
            for (const SubPath &sp : subs)
            {
                const double aod = deg2rad(sp.aod_deg);
                const double aoa = deg2rad(sp.aoa_deg);
                const double g_bs = std::sqrt(pattern_gain(ant.ap_gain_pattern, ant.ap_azimuth_grid, sp.aod_deg));
                const double g_ms = std::sqrt(pattern_gain(ant.user_gain_pattern, ant.user_azimuth_grid, sp.aoa_deg));
                const double doppler = g.wave_number * g.speed * std::cos(aoa - deg2rad(g.direction_deg)) * t;
                for (std::size_t l = 0; l < L; ++l)
                    ap_phasor[l] = std::polar(g_bs, 2.0 * pi * g.ap_pos[l] * std::sin(aod) + sp.phase_rad);
                for (std::size_t m = 0; m < M; ++m)
                    user_phasor[m] = std::polar(g_ms, 2.0 * pi * g.user_pos[m] * std::sin(aoa) + doppler);
                for (std::size_t l = 0; l < L; ++l)
                    for (std::size_t m = 0; m < M; ++m)
                        h(l, m) += ap_phasor[l] * user_phasor[m];
            }
            for (auto &v : h.data())
                v *= amp;

            if (k == 0 && k_los > 0.0)
            {
                const double los_amp = std::sqrt(params.shadow_fading * k_los / (1.0 + k_los));
                for (std::size_t l = 0; l < L; ++l)
                    for (std::size_t m = 0; m < M; ++m)
                        h(l, m) += los_amp * los_component(params, ant, links, link, scm, l, m, t);
            }
            out.push_back(std::move(h));
        }
        return out;
    }

    // ----- tensor ------------------------------------------------------------

    std::vector<std::vector<double>> ChannelTensor::path_delays_s() const
    {
        std::vector<std::vector<double>> out;
        for (const auto &p : links)
            out.push_back(p.delays_s);
        return out;
    }

    double time_step_s(const ScmConfig &scm, const LinkConfig &links)
    {
        const double v_max = links.user_velocity_mps.empty()
                                 ? 0.0
                                 : *std::max_element(links.user_velocity_mps.begin(), links.user_velocity_mps.end());
        if (v_max <= 0.0)
            return 1e-3;
        return scm.wavelength_m() / (2.0 * scm.sample_density * v_max);
    }

    ChannelTensor generate(const ScmConfig &scm, const AntennaConfig &ant, const LinkConfig &links,
                           std::size_t num_time_samples, std::uint64_t seed)
    {
        scm.validate();
        ant.validate(scm);
        links.validate();
        if (num_time_samples < 1)
            throw std::invalid_argument("generate: num_time_samples must be at least 1");

        ChannelTensor out;
        out.dims = {scm.num_ap_elements, scm.num_user_elements, links.num_links(), scm.num_paths, num_time_samples};
        out.coefficients.assign(out.dims[0] * out.dims[1] * out.dims[2] * out.dims[3] * out.dims[4], 0.0);
        out.time_step_s = time_step_s(scm, links);
        out.links = draw_bulk_parameters(scm, links, seed);

        for (std::size_t n = 0; n < links.num_links(); ++n)
            for (std::size_t s = 0; s < num_time_samples; ++s)
            {
                const auto paths = channel_coefficients(out.links[n], ant, links, n, scm,
                                                        static_cast<double>(s) * out.time_step_s);
                for (std::size_t k = 0; k < paths.size(); ++k)
                    for (std::size_t l = 0; l < out.dims[0]; ++l)
                        for (std::size_t m = 0; m < out.dims[1]; ++m)
                            out.at(l, m, n, k, s) = paths[k](l, m);
            }
        return out;
    }

    // ----- export ------------------------------------------------------------

    namespace
    {
        void put_u32(std::ostream &os, std::uint32_t v)
        {
            for (int i = 0; i < 4; ++i)
                os.put(static_cast<char>((v >> (8 * i)) & 0xFFU));
        }

        void put_f64(std::ostream &os, double d)
        {
            std::uint64_t v = 0;
            std::memcpy(&v, &d, sizeof v);
            for (int i = 0; i < 8; ++i)
                os.put(static_cast<char>((v >> (8 * i)) & 0xFFU));
        }

        std::uint64_t get_le(std::istream &is, int bytes)
        {
            std::uint64_t v = 0;
            for (int i = 0; i < bytes; ++i)
            {
                const int c = is.get();
                if (c == EOF)
                    throw std::runtime_error("read_tensor: unexpected end of file");
                v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
            }
            return v;
        }

        double get_f64(std::istream &is)
        {
            const std::uint64_t v = get_le(is, 8);
            double d = 0.0;
            std::memcpy(&d, &v, sizeof d);
            return d;
        }
    } // namespace

    void write_tensor(const ChannelTensor &tensor, const std::filesystem::path &path)
    {
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot open " + path.string() + " for writing");
        os.write("SCM5", 4);
        for (std::size_t d : tensor.dims)
            put_u32(os, static_cast<std::uint32_t>(d));
        put_f64(os, tensor.time_step_s);
        for (const cplx &c : tensor.coefficients)
        {
            put_f64(os, c.real());
            put_f64(os, c.imag());
        }
        if (!os)
            throw std::runtime_error("write failed for " + path.string());
    }

    ChannelTensor read_tensor(const std::filesystem::path &path)
    {
        std::ifstream is(path, std::ios::binary);
        if (!is)
            throw std::runtime_error("cannot open " + path.string());
        char magic[4] = {};
        is.read(magic, 4);
        if (!is || std::string_view(magic, 4) != "SCM5")
            throw std::runtime_error(path.string() + ": bad magic, not an SCM5 tensor");
        ChannelTensor t;
        std::size_t total = 1;
        for (auto &d : t.dims)
        {
            d = static_cast<std::size_t>(get_le(is, 4));
            total *= d;
        }
        t.time_step_s = get_f64(is);
        t.coefficients.resize(total);
        for (auto &c : t.coefficients)
        {
            const double re = get_f64(is);
            const double im = get_f64(is);
            c = {re, im};
        }
        return t;
    }

    void write_metadata_json(const ChannelTensor &tensor, const std::filesystem::path &path)
    {
        using nlohmann::json;
        json j;
        j["dims"] = tensor.dims;
        j["time_step_s"] = tensor.time_step_s;
        j["links"] = json::array();
        for (const auto &p : tensor.links)
        {
            json lj;
            lj["powers"] = p.powers;
            lj["delays_s"] = p.delays_s;
            lj["mean_aod_deg"] = p.mean_aod_deg;
            lj["mean_aoa_deg"] = p.mean_aoa_deg;
            lj["shadow_fading"] = p.shadow_fading;
            lj["path_loss_db"] = p.path_loss_db;
            lj["los_k_factor"] = p.los_k_factor;
            lj["los_phase_rad"] = p.los_phase_rad;
            json subs = json::array();
            for (const auto &path_subs : p.subpaths)
            {
                json arr = json::array();
                for (const auto &sp : path_subs)
                    arr.push_back({{"aod_deg", sp.aod_deg}, {"aoa_deg", sp.aoa_deg}, {"phase_rad", sp.phase_rad}});
                subs.push_back(std::move(arr));
            }
            lj["subpaths"] = std::move(subs);
            j["links"].push_back(std::move(lj));
        }
        std::ofstream os(path);
        if (!os)
            throw std::runtime_error("cannot open " + path.string() + " for writing");
        os << j.dump(2) << '\n';
        if (!os)
            throw std::runtime_error("write failed for " + path.string());
    }

} // namespace scmlink::scm
