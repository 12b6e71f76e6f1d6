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

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace scmlink::harness
{
    namespace
    {
        std::vector<double> default_grid()
        {
            std::vector<double> g;
            for (int s = 1; s <= 35; ++s)
                g.push_back(s);
            return g;
        }

        ExperimentConfig base(std::string name)
        {
            ExperimentConfig c;
            c.name = std::move(name);
            c.snr_grid_db = default_grid();
            return c;
        }

        // Shared SCM geometry for the case tables: 10 samples, 5 m/s users,
        // 1.5 m user and 32 m AP heights, 2 GHz carrier.
        ScmSetup case_setup(scm::Scenario scenario, std::vector<double> theta_ap, std::vector<double> distance,
                            std::vector<double> direction)
        {
            ScmSetup s;
            s.scm.scenario = scenario;
            s.scm.option = scm::ScmOption::LOS;
            s.scm.num_ap_elements = 8;
            s.scm.num_user_elements = 2;
            s.scm.num_paths = theta_ap.size();
            s.scm.sample_density = 3.0;
            s.scm.center_frequency_hz = 2.0e9;
            s.antennas = scm::AntennaConfig::uniform(8, 2);
            const std::size_t n = theta_ap.size();
            s.links.ap_user_distance_m = std::move(distance);
            s.links.theta_ap_deg = std::move(theta_ap);
            s.links.theta_user_deg.assign(n, 0.0);
            s.links.user_velocity_mps.assign(n, 5.0);
            s.links.user_direction_deg = std::move(direction);
            s.links.user_height_m.assign(n, 1.5);
            s.links.ap_height_m.assign(n, 32.0);
            for (std::size_t i = 0; i < n; ++i)
                s.links.user_ids.push_back(static_cast<int>(i + 1));
            s.num_time_samples = 10;
            return s;
        }

        ExperimentConfig scm_case(std::string name, ScmSetup setup)
        {
            ExperimentConfig c = base(std::move(name));
            c.channel = ChannelKind::SCM;
            c.tx_antennas = setup.scm.num_user_elements;
            c.rx_antennas = setup.scm.num_ap_elements;
            c.scm_doppler_hz = setup.links.user_velocity_mps.front() / setup.scm.wavelength_m();
            c.scm = std::move(setup);
            return c;
        }

        // Rayleigh 2x2 chain of the multipath and diversity figures.
        ExperimentConfig rayleigh(std::string name, std::size_t taps, bool interleaved)
        {
            ExperimentConfig c = base(std::move(name));
            c.channel = ChannelKind::RayleighTDL;
            c.modulation = codec::parse_modulation("qpsk");
            c.tdl.num_taps = taps;
            c.tdl.max_delay_s = 5e-6;
            c.tdl.doppler_hz = 100.0;
            c.interleaved = interleaved;
            return c;
        }

        // Single-link SCM chain used by the link-level SCM figures.
        ExperimentConfig scm_link(std::string name, bool flat)
        {
            ExperimentConfig c = base(std::move(name));
            c.channel = ChannelKind::SCM;
            ScmSetup &s = c.scm;
            s.scm.scenario = scm::Scenario::UrbanMacro;
            s.scm.option = scm::ScmOption::LOS;
            s.scm.num_ap_elements = 2;
            s.scm.num_user_elements = 2;
            s.scm.num_paths = 6;
            s.scm.center_frequency_hz = 2.4e9;
            s.antennas = scm::AntennaConfig::uniform(2, 2);
            s.links.ap_user_distance_m = {200.0};
            s.links.theta_ap_deg = {0.0};
            s.links.theta_user_deg = {0.0};
            s.links.user_velocity_mps = {0.0};
            s.links.user_direction_deg = {0.0};
            s.links.user_height_m = {1.5};
            s.links.ap_height_m = {32.0};
            s.links.user_ids = {1};
            s.flat = flat;
            c.scm_doppler_hz = 100.0;
            return c;
        }

        struct PresetEntry
        {
            std::string name;
            std::string description;
            std::function<ExperimentConfig()> make;
        };

        const std::vector<PresetEntry> &registry()
        {
            static const std::vector<PresetEntry> entries = [] {
                std::vector<PresetEntry> e;
                e.push_back({"scm-case1", "SCM urban micro LOS, one user, 8x2 elements", [] {
                                 return scm_case("scm-case1",
                                                 case_setup(scm::Scenario::UrbanMicro, {30.0}, {174.33}, {-157.3}));
                             }});
                e.push_back({"scm-case2", "SCM urban micro LOS, three users at -40/20/40 deg", [] {
                                 return scm_case("scm-case2",
                                                 case_setup(scm::Scenario::UrbanMicro, {-40.0, 20.0, 40.0},
                                                            {349.2884, 422.5138, 422.8360},
                                                            {109.7538, 147.0231, -96.5180}));
                             }});
                e.push_back({"scm-case3", "SCM urban macro LOS, two users at -40/40 deg", [] {
                                 return scm_case("scm-case3",
                                                 case_setup(scm::Scenario::UrbanMacro, {-40.0, 40.0},
                                                            {498.5580, 374.4319}, {104.8044, 113.3827}));
                             }});
                e.push_back({"awgn-bpsk", "uncoded BPSK, single antenna, AWGN, perfect CSI", [] {
                                 ExperimentConfig c = base("awgn-bpsk");
                                 c.channel = ChannelKind::AWGN;
                                 c.tx_antennas = 1;
                                 c.rx_antennas = 1;
                                 c.coded = false;
                                 c.interleaved = false;
                                 c.modulation = codec::parse_modulation("bpsk");
                                 c.estimation = Estimation::Perfect;
                                 c.snr_grid_db.clear();
                                 for (int s = 0; s <= 10; ++s)
                                     c.snr_grid_db.push_back(s);
                                 c.num_blocks = 10000;
                                 return c;
                             }});
                e.push_back({"fig4.4-2path", "2x2 STBC, 2-path Rayleigh, coded, no interleaver",
                             [] { return rayleigh("fig4.4-2path", 2, false); }});
                e.push_back({"fig4.4-2path-interleaved", "2x2 STBC, 2-path Rayleigh, coded and interleaved",
                             [] { return rayleigh("fig4.4-2path-interleaved", 2, true); }});
                e.push_back({"fig4.4-3path", "2x2 STBC, 3-path Rayleigh, coded and interleaved",
                             [] { return rayleigh("fig4.4-3path", 3, true); }});
                e.push_back({"fig4.4-4path", "2x2 STBC, 4-path Rayleigh, coded and interleaved",
                             [] { return rayleigh("fig4.4-4path", 4, true); }});
                // the antenna comparison holds total received energy fixed, so
                // the gap is diversity gain without the 10log10(Nr) array gain
                e.push_back({"fig4.5-2x2", "2x2 STBC, 2-path Rayleigh, Viterbi and interleaver", [] {
                                 ExperimentConfig c = rayleigh("fig4.5-2x2", 2, true);
                                 c.snr_per_receive_antenna = false;
                                 return c;
                             }});
                e.push_back({"fig4.5-2x4", "2x4 STBC, 2-path Rayleigh, Viterbi and interleaver", [] {
                                 ExperimentConfig c = rayleigh("fig4.5-2x4", 2, true);
                                 c.rx_antennas = 4;
                                 c.snr_per_receive_antenna = false;
                                 return c;
                             }});
                e.push_back({"fig4.5-uncoded", "2x2 STBC, 2-path Rayleigh, no Viterbi, no interleaver", [] {
                                 ExperimentConfig c = rayleigh("fig4.5-uncoded", 2, false);
                                 c.coded = false;
                                 return c;
                             }});
                e.push_back({"fig4.5-viterbi", "2x2 STBC, 2-path Rayleigh, Viterbi only",
                             [] { return rayleigh("fig4.5-viterbi", 2, false); }});
                e.push_back({"fig4.6-flat", "2x2 STBC over SCM with every path delay at zero",
                             [] { return scm_link("fig4.6-flat", true); }});
                e.push_back({"fig4.6-selective", "2x2 STBC over frequency-selective SCM",
                             [] { return scm_link("fig4.6-selective", false); }});
                for (const char *mod : {"bpsk", "qpsk", "4qam", "16qam", "16psk"})
                    e.push_back({std::string("fig4.7-") + mod, std::string("2x2 STBC over SCM, ") + mod, [mod] {
                                     ExperimentConfig c = scm_link(std::string("fig4.7-") + mod, false);
                                     c.modulation = codec::parse_modulation(mod);
                                     return c;
                                 }});
                for (const char *fd : {"10", "50", "100", "141.6"})
                    e.push_back({std::string("fig4.8-doppler-") + fd,
                                 std::string("2x2 STBC over SCM, 16-QAM, Doppler ") + fd + " Hz", [fd] {
                                     ExperimentConfig c = scm_link(std::string("fig4.8-doppler-") + fd, false);
                                     c.modulation = codec::parse_modulation("16qam");
                                     c.scm_doppler_hz = std::stod(fd);
                                     return c;
                                 }});
                return e;
            }();
            return entries;
        }

        const PresetEntry &find_preset(std::string_view name)
        {
            for (const auto &p : registry())
                if (p.name == name)
                    return p;
            std::string list;
            for (const auto &p : registry())
                list += (list.empty() ? "" : ", ") + p.name;
            throw std::invalid_argument("unknown preset '" + std::string(name) + "'; available: " + list);
        }

        // ----- value parsing ---------------------------------------------------

        std::string trim(std::string_view s)
        {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string_view::npos)
                return {};
            const auto e = s.find_last_not_of(" \t\r\n");
            return std::string(s.substr(b, e - b + 1));
        }

        double to_double(const std::string &key, const std::string &v)
        {
            double out = 0.0;
            const std::string t = trim(v);
            const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
            if (ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(out))
                throw std::invalid_argument(key + ": '" + v + "' is not a number");
            return out;
        }

        std::uint64_t to_uint(const std::string &key, const std::string &v, int base = 10)
        {
            std::uint64_t out = 0;
            const std::string t = trim(v);
            const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out, base);
            if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
                throw std::invalid_argument(key + ": '" + v + "' is not a nonnegative integer");
            return out;
        }

        bool to_bool(const std::string &key, const std::string &v)
        {
            const std::string t = trim(v);
            if (t == "true" || t == "1" || t == "yes" || t == "on")
                return true;
            if (t == "false" || t == "0" || t == "no" || t == "off")
                return false;
            throw std::invalid_argument(key + ": '" + v + "' is not a boolean");
        }

        std::vector<std::string> split(const std::string &v, char sep)
        {
            std::vector<std::string> out;
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, sep))
                out.push_back(trim(item));
            return out;
        }

        std::vector<double> to_doubles(const std::string &key, const std::string &v)
        {
            std::vector<double> out;
            for (const auto &s : split(v, ','))
                out.push_back(to_double(key, s));
            return out;
        }

        std::string fmt(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }

        std::string join(const std::vector<double> &v)
        {
            std::string out;
            for (double d : v)
                out += (out.empty() ? "" : ",") + fmt(d);
            return out;
        }

        ChannelKind parse_channel(const std::string &v)
        {
            const std::string t = trim(v);
            if (t == "awgn")
                return ChannelKind::AWGN;
            if (t == "rayleigh")
                return ChannelKind::RayleighTDL;
            if (t == "scm")
                return ChannelKind::SCM;
            throw std::invalid_argument("channel: expected awgn, rayleigh or scm, got '" + v + "'");
        }

        Estimation parse_estimation(const std::string &v)
        {
            const std::string t = trim(v);
            if (t == "perfect")
                return Estimation::Perfect;
            if (t == "hadamard")
                return Estimation::HadamardPilot;
            throw std::invalid_argument("estimation: expected perfect or hadamard, got '" + v + "'");
        }

        std::string octal(unsigned g)
        {
            std::ostringstream os;
            os << std::oct << g;
            return os.str();
        }

    } // namespace

    ExperimentConfig preset(std::string_view name)
    {
        return find_preset(name).make();
    }

    std::vector<std::string> preset_names()
    {
        std::vector<std::string> out;
        for (const auto &p : registry())
            out.push_back(p.name);
        return out;
    }

    std::string preset_description(std::string_view name)
    {
        return find_preset(name).description;
    }

    std::vector<double> parse_snr_range(std::string_view spec)
    {
        const std::vector<std::string> parts = split(std::string(spec), ':');
        if (parts.size() < 2 || parts.size() > 3)
            throw std::invalid_argument("snr range must be A:B or A:B:step, got '" + std::string(spec) + "'");
        const double a = to_double("snr", parts[0]);
        const double b = to_double("snr", parts[1]);
        const double step = parts.size() == 3 ? to_double("snr", parts[2]) : 1.0;
        if (!(step > 0.0) || b < a)
            throw std::invalid_argument("snr range needs A <= B and a positive step");
        std::vector<double> out;
        const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9));
        for (std::size_t i = 0; i <= n; ++i)
            out.push_back(a + step * static_cast<double>(i));
        return out;
    }

    std::map<std::string, std::string> to_key_values(const ExperimentConfig &c)
    {
        std::map<std::string, std::string> kv;
        kv["name"] = c.name;
        kv["channel"] = to_string(c.channel);
        kv["tx_antennas"] = std::to_string(c.tx_antennas);
        kv["rx_antennas"] = std::to_string(c.rx_antennas);
        kv["ofdm.num_subcarriers"] = std::to_string(c.ofdm.num_subcarriers);
        kv["ofdm.cp_length"] = std::to_string(c.ofdm.cp_length);
        kv["ofdm.sample_time_s"] = fmt(c.ofdm.sample_time_s);
        kv["coded"] = c.coded ? "true" : "false";
        kv["code.constraint_length"] = std::to_string(c.code.constraint_length);
        kv["code.generators"] = octal(c.code.generators[0]) + "," + octal(c.code.generators[1]);
        kv["code.traceback_depth"] = std::to_string(c.code.traceback_depth);
        kv["modulation"] = c.modulation.name();
        kv["interleaved"] = c.interleaved ? "true" : "false";
        kv["soft_decision"] = c.soft_decision ? "true" : "false";
        kv["estimation"] = to_string(c.estimation);
        kv["pilot_length"] = std::to_string(c.pilot_length);
        kv["max_burst_blocks"] = std::to_string(c.max_burst_blocks);
        kv["tdl.num_taps"] = std::to_string(c.tdl.num_taps);
        kv["tdl.max_delay_s"] = fmt(c.tdl.max_delay_s);
        kv["tdl.doppler_hz"] = fmt(c.tdl.doppler_hz);
        kv["scm.scenario"] = scm::to_string(c.scm.scm.scenario);
        kv["scm.option"] = scm::to_string(c.scm.scm.option);
        kv["scm.num_paths"] = std::to_string(c.scm.scm.num_paths);
        kv["scm.center_frequency_hz"] = fmt(c.scm.scm.center_frequency_hz);
        kv["scm.sample_density"] = fmt(c.scm.scm.sample_density);
        kv["scm.num_time_samples"] = std::to_string(c.scm.num_time_samples);
        kv["scm.flat"] = c.scm.flat ? "true" : "false";
        kv["scm.doppler_hz"] = fmt(c.scm_doppler_hz);
        kv["scm.links.distance_m"] = join(c.scm.links.ap_user_distance_m);
        kv["scm.links.theta_ap_deg"] = join(c.scm.links.theta_ap_deg);
        kv["scm.links.theta_user_deg"] = join(c.scm.links.theta_user_deg);
        kv["scm.links.velocity_mps"] = join(c.scm.links.user_velocity_mps);
        kv["scm.links.direction_deg"] = join(c.scm.links.user_direction_deg);
        kv["snr_grid_db"] = join(c.snr_grid_db);
        kv["num_blocks"] = std::to_string(c.num_blocks);
        kv["symbols_per_block"] = std::to_string(c.symbols_per_block);
        kv["block_ofdm_symbols"] = std::to_string(c.block_ofdm_symbols);
        kv["seed"] = std::to_string(c.seed);
        kv["fast"] = c.fast ? "true" : "false";
        kv["fast_error_target"] = std::to_string(c.fast_error_target);
        kv["strict_paper_params"] = c.strict_paper_params ? "true" : "false";
        kv["snr_per_receive_antenna"] = c.snr_per_receive_antenna ? "true" : "false";
        return kv;
    }

    void apply_override(ExperimentConfig &c, const std::string &raw_key, const std::string &v)
    {
        const std::string key = trim(raw_key);
        const auto sz = [&] { return static_cast<std::size_t>(to_uint(key, v)); };
        const auto link_size = [&](std::vector<double> &target, std::vector<double> values) {
            target = std::move(values);
            // keep the per-link vectors aligned when the link count changes
            auto &l = c.scm.links;
            const std::size_t n = target.size();
            const auto fit = [n](auto &vec, auto fill) {
                if (vec.size() != n)
                    vec.resize(n, vec.empty() ? fill : vec.back());
            };
            fit(l.ap_user_distance_m, 100.0);
            fit(l.theta_ap_deg, 0.0);
            fit(l.theta_user_deg, 0.0);
            fit(l.user_velocity_mps, 0.0);
            fit(l.user_direction_deg, 0.0);
            fit(l.user_height_m, 1.5);
            fit(l.ap_height_m, 32.0);
            l.user_ids.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                l.user_ids[i] = static_cast<int>(i + 1);
            c.scm.scm.num_paths = std::max(c.scm.scm.num_paths, std::size_t{1});
        };

        if (key == "name") c.name = trim(v);
        else if (key == "channel") c.channel = parse_channel(v);
        else if (key == "tx_antennas") c.tx_antennas = sz();
        else if (key == "rx_antennas") c.rx_antennas = sz();
        else if (key == "ofdm.num_subcarriers")
        {
            c.ofdm.num_subcarriers = sz();
            c.symbols_per_block = c.ofdm.num_subcarriers;
        }
        else if (key == "ofdm.cp_length") c.ofdm.cp_length = sz();
        else if (key == "ofdm.sample_time_s") c.ofdm.sample_time_s = to_double(key, v);
        else if (key == "coded") c.coded = to_bool(key, v);
        else if (key == "code.constraint_length") c.code.constraint_length = static_cast<int>(to_uint(key, v));
        else if (key == "code.generators")
        {
            const auto parts = split(v, ',');
            if (parts.size() != 2)
                throw std::invalid_argument(key + ": expected two octal generators");
            c.code.generators = {static_cast<unsigned>(to_uint(key, parts[0], 8)),
                                 static_cast<unsigned>(to_uint(key, parts[1], 8))};
        }
        else if (key == "code.traceback_depth") c.code.traceback_depth = static_cast<int>(to_uint(key, v));
        else if (key == "modulation") c.modulation = codec::parse_modulation(trim(v));
        else if (key == "interleaved") c.interleaved = to_bool(key, v);
        else if (key == "soft_decision") c.soft_decision = to_bool(key, v);
        else if (key == "estimation") c.estimation = parse_estimation(v);
        else if (key == "pilot_length") c.pilot_length = sz();
        else if (key == "max_burst_blocks") c.max_burst_blocks = sz();
        else if (key == "tdl.num_taps") c.tdl.num_taps = sz();
        else if (key == "tdl.max_delay_s") c.tdl.max_delay_s = to_double(key, v);
        else if (key == "tdl.doppler_hz") c.tdl.doppler_hz = to_double(key, v);
        else if (key == "scm.scenario") c.scm.scm.scenario = scm::parse_scenario(trim(v));
        else if (key == "scm.option") c.scm.scm.option = scm::parse_option(trim(v));
        else if (key == "scm.num_paths") c.scm.scm.num_paths = sz();
        else if (key == "scm.center_frequency_hz") c.scm.scm.center_frequency_hz = to_double(key, v);
        else if (key == "scm.sample_density") c.scm.scm.sample_density = to_double(key, v);
        else if (key == "scm.num_time_samples") c.scm.num_time_samples = sz();
        else if (key == "scm.flat") c.scm.flat = to_bool(key, v);
        else if (key == "scm.doppler_hz") c.scm_doppler_hz = to_double(key, v);
        else if (key == "scm.links.distance_m") link_size(c.scm.links.ap_user_distance_m, to_doubles(key, v));
        else if (key == "scm.links.theta_ap_deg") link_size(c.scm.links.theta_ap_deg, to_doubles(key, v));
        else if (key == "scm.links.theta_user_deg") link_size(c.scm.links.theta_user_deg, to_doubles(key, v));
        else if (key == "scm.links.velocity_mps") link_size(c.scm.links.user_velocity_mps, to_doubles(key, v));
        else if (key == "scm.links.direction_deg") link_size(c.scm.links.user_direction_deg, to_doubles(key, v));
        else if (key == "snr_grid_db")
            c.snr_grid_db = v.find(':') != std::string::npos ? parse_snr_range(v) : to_doubles(key, v);
        else if (key == "num_blocks") c.num_blocks = sz();
        else if (key == "symbols_per_block") c.symbols_per_block = sz();
        else if (key == "block_ofdm_symbols") c.block_ofdm_symbols = sz();
        else if (key == "seed") c.seed = to_uint(key, v);
        else if (key == "fast") c.fast = to_bool(key, v);
        else if (key == "fast_error_target") c.fast_error_target = sz();
        else if (key == "strict_paper_params") c.strict_paper_params = to_bool(key, v);
        else if (key == "workers") c.workers = sz();
        else if (key == "snr_per_receive_antenna") c.snr_per_receive_antenna = to_bool(key, v);
        else
            throw std::invalid_argument("unknown configuration key '" + key + "'");
    }

    void apply_config_file(ExperimentConfig &cfg, const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open config file " + path.string());
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line))
        {
            ++lineno;
            const std::string t = trim(line.substr(0, line.find('#')));
            if (t.empty())
                continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
            try
            {
                apply_override(cfg, t.substr(0, eq), t.substr(eq + 1));
            }
            catch (const std::invalid_argument &e)
            {
                throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
    }

} // namespace scmlink::harness
