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

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>

namespace
{
    using namespace scmlink;

    constexpr int exit_config = 2;
    constexpr int exit_io = 3;

    struct SimulateArgs
    {
        std::string preset;
        std::string snr;
        std::size_t blocks = 0;
        std::uint64_t seed = 0;
        bool seed_set = false;
        std::string out;
        std::string plot;
        bool strict = false;
        bool fast = false;
        std::string config;
        std::vector<std::string> overrides;
        std::size_t workers = 0;
    };

    int simulate(const SimulateArgs &a)
    {
        harness::ExperimentConfig cfg;
        try
        {
            cfg = harness::preset(a.preset);
            if (!a.config.empty())
                harness::apply_config_file(cfg, a.config);
            for (const auto &kv : a.overrides)
            {
                const auto eq = kv.find('=');
                if (eq == std::string::npos)
                    throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
                harness::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
            }
            if (!a.snr.empty())
                cfg.snr_grid_db = harness::parse_snr_range(a.snr);
            if (a.blocks)
                cfg.num_blocks = a.blocks;
            if (a.seed_set)
                cfg.seed = a.seed;
            if (a.strict)
                cfg.strict_paper_params = true;
            if (a.fast)
                cfg.fast = true;
            if (a.workers)
                cfg.workers = a.workers;
            cfg.validate();
        }
        catch (const std::runtime_error &e)
        {
            std::cerr << "error: " << e.what() << "\n";
            return exit_io;
        }
        catch (const std::exception &e)
        {
            std::cerr << "config error: " << e.what() << "\n";
            return exit_config;
        }

        const auto t0 = std::chrono::steady_clock::now();
        const harness::BerCurve curve = harness::run_ber_sweep(cfg);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        for (const auto &w : curve.warnings)
            std::cerr << "warning: " << w << "\n";
        try
        {
            if (!a.out.empty())
                harness::emit(curve, a.out, harness::EmitFormat::Csv);
            else
                std::cout << harness::to_csv(curve);
            if (!a.plot.empty())
                harness::emit(curve, a.plot, harness::EmitFormat::Svg);
        }
        catch (const std::exception &e)
        {
            std::cerr << "error: " << e.what() << "\n";
            return exit_io;
        }
        std::fprintf(stderr, "%s: %zu points in %.1f s\n", cfg.name.c_str(), curve.rows.size(), secs);
        return 0;
    }

    int run_aoa(const std::string &name, const std::string &out, const std::string &spectrum, std::uint64_t seed)
    {
        harness::AoaReport report;
        try
        {
            report = harness::aoa_report(name, seed);
        }
        catch (const std::exception &e)
        {
            std::cerr << "config error: " << e.what() << "\n";
            return exit_config;
        }
        if (report.estimate.rank_warning)
            std::cerr << "warning: covariance rank deficient; noise subspace enlarged\n";
        std::fprintf(stderr, "tensor dims [%zu, %zu, %zu, %zu, %zu]\n", report.tensor_dims[0], report.tensor_dims[1],
                     report.tensor_dims[2], report.tensor_dims[3], report.tensor_dims[4]);
        try
        {
            const std::string csv = harness::to_csv(report);
            if (out.empty())
                std::cout << csv;
            else
            {
                std::ofstream os(out);
                if (!(os << csv))
                    throw std::runtime_error("cannot write " + out);
            }
            if (!spectrum.empty())
                aoa::write_spectrum_csv(report.estimate, spectrum);
        }
        catch (const std::exception &e)
        {
            std::cerr << "error: " << e.what() << "\n";
            return exit_io;
        }
        return 0;
    }

    int export_tensor(const std::string &name, const std::string &out, std::uint64_t seed)
    {
        harness::ExperimentConfig cfg;
        try
        {
            cfg = harness::preset(name);
            if (cfg.channel != harness::ChannelKind::SCM)
                throw std::invalid_argument("preset '" + name + "' does not use the SCM channel");
        }
        catch (const std::exception &e)
        {
            std::cerr << "config error: " << e.what() << "\n";
            return exit_config;
        }
        const auto &s = cfg.scm;
        const scm::ChannelTensor t = scm::generate(s.scm, s.antennas, s.links, s.num_time_samples, seed);
        try
        {
            scm::write_tensor(t, out);
            scm::write_metadata_json(t, out + ".json");
        }
        catch (const std::exception &e)
        {
            std::cerr << "error: " << e.what() << "\n";
            return exit_io;
        }
        std::fprintf(stderr, "wrote [%zu, %zu, %zu, %zu, %zu] tensor to %s\n", t.dims[0], t.dims[1], t.dims[2],
                     t.dims[3], t.dims[4], out.c_str());
        return 0;
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Spatial channel model and STBC MIMO-OFDM link simulator"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto *cmd_sim = app.add_subcommand("simulate", "BER-vs-SNR sweep for a preset");
    cmd_sim->add_option("--preset", sim.preset, "preset name (see list-presets)")->required();
    cmd_sim->add_option("--snr", sim.snr, "SNR grid A:B[:step] in dB");
    cmd_sim->add_option("--blocks", sim.blocks, "number of data blocks per SNR point");
    cmd_sim->add_option("--seed", sim.seed, "random seed")->each([&](const std::string &) { sim.seed_set = true; });
    cmd_sim->add_option("--out", sim.out, "CSV output (metadata goes to <out>.json)");
    cmd_sim->add_option("--plot", sim.plot, "SVG plot output");
    cmd_sim->add_flag("--strict-paper-params", sim.strict, "keep the listed 5 us delay even past the cyclic prefix");
    cmd_sim->add_flag("--fast", sim.fast, "stop each point after 500 bit errors");
    cmd_sim->add_option("--config", sim.config, "key=value override file");
    cmd_sim->add_option("--set", sim.overrides, "single key=value override, repeatable");
    cmd_sim->add_option("--workers", sim.workers, "worker threads");

    std::string aoa_preset, aoa_out, aoa_spectrum;
    std::uint64_t aoa_seed = 1;
    auto *cmd_aoa = app.add_subcommand("aoa", "MUSIC angle-of-arrival report for an scm-case preset");
    cmd_aoa->add_option("--preset", aoa_preset, "scm-case1, scm-case2 or scm-case3")->required();
    cmd_aoa->add_option("--out", aoa_out, "CSV output");
    cmd_aoa->add_option("--spectrum", aoa_spectrum, "pseudo-spectrum CSV output");
    cmd_aoa->add_option("--seed", aoa_seed, "random seed");

    std::string scm_preset, scm_out;
    std::uint64_t scm_seed = 1;
    auto *cmd_scm = app.add_subcommand("scm", "export an SCM coefficient tensor");
    cmd_scm->add_option("--preset", scm_preset, "SCM preset")->required();
    cmd_scm->add_option("--out", scm_out, "binary tensor output")->required();
    cmd_scm->add_option("--seed", scm_seed, "random seed");

    auto *cmd_list = app.add_subcommand("list-presets", "print preset names");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }

    if (*cmd_sim)
        return simulate(sim);
    if (*cmd_aoa)
        return run_aoa(aoa_preset, aoa_out, aoa_spectrum, aoa_seed);
    if (*cmd_scm)
        return export_tensor(scm_preset, scm_out, scm_seed);
    if (*cmd_list)
    {
        for (const auto &n : harness::preset_names())
            std::printf("%-28s %s\n", n.c_str(), harness::preset_description(n).c_str());
        return 0;
    }
    return 0;
}
