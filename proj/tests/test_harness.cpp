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

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace scmlink;
using namespace scmlink::harness;

namespace
{
    ExperimentConfig small(std::string_view name, std::vector<double> grid, std::size_t blocks)
    {
        ExperimentConfig c = preset(name);
        c.snr_grid_db = std::move(grid);
        c.num_blocks = blocks;
        return c;
    }

    // SNR (linear) at which uncoded BPSK has error rate p, by bisection on Q.
    double bpsk_snr_for(double p)
    {
        double lo = 1e-4, hi = 100.0;
        for (int i = 0; i < 200; ++i)
        {
            const double mid = std::sqrt(lo * hi);
            (q_function(std::sqrt(2.0 * mid)) > p ? lo : hi) = mid;
        }
        return std::sqrt(lo * hi);
    }
} // namespace

TEST_CASE("noise-free limit gives zero errors")
{
    for (const char *name : {"fig4.4-2path-interleaved", "fig4.6-selective"})
    {
        CAPTURE(name);
        const BerCurve c = run_ber_sweep(small(name, {60.0}, 100));
        REQUIRE(c.rows.size() == 1);
        CHECK(c.rows[0].bit_errors == 0);
        CHECK(c.rows[0].total_bits == 99 * preset(name).info_bits_per_block());
    }
}

TEST_CASE("uncoded BPSK over AWGN follows the Q-function")
{
    const BerCurve c = run_ber_sweep(small("awgn-bpsk", {0, 2, 4, 6}, 1000));
    for (const auto &r : c.rows)
    {
        CAPTURE(r.snr_db);
        REQUIRE(r.bit_errors >= 100);
        const double want = q_function(std::sqrt(2.0 * db_to_linear(r.snr_db)));
        CHECK(std::abs(r.ber / want - 1.0) < 0.1);
    }
}

TEST_CASE("noise calibration within 0.2 dB")
{
    ExperimentConfig cfg = preset("awgn-bpsk");
    CHECK(noise_variance(cfg, 10.0) == doctest::Approx(0.1));
    cfg.snr_per_receive_antenna = false;
    cfg.rx_antennas = 2;
    CHECK(noise_variance(cfg, 10.0) == doctest::Approx(0.2));

    // received SNR implied by the measured error rate
    const BerCurve c = run_ber_sweep(small("awgn-bpsk", {1.0, 3.0}, 1000));
    for (const auto &r : c.rows)
    {
        CAPTURE(r.snr_db);
        REQUIRE(r.total_bits >= 100000);
        CHECK(std::abs(linear_to_db(bpsk_snr_for(r.ber)) - r.snr_db) < 0.2);
    }
}

TEST_CASE("results do not depend on the worker count")
{
    for (const char *name : {"fig4.4-2path-interleaved", "fig4.6-selective"})
    {
        CAPTURE(name);
        ExperimentConfig a = small(name, {2.0, 5.0}, 40);
        ExperimentConfig b = a;
        b.workers = 3;
        const BerCurve ca = run_ber_sweep(a);
        const BerCurve cb = run_ber_sweep(b);
        CHECK(to_csv(ca) == to_csv(cb));
        CHECK(to_csv(ca) == to_csv(run_ber_sweep(a)));
        CHECK(ca.rows[0].bit_errors > 0);
    }
}

TEST_CASE("fast mode stops early with the error target reached")
{
    ExperimentConfig c = small("awgn-bpsk", {0.0}, 1000);
    c.fast = true;
    const BerCurve r = run_ber_sweep(c);
    CHECK(r.rows[0].bit_errors >= c.fast_error_target);
    CHECK(r.rows[0].total_bits < 999 * c.info_bits_per_block());
}

TEST_CASE("ber is non-increasing in SNR")
{
    const BerCurve c = run_ber_sweep(small("fig4.4-2path-interleaved", {0, 2, 4, 6}, 60));
    for (std::size_t i = 1; i < c.rows.size(); ++i)
        if (c.rows[i].bit_errors >= 100)
            CHECK(c.rows[i].ber <= c.rows[i - 1].ber);
}

TEST_CASE("coding and interleaving each help")
{
    const double snr = 8.0;
    const double uncoded = run_ber_sweep(small("fig4.5-uncoded", {snr}, 200)).rows[0].ber;
    const double viterbi = run_ber_sweep(small("fig4.5-viterbi", {snr}, 200)).rows[0].ber;
    const double both = run_ber_sweep(small("fig4.5-2x2", {snr + 3.0}, 200)).rows[0].ber;
    CHECK(uncoded > viterbi);
    CHECK(viterbi > both);
}

TEST_CASE("more receive antennas never hurt")
{
    const BerCurve a = run_ber_sweep(small("fig4.5-2x2", {4.0, 6.0}, 100));
    const BerCurve b = run_ber_sweep(small("fig4.5-2x4", {4.0, 6.0}, 100));
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        if (b.rows[i].bit_errors >= 100)
            CHECK(b.rows[i].ber <= a.rows[i].ber);
}

TEST_CASE("metadata records the run")
{
    const BerCurve c = run_ber_sweep(small("fig4.4-2path", {3.0}, 10));
    CHECK(c.metadata.at("seed") == "1");
    CHECK(c.metadata.at("config.name") == "fig4.4-2path");
    CHECK(c.metadata.contains("snr_definition"));
    CHECK(c.metadata.at("content_hash").size() == 16);
    // the listed 5 us delay is clamped to the cyclic prefix by default
    CHECK(c.warnings.size() >= 1);
}

TEST_CASE("strict mode keeps the listed delay")
{
    ExperimentConfig c = small("fig4.4-2path", {3.0}, 4);
    CHECK(c.effective_max_delay_s() == doctest::Approx(2e-6));
    c.strict_paper_params = true;
    CHECK(c.effective_max_delay_s() == doctest::Approx(5e-6));
    const BerCurve r = run_ber_sweep(c);
    bool isi = false;
    for (const auto &w : r.warnings)
        isi = isi || w.find("cyclic prefix") != std::string::npos;
    CHECK(isi);
}

TEST_CASE("CSV emission and parsing")
{
    BerCurve empty;
    CHECK(to_csv(empty) == "snr_db,bit_errors,total_bits,ber\n");

    BerCurve c;
    c.rows.push_back({1.5, 3, 2048, 3.0 / 2048.0});
    c.rows.push_back({2.0, 0, 2048, 0.0});
    c.rows.push_back({0.1, 7, 333, 7.0 / 333.0});
    const BerCurve back = parse_csv(to_csv(c));
    REQUIRE(back.rows.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
    {
        CHECK(back.rows[i].snr_db == c.rows[i].snr_db);
        CHECK(back.rows[i].bit_errors == c.rows[i].bit_errors);
        CHECK(back.rows[i].total_bits == c.rows[i].total_bits);
        CHECK(back.rows[i].ber == c.rows[i].ber);
    }
    CHECK_THROWS_AS(parse_csv("snr,ber\n"), std::invalid_argument);

    const auto dir = std::filesystem::temp_directory_path();
    emit(c, dir / "scmlink_emit.csv", EmitFormat::Csv);
    emit(c, dir / "scmlink_emit.svg", EmitFormat::Svg);
    CHECK(std::filesystem::exists(dir / "scmlink_emit.csv.json"));
    std::ifstream svg(dir / "scmlink_emit.svg");
    std::string first;
    std::getline(svg, first);
    CHECK(first.starts_with("<svg"));
    CHECK_THROWS_AS(emit(c, dir / "no-such-dir" / "x.csv", EmitFormat::Csv), std::runtime_error);
}

TEST_CASE("snr_at_ber interpolates in log domain")
{
    BerCurve c;
    c.rows = {{0.0, 100, 1000, 1e-1}, {10.0, 1, 1000, 1e-3}};
    CHECK(*c.snr_at_ber(1e-2) == doctest::Approx(5.0));
    CHECK_FALSE(c.snr_at_ber(1e-5).has_value());
    CHECK(c.at_snr(10.0) != nullptr);
    CHECK(c.at_snr(3.0) == nullptr);
}

TEST_CASE("presets")
{
    CHECK_THROWS_WITH_AS(preset("nonsense"), doctest::Contains("scm-case2"), std::invalid_argument);

    const ExperimentConfig c2 = preset("scm-case2");
    CHECK(c2.scm.links.num_links() == 3);
    CHECK(c2.scm.scm.num_paths == 3);
    CHECK(c2.scm.scm.num_ap_elements == 8);
    CHECK(c2.scm.scm.num_user_elements == 2);
    CHECK(c2.scm.scm.option == scm::ScmOption::LOS);
    CHECK(c2.scm.num_time_samples == 10);
    for (std::size_t n = 0; n < 3; ++n)
    {
        CHECK(c2.scm.links.user_velocity_mps[n] == 5.0);
        CHECK(c2.scm.links.user_height_m[n] == 1.5);
        CHECK(c2.scm.links.ap_height_m[n] == 32.0);
    }

    const ExperimentConfig f = preset("fig4.4-2path");
    CHECK(f.tx_antennas == 2);
    CHECK(f.rx_antennas == 2);
    CHECK(f.ofdm.num_subcarriers == 64);
    CHECK(f.ofdm.cp_length == 10);
    CHECK(f.coded);
    CHECK(f.code.constraint_length == 3);
    CHECK(f.num_blocks == 20000);
    CHECK(f.snr_grid_db.front() == 1.0);
    CHECK(f.snr_grid_db.back() == 35.0);

    for (const auto &name : preset_names())
    {
        CAPTURE(name);
        CHECK_NOTHROW(preset(name).validate());
        CHECK_FALSE(preset_description(name).empty());
    }
    CHECK(preset("fig4.8-doppler-141.6").doppler_hz() == doctest::Approx(141.6));
}

TEST_CASE("key=value overrides and config files")
{
    ExperimentConfig c = preset("fig4.4-2path");
    apply_override(c, "rx_antennas", "4");
    apply_override(c, "modulation", "16qam");
    apply_override(c, "snr_grid_db", "0:4:2");
    apply_override(c, "tdl.doppler_hz", "10");
    CHECK(c.rx_antennas == 4);
    CHECK(c.modulation.order == 16);
    CHECK(c.snr_grid_db == std::vector<double>{0.0, 2.0, 4.0});
    CHECK(c.tdl.doppler_hz == 10.0);
    CHECK_THROWS_WITH_AS(apply_override(c, "no.such.key", "1"), doctest::Contains("no.such.key"),
                         std::invalid_argument);
    CHECK_THROWS_AS(apply_override(c, "rx_antennas", "many"), std::invalid_argument);

    // every key the config exposes can be written back
    ExperimentConfig d = preset("fig4.6-selective");
    for (const auto &[k, v] : to_key_values(d))
    {
        CAPTURE(k);
        CHECK_NOTHROW(apply_override(d, k, v));
    }
    CHECK(to_key_values(d) == to_key_values(preset("fig4.6-selective")));

    const auto path = std::filesystem::temp_directory_path() / "scmlink_override.cfg";
    {
        std::ofstream os(path);
        os << "# test\n\nseed = 9\nfast=true\nbogus=1\n";
    }
    ExperimentConfig e = preset("fig4.4-2path");
    CHECK_THROWS_WITH_AS(apply_config_file(e, path), doctest::Contains(":5"), std::invalid_argument);
    {
        std::ofstream os(path);
        os << "# test\n\nseed = 9\nfast=true\n";
    }
    apply_config_file(e, path);
    CHECK(e.seed == 9);
    CHECK(e.fast);
    std::filesystem::remove(path);

    CHECK(parse_snr_range("1:3") == std::vector<double>{1.0, 2.0, 3.0});
    CHECK_THROWS_AS(parse_snr_range("5:1"), std::invalid_argument);
}

TEST_CASE("invalid configurations are rejected")
{
    ExperimentConfig c = preset("fig4.4-2path");
    c.tx_antennas = 3;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = preset("fig4.4-2path");
    c.snr_grid_db = {3.0, 1.0};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = preset("fig4.4-2path");
    c.num_blocks = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("AoA report for the case presets")
{
    const AoaReport r2 = aoa_report("scm-case2");
    REQUIRE(r2.rows.size() == 3);
    CHECK(r2.tensor_dims == std::array<std::size_t, 5>{8, 2, 3, 3, 10});
    CHECK(r2.rows[0].distance_m == 349.2884);
    const AoaReport r1 = aoa_report("scm-case1");
    CHECK(r1.rows.size() == 1);
    CHECK(to_csv(r1).starts_with("user,aoa_estimate_deg,configured_aoa_deg,distance_m,direction_deg\n"));
    CHECK_THROWS_AS(aoa_report("fig4.4-2path"), std::invalid_argument);
}
