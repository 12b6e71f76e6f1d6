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

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace scmlink::harness
{
    namespace
    {
        void write_text(const std::filesystem::path &path, const std::string &text)
        {
            std::ofstream os(path, std::ios::binary);
            if (!os)
                throw std::runtime_error("cannot open " + path.string() + " for writing");
            os << text;
            os.flush();
            if (!os)
                throw std::runtime_error("write failed for " + path.string());
        }

        std::string num(double v, const char *f = "%.17g")
        {
            char buf[48];
            std::snprintf(buf, sizeof buf, f, v);
            return buf;
        }

        std::string xml_escape(const std::string &s)
        {
            std::string out;
            for (char c : s)
            {
                switch (c)
                {
                case '&': out += "&amp;"; break;
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                case '"': out += "&quot;"; break;
                default: out += c;
                }
            }
            return out;
        }
    } // namespace

    std::string to_csv(const BerCurve &curve)
    {
        std::string out = "snr_db,bit_errors,total_bits,ber\n";
        for (const auto &r : curve.rows)
            out += num(r.snr_db) + "," + std::to_string(r.bit_errors) + "," + std::to_string(r.total_bits) + "," +
                   num(r.ber, "%.10e") + "\n";
        return out;
    }

    BerCurve parse_csv(std::string_view text)
    {
        std::istringstream in{std::string(text)};
        std::string line;
        if (!std::getline(in, line) || line != "snr_db,bit_errors,total_bits,ber")
            throw std::invalid_argument("parse_csv: missing header");
        BerCurve curve;
        while (std::getline(in, line))
        {
            if (line.empty())
                continue;
            BerPoint p{};
            unsigned long long e = 0, t = 0;
            double ber = 0.0;
            if (std::sscanf(line.c_str(), "%lf,%llu,%llu,%lf", &p.snr_db, &e, &t, &ber) != 4)
                throw std::invalid_argument("parse_csv: malformed row '" + line + "'");
            p.bit_errors = e;
            p.total_bits = t;
            // recomputed so a round trip is exact
            p.ber = t ? static_cast<double>(e) / static_cast<double>(t) : 0.0;
            curve.rows.push_back(p);
        }
        return curve;
    }

    void emit(const BerCurve &curve, const std::filesystem::path &path, EmitFormat format)
    {
        if (format == EmitFormat::Svg)
        {
            const std::string title = curve.metadata.contains("config.name") ? curve.metadata.at("config.name") : "BER";
            const std::vector<std::string> labels{title};
            emit_svg(std::span(&curve, 1), labels, path, title);
            return;
        }
        write_text(path, to_csv(curve));
        nlohmann::ordered_json meta;
        for (const auto &[k, v] : curve.metadata)
            meta[k] = v;
        meta["warning_list"] = curve.warnings;
        write_text(std::filesystem::path(path.string() + ".json"), meta.dump(2) + "\n");
    }

    void emit_svg(std::span<const BerCurve> curves, std::span<const std::string> labels,
                  const std::filesystem::path &path, const std::string &title)
    {
        constexpr double W = 720, H = 480, left = 70, right = 170, top = 40, bottom = 50;
        const double pw = W - left - right, ph = H - top - bottom;

        double xmin = 1e300, xmax = -1e300, ymin = 1.0;
        for (const auto &c : curves)
            for (const auto &r : c.rows)
            {
                xmin = std::min(xmin, r.snr_db);
                xmax = std::max(xmax, r.snr_db);
                if (r.ber > 0.0)
                    ymin = std::min(ymin, r.ber);
            }
        if (xmin > xmax)
        {
            xmin = 0.0;
            xmax = 1.0;
        }
        if (xmax == xmin)
            xmax = xmin + 1.0;
        const int dec_lo = static_cast<int>(std::floor(std::log10(ymin)));
        const int decades = std::max(1, -dec_lo);
        const auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
        const auto py = [&](double y) { return top + (-std::log10(y)) / decades * ph; };

        std::ostringstream s;
        s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
        s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        s << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"15\">"
          << xml_escape(title) << "</text>\n";
        for (int d = 0; d <= decades; ++d)
        {
            const double y = top + d * ph / decades;
            s << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + pw << "\" y2=\"" << y
              << "\" stroke=\"#ddd\"/>\n";
            s << "<text x=\"" << left - 6 << "\" y=\"" << y + 4
              << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e-" << d << "</text>\n";
        }
        for (int i = 0; i <= 5; ++i)
        {
            const double xv = xmin + (xmax - xmin) * i / 5.0;
            const double x = px(xv);
            s << "<line x1=\"" << x << "\" y1=\"" << top << "\" x2=\"" << x << "\" y2=\"" << top + ph
              << "\" stroke=\"#eee\"/>\n";
            s << "<text x=\"" << x << "\" y=\"" << top + ph + 16
              << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(xv, "%.1f")
              << "</text>\n";
        }
        s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
          << "\" fill=\"none\" stroke=\"black\"/>\n";
        s << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 12
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">SNR (dB)</text>\n";
        s << "<text x=\"16\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 16 " << top + ph / 2
          << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">BER</text>\n";

        static const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
        for (std::size_t c = 0; c < curves.size(); ++c)
        {
            const char *color = colors[c % std::size(colors)];
            std::string pts;
            for (const auto &r : curves[c].rows)
                if (r.ber > 0.0)
                    pts += num(px(r.snr_db), "%.2f") + "," + num(py(r.ber), "%.2f") + " ";
            if (!pts.empty())
                s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << pts
                  << "\"/>\n";
            const double ly = top + 16 + 18.0 * static_cast<double>(c);
            s << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32 << "\" y2=\""
              << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
            s << "<text x=\"" << left + pw + 36 << "\" y=\"" << ly + 4
              << "\" font-family=\"sans-serif\" font-size=\"11\">"
              << xml_escape(c < labels.size() ? labels[c] : "curve") << "</text>\n";
        }
        s << "</svg>\n";
        write_text(path, s.str());
    }

    // ----- AoA report --------------------------------------------------------

    AoaReport aoa_report(std::string_view preset_name, std::uint64_t seed)
    {
        const ExperimentConfig cfg = preset(preset_name);
        if (cfg.channel != ChannelKind::SCM || !preset_name.starts_with("scm-case"))
            throw std::invalid_argument("aoa_report: '" + std::string(preset_name) + "' is not an scm-case preset");
        const ScmSetup &s = cfg.scm;

        const scm::ChannelTensor tensor = scm::generate(s.scm, s.antennas, s.links, s.num_time_samples, seed);
        const double spacing = s.antennas.ap_element_positions.size() > 1
                                   ? s.antennas.ap_element_positions[1] - s.antennas.ap_element_positions[0]
                                   : 0.5;
        const aoa::ArraySnapshotSet snaps = aoa::snapshots_from_tensor(tensor, spacing);

        AoaReport report;
        report.tensor_dims = tensor.dims;
        const std::size_t users = s.links.num_links();
        report.estimate = aoa::music_estimate(snaps, users);

        // pair each user with the closest unused peak
        std::vector<bool> used(report.estimate.peaks.size(), false);
        for (std::size_t n = 0; n < users; ++n)
        {
            const double want = s.links.theta_ap_deg[n];
            std::size_t best = report.estimate.peaks.size();
            for (std::size_t p = 0; p < report.estimate.peaks.size(); ++p)
                if (!used[p] && (best == report.estimate.peaks.size() ||
                                 std::abs(report.estimate.peaks[p].angle_deg - want) <
                                     std::abs(report.estimate.peaks[best].angle_deg - want)))
                    best = p;
            double est = std::nan("");
            if (best < report.estimate.peaks.size())
            {
                used[best] = true;
                est = report.estimate.peaks[best].angle_deg;
            }
            report.rows.push_back({s.links.user_ids[n], est, want, s.links.ap_user_distance_m[n],
                                   s.links.user_direction_deg[n]});
        }
        return report;
    }

    std::string to_csv(const AoaReport &report)
    {
        std::string out = "user,aoa_estimate_deg,configured_aoa_deg,distance_m,direction_deg\n";
        for (const auto &r : report.rows)
            out += std::to_string(r.user) + "," + num(r.aoa_estimate_deg, "%.1f") + "," +
                   num(r.configured_aoa_deg, "%.4f") + "," + num(r.distance_m, "%.4f") + "," +
                   num(r.direction_deg, "%.4f") + "\n";
        return out;
    }

} // namespace scmlink::harness
