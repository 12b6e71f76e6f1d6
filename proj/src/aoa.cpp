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

#include "scmlink/aoa.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace scmlink::aoa
{
    std::vector<double> AzimuthGrid::angles() const
    {
        if (!(step_deg > 0.0) || !(stop_deg >= start_deg))
            throw std::invalid_argument("AzimuthGrid: need step > 0 and stop >= start");
        const auto n = static_cast<std::size_t>(std::floor((stop_deg - start_deg) / step_deg + 1e-9)) + 1;
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = start_deg + step_deg * static_cast<double>(i);
        return out;
    }

    CVector steering_vector(double angle_deg, std::size_t num_elements, double spacing_wavelengths)
    {
        if (num_elements < 1)
            throw std::invalid_argument("steering_vector: need at least one element");
        const double s = std::sin(angle_deg * pi / 180.0);
        CVector a(num_elements);
        for (std::size_t l = 0; l < num_elements; ++l)
            a[l] = std::polar(1.0, 2.0 * pi * spacing_wavelengths * static_cast<double>(l) * s);
        return a;
    }

    AoaEstimate music_estimate(const ArraySnapshotSet &snaps, std::size_t num_sources, const AzimuthGrid &grid)
    {
        const CMatrix &x = snaps.snapshots;
        const std::size_t L = x.rows();
        const std::size_t T = x.cols();
        if (L < 2)
            throw std::invalid_argument("music_estimate: need at least two array elements");
        if (num_sources < 1 || num_sources >= L)
            throw std::invalid_argument("music_estimate: num_sources must be in [1, elements - 1]");
        if (T < 1)
            throw std::invalid_argument("music_estimate: no snapshots");
        require_finite(x.data(), "music_estimate");

        // R = X X^H / T
        CMatrix r = x * x.adjoint();
        for (auto &v : r.data())
            v /= static_cast<double>(T);
        // clean rounding asymmetry before the Hermitian check
        for (std::size_t i = 0; i < L; ++i)
        {
            r(i, i) = r(i, i).real();
            for (std::size_t j = i + 1; j < L; ++j)
                r(j, i) = std::conj(r(i, j));
        }

        const EigenDecomposition eig = herm_eig(r);
        const double lambda_max = std::max(eig.values.back(), 0.0);

        AoaEstimate est;
        std::size_t noise_dim = L - num_sources;
        std::size_t tiny = 0;
        for (double v : eig.values)
            if (v <= 1e-12 * lambda_max)
                ++tiny;
        if (tiny > noise_dim)
        {
            noise_dim = tiny;
            est.rank_warning = true;
        }
        if (noise_dim >= L)
        {
            noise_dim = L - 1;
            est.rank_warning = true;
        }

        est.angles_deg = grid.angles();
        est.spectrum.resize(est.angles_deg.size());
        const double floor = 1e-300;
        for (std::size_t g = 0; g < est.angles_deg.size(); ++g)
        {
            const CVector a = steering_vector(est.angles_deg[g], L, snaps.element_spacing_wavelengths);
            double denom = 0.0;
            for (std::size_t c = 0; c < noise_dim; ++c)
            {
                cplx proj = 0.0;
                for (std::size_t l = 0; l < L; ++l)
                    proj += std::conj(eig.vectors(l, c)) * a[l];
                denom += std::norm(proj);
            }
            est.spectrum[g] = 1.0 / std::max(denom, floor);
        }

        // local maxima, strongest first, at least min_peak_separation_deg apart
        std::vector<std::size_t> candidates;
        const std::size_t n = est.spectrum.size();
        for (std::size_t g = 0; g < n; ++g)
        {
            const double v = est.spectrum[g];
            const bool left_ok = g == 0 || v >= est.spectrum[g - 1];
            const bool right_ok = g + 1 == n || v > est.spectrum[g + 1];
            if (left_ok && right_ok)
                candidates.push_back(g);
        }
        std::stable_sort(candidates.begin(), candidates.end(),
                         [&](std::size_t a, std::size_t b) { return est.spectrum[a] > est.spectrum[b]; });
        for (std::size_t g : candidates)
        {
            if (est.peaks.size() == num_sources)
                break;
            const double ang = est.angles_deg[g];
            const bool separated = std::all_of(est.peaks.begin(), est.peaks.end(), [&](const Peak &p) {
                return std::abs(p.angle_deg - ang) >= min_peak_separation_deg;
            });
            if (separated)
                est.peaks.push_back({ang, est.spectrum[g]});
        }
        return est;
    }

    ArraySnapshotSet snapshots_from_tensor(const scm::ChannelTensor &tensor, double element_spacing_wavelengths)
    {
        const auto &d = tensor.dims;
        const std::size_t L = d[0], M = d[1], N = d[2], K = d[3], S = d[4];
        ArraySnapshotSet out;
        out.element_spacing_wavelengths = element_spacing_wavelengths;
        out.snapshots = CMatrix(L, N * K * S);
        std::size_t col = 0;
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t k = 0; k < K; ++k)
                for (std::size_t s = 0; s < S; ++s, ++col)
                    for (std::size_t l = 0; l < L; ++l)
                    {
                        cplx acc = 0.0;
                        for (std::size_t m = 0; m < M; ++m)
                            acc += tensor.at(l, m, n, k, s);
                        out.snapshots(l, col) = acc / static_cast<double>(M);
                    }
        return out;
    }

    void write_spectrum_csv(const AoaEstimate &est, const std::filesystem::path &path)
    {
        std::ofstream os(path);
        if (!os)
            throw std::runtime_error("cannot open " + path.string() + " for writing");
        os << "angle_deg,value\n";
        char buf[96];
        for (std::size_t i = 0; i < est.angles_deg.size(); ++i)
        {
            std::snprintf(buf, sizeof buf, "%.4f,%.10e\n", est.angles_deg[i], est.spectrum[i]);
            os << buf;
        }
        if (!os)
            throw std::runtime_error("write failed for " + path.string());
    }

} // namespace scmlink::aoa
