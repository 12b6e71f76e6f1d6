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
#include "scmlink/scm_channel.hpp"

#include <filesystem>
#include <vector>

namespace scmlink::aoa
{
    struct ArraySnapshotSet
    {
        CMatrix snapshots; // [elements x snapshots]
        double element_spacing_wavelengths = 0.5;
    };

    struct AzimuthGrid
    {
        double start_deg = -90.0;
        double stop_deg = 90.0;
        double step_deg = 0.1;

        std::vector<double> angles() const;
    };

    struct Peak
    {
        double angle_deg;
        double value;
    };

    struct AoaEstimate
    {
        std::vector<double> angles_deg;
        std::vector<double> spectrum;
        std::vector<Peak> peaks; // descending by value
        bool rank_warning = false;
    };

    inline constexpr double min_peak_separation_deg = 2.0;

    // exp(j 2 pi spacing l sin(angle)), l = 0..num_elements-1
    CVector steering_vector(double angle_deg, std::size_t num_elements, double spacing_wavelengths);

    AoaEstimate music_estimate(const ArraySnapshotSet &snaps, std::size_t num_sources, const AzimuthGrid &grid = {});

    // AP-side snapshot per (link, path, time sample): the L-vector across AP
    // elements averaged over user elements.
    ArraySnapshotSet snapshots_from_tensor(const scm::ChannelTensor &tensor, double element_spacing_wavelengths);

    // CSV with header angle_deg,value.
    void write_spectrum_csv(const AoaEstimate &est, const std::filesystem::path &path);

} // namespace scmlink::aoa
