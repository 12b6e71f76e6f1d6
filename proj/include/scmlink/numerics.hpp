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

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scmlink
{
    using cplx = std::complex<double>;
    using CVector = std::vector<cplx>;

    inline constexpr double pi = std::numbers::pi;
    inline constexpr double speed_of_light = 299792458.0;

    // Dense row-major complex matrix. Only what the link chain and MUSIC need.
    class CMatrix
    {
    public:
        CMatrix() = default;
        CMatrix(std::size_t rows, std::size_t cols, cplx fill = {})
            : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
        CMatrix(std::initializer_list<std::initializer_list<cplx>> init);

        static CMatrix identity(std::size_t n);

        std::size_t rows() const { return rows_; }
        std::size_t cols() const { return cols_; }
        bool empty() const { return data_.empty(); }

        cplx &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
        const cplx &operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

        std::span<cplx> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
        std::span<const cplx> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
        CVector column(std::size_t c) const;

        std::span<const cplx> data() const { return data_; }
        std::span<cplx> data() { return data_; }

        CMatrix adjoint() const;
        CMatrix operator*(const CMatrix &rhs) const;
        CMatrix operator-(const CMatrix &rhs) const;

        // Largest absolute entry; the norm used for tolerance checks.
        double max_abs() const;

    private:
        std::size_t rows_ = 0;
        std::size_t cols_ = 0;
        CVector data_;
    };

    // ----- validation --------------------------------------------------------

    // Throws std::invalid_argument naming `what` if any value is NaN or Inf.
    void require_finite(std::span<const cplx> values, std::string_view what);
    void require_finite(double value, std::string_view what);

    // ----- FFT ---------------------------------------------------------------

    enum class FftDirection
    {
        Forward,
        Inverse
    };

    bool is_power_of_two(std::size_t n);

    // Unitary radix-2 DFT (1/sqrt(N) in both directions). Length must be a power of two.
    void fft_inplace(std::span<cplx> x, FftDirection dir);
    CVector fft(std::span<const cplx> x, FftDirection dir = FftDirection::Forward);
    inline CVector ifft(std::span<const cplx> x) { return fft(x, FftDirection::Inverse); }

    // ----- Hermitian eigendecomposition --------------------------------------

    struct EigenDecomposition
    {
        std::vector<double> values; // ascending
        CMatrix vectors;            // column i belongs to values[i]
    };

    EigenDecomposition herm_eig(const CMatrix &a);

    // ----- special functions -------------------------------------------------

    double bessel_j0(double x);

    // Gaussian tail probability Q(x) = P(N(0,1) > x).
    inline double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

    inline double db_to_linear(double db) { return std::pow(10.0, 0.1 * db); }
    inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

    // ----- random streams ----------------------------------------------------

    // Seeded random stream whose key is derived from (seed, domain tag, indices).
    // Two streams with the same derivation produce the same sequence; streams are
    // value types and can be copied to branch.
    class RngStream
    {
    public:
        RngStream(std::uint64_t seed, std::string_view tag, std::initializer_list<std::uint64_t> indices = {});

        std::uint64_t key_hi() const { return key_hi_; }
        std::uint64_t key_lo() const { return key_lo_; }

        double uniform();                       // [0, 1)
        double uniform(double lo, double hi);   // [lo, hi)
        double normal();                        // N(0, 1)
        cplx complex_normal(double variance);   // CN(0, variance)
        std::uint64_t next_u64() { return engine_(); }
        int bit() { return static_cast<int>(engine_() >> 63); }
        double exponential(double mean);

    private:
        std::uint64_t key_hi_;
        std::uint64_t key_lo_;
        std::mt19937_64 engine_;
        std::normal_distribution<double> gauss_{0.0, 1.0};
        std::uniform_real_distribution<double> unif_{0.0, 1.0};
    };

    // SplitMix64 finalizer, used for key derivation and content hashes.
    std::uint64_t mix64(std::uint64_t x);

} // namespace scmlink
