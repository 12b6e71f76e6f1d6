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

#include "scmlink/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace scmlink
{
    // ----- CMatrix -----------------------------------------------------------

    CMatrix::CMatrix(std::initializer_list<std::initializer_list<cplx>> init)
    {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto &r : init)
        {
            if (r.size() != cols_)
                throw std::invalid_argument("CMatrix: ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    CMatrix CMatrix::identity(std::size_t n)
    {
        CMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }

    CVector CMatrix::column(std::size_t c) const
    {
        CVector out(rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            out[r] = (*this)(r, c);
        return out;
    }

    CMatrix CMatrix::adjoint() const
    {
        CMatrix out(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c)
                out(c, r) = std::conj((*this)(r, c));
        return out;
    }

    CMatrix CMatrix::operator*(const CMatrix &rhs) const
    {
        if (cols_ != rhs.rows_)
            throw std::invalid_argument("CMatrix: inner dimensions do not match");
        CMatrix out(rows_, rhs.cols_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t k = 0; k < cols_; ++k)
            {
                const cplx a = (*this)(r, k);
                for (std::size_t c = 0; c < rhs.cols_; ++c)
                    out(r, c) += a * rhs(k, c);
            }
        return out;
    }

    CMatrix CMatrix::operator-(const CMatrix &rhs) const
    {
        if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
            throw std::invalid_argument("CMatrix: shape mismatch");
        CMatrix out = *this;
        for (std::size_t i = 0; i < data_.size(); ++i)
            out.data_[i] -= rhs.data_[i];
        return out;
    }

    double CMatrix::max_abs() const
    {
        double m = 0.0;
        for (const auto &v : data_)
            m = std::max(m, std::abs(v));
        return m;
    }

    // ----- validation --------------------------------------------------------

    void require_finite(std::span<const cplx> values, std::string_view what)
    {
        for (const auto &v : values)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::invalid_argument(std::string(what) + ": non-finite value");
    }

    void require_finite(double value, std::string_view what)
    {
        if (!std::isfinite(value))
            throw std::invalid_argument(std::string(what) + ": non-finite value");
    }

    // ----- FFT ---------------------------------------------------------------

    bool is_power_of_two(std::size_t n)
    {
        return n != 0 && (n & (n - 1)) == 0;
    }

    void fft_inplace(std::span<cplx> x, FftDirection dir)
    {
        const std::size_t n = x.size();
        if (!is_power_of_two(n))
            throw std::invalid_argument("fft: length " + std::to_string(n) + " is not a power of two");
        require_finite(x, "fft");

        // bit-reversal permutation
        for (std::size_t i = 1, j = 0; i < n; ++i)
        {
            std::size_t bit = n >> 1;
            for (; j & bit; bit >>= 1)
                j ^= bit;
            j ^= bit;
            if (i < j)
                std::swap(x[i], x[j]);
        }

        const double sign = dir == FftDirection::Forward ? -1.0 : 1.0;
        for (std::size_t len = 2; len <= n; len <<= 1)
        {
            const double ang = sign * 2.0 * pi / static_cast<double>(len);
            const std::size_t half = len / 2;
            for (std::size_t k = 0; k < half; ++k)
            {
                // direct evaluation keeps twiddle error at machine precision
                const cplx w = std::polar(1.0, ang * static_cast<double>(k));
                for (std::size_t i = k; i < n; i += len)
                {
                    const cplx u = x[i];
                    const cplx v = x[i + half] * w;
                    x[i] = u + v;
                    x[i + half] = u - v;
                }
            }
        }

        const double scale = 1.0 / std::sqrt(static_cast<double>(n));
        for (auto &v : x)
            v *= scale;
    }

    CVector fft(std::span<const cplx> x, FftDirection dir)
    {
        CVector out(x.begin(), x.end());
        fft_inplace(out, dir);
        return out;
    }

    // ----- Hermitian eigendecomposition --------------------------------------

    EigenDecomposition herm_eig(const CMatrix &a)
    {
        const std::size_t n = a.rows();
        if (n == 0 || a.cols() != n)
            throw std::invalid_argument("herm_eig: matrix must be square and nonempty");
        require_finite(a.data(), "herm_eig");

        const double scale = std::max(a.max_abs(), 1.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = r; c < n; ++c)
                if (std::abs(a(r, c) - std::conj(a(c, r))) > 1e-10 * scale)
                    throw std::invalid_argument("herm_eig: matrix is not Hermitian");

        Eigen::MatrixXcd m(n, n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a(r, c);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("herm_eig: eigen solver did not converge");

        EigenDecomposition out;
        out.values.resize(n);
        out.vectors = CMatrix(n, n);
        for (std::size_t i = 0; i < n; ++i)
        {
            const auto ei = static_cast<Eigen::Index>(i);
            out.values[i] = solver.eigenvalues()(ei);
            for (std::size_t r = 0; r < n; ++r)
                out.vectors(r, i) = solver.eigenvectors()(static_cast<Eigen::Index>(r), ei);
        }
        return out;
    }

    // ----- special functions -------------------------------------------------

    double bessel_j0(double x)
    {
        require_finite(x, "bessel_j0");
        return std::cyl_bessel_j(0.0, std::abs(x));
    }

    // ----- random streams ----------------------------------------------------

    std::uint64_t mix64(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    namespace
    {
        std::uint64_t hash_tag(std::string_view tag)
        {
            // FNV-1a
            std::uint64_t h = 0xCBF29CE484222325ULL;
            for (unsigned char c : tag)
            {
                h ^= c;
                h *= 0x100000001B3ULL;
            }
            return h;
        }

        std::mt19937_64 seeded_engine(std::uint64_t hi, std::uint64_t lo)
        {
            std::seed_seq seq{static_cast<std::uint32_t>(hi >> 32), static_cast<std::uint32_t>(hi),
                              static_cast<std::uint32_t>(lo >> 32), static_cast<std::uint32_t>(lo)};
            return std::mt19937_64(seq);
        }
    } // namespace

    RngStream::RngStream(std::uint64_t seed, std::string_view tag, std::initializer_list<std::uint64_t> indices)
    {
        std::uint64_t hi = mix64(seed ^ 0x5343'4D35'0000'0001ULL);
        std::uint64_t lo = mix64(hash_tag(tag) + hi);
        for (std::uint64_t idx : indices)
        {
            hi = mix64(hi ^ mix64(idx + 0x1234567ULL));
            lo = mix64(lo + hi);
        }
        key_hi_ = hi;
        key_lo_ = lo;
        engine_ = seeded_engine(hi, lo);
    }

    double RngStream::uniform() { return unif_(engine_); }

    double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * unif_(engine_); }

    double RngStream::normal() { return gauss_(engine_); }

    cplx RngStream::complex_normal(double variance)
    {
        const double s = std::sqrt(0.5 * variance);
        const double re = gauss_(engine_);
        const double im = gauss_(engine_);
        return {s * re, s * im};
    }

    double RngStream::exponential(double mean)
    {
        // 1 - u lies in (0, 1], so the log is finite
        return -mean * std::log(1.0 - unif_(engine_));
    }

} // namespace scmlink
