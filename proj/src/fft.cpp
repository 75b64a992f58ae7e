#include "epw/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace epw {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

int signed_freq(std::size_t k, std::size_t n) {
    return k < n / 2 ? static_cast<int>(k) : static_cast<int>(k) - static_cast<int>(n);
}

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (!is_power_of_two(n)) throw std::invalid_argument("fft_inplace: size must be a power of two");
    if (n == 1) return;

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (auto& z : a) z *= inv_n;
    }
}

namespace {

// Applies the 1D transform along both axes of an n x n array stored row-major.
void fft2_inplace(std::vector<std::complex<double>>& a, std::size_t n, bool inverse) {
    std::vector<std::complex<double>> line(n);
    for (std::size_t i = 0; i < n; ++i) {  // rows: fixed i, contiguous j
        for (std::size_t j = 0; j < n; ++j) line[j] = a[i * n + j];
        fft_inplace(line, inverse);
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] = line[j];
    }
    for (std::size_t j = 0; j < n; ++j) {  // columns: fixed j, strided i
        for (std::size_t i = 0; i < n; ++i) line[i] = a[i * n + j];
        fft_inplace(line, inverse);
        for (std::size_t i = 0; i < n; ++i) a[i * n + j] = line[i];
    }
}

}  // namespace

Spectrum2D forward_fft2(const ScalarField2D& field) {
    field.validate();
    if (field.nx != field.ny || !is_power_of_two(field.nx))
        throw std::invalid_argument("forward_fft2: field must be n x n with n a power of two");
    const std::size_t n = field.nx;
    Spectrum2D s(n);
    for (std::size_t i = 0; i < n * n; ++i) s.coeff[i] = field.values[i];
    fft2_inplace(s.coeff, n, false);
    return s;
}

bool is_hermitian(const Spectrum2D& s, double rtol) {
    if (!is_power_of_two(s.n) || s.coeff.size() != s.n * s.n) return false;
    const std::size_t n = s.n;
    double max_abs = 0.0;
    for (const auto& c : s.coeff) max_abs = std::max(max_abs, std::abs(c));
    const double tol = rtol * std::max(max_abs, 1e-300);
    for (std::size_t kx = 0; kx < n; ++kx) {
        const std::size_t mx = (n - kx) % n;
        for (std::size_t ky = 0; ky < n; ++ky) {
            const std::size_t my = (n - ky) % n;
            if (std::abs(s.coeff[kx * n + ky] - std::conj(s.coeff[mx * n + my])) > tol) return false;
        }
    }
    return true;
}

void hermitian_symmetrize(Spectrum2D& s) {
    if (!is_power_of_two(s.n) || s.coeff.size() != s.n * s.n)
        throw std::invalid_argument("hermitian_symmetrize: malformed spectrum");
    const std::size_t n = s.n;
    Spectrum2D out(n);
    for (std::size_t kx = 0; kx < n; ++kx) {
        const std::size_t mx = (n - kx) % n;
        for (std::size_t ky = 0; ky < n; ++ky) {
            const std::size_t my = (n - ky) % n;
            out.coeff[kx * n + ky] =
                0.5 * (s.coeff[kx * n + ky] + std::conj(s.coeff[mx * n + my]));
        }
    }
    s.coeff = std::move(out.coeff);
    s.hermitian = true;
}

ScalarField2D inverse_fft2(const Spectrum2D& spectrum) {
    if (!is_power_of_two(spectrum.n))
        throw std::invalid_argument("inverse_fft2: size must be a power of two");
    if (spectrum.coeff.size() != spectrum.n * spectrum.n)
        throw std::invalid_argument("inverse_fft2: malformed spectrum");
    if (!is_hermitian(spectrum))
        throw std::invalid_argument("inverse_fft2: spectrum is not Hermitian-symmetric");
    const std::size_t n = spectrum.n;
    std::vector<std::complex<double>> a = spectrum.coeff;
    fft2_inplace(a, n, true);
    ScalarField2D out = ScalarField2D::domain_grid(n, n);
    for (std::size_t i = 0; i < n * n; ++i) out.values[i] = a[i].real();
    return out;
}

}  // namespace epw
