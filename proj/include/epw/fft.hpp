#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "epw/field.hpp"

namespace epw {

/// Square complex spectrum in FFT index order: coeff[kx*n + ky], where index k
/// carries the signed frequency k < n/2 ? k : k - n, in cycles per domain
/// length. n must be a power of two. `hermitian` records that the coefficients
/// are intended to invert to a real field; inverse_fft2 verifies it either way.
struct Spectrum2D {
    std::size_t n = 0;
    std::vector<std::complex<double>> coeff;
    bool hermitian = false;

    explicit Spectrum2D(std::size_t n_ = 0) : n(n_), coeff(n_ * n_) {}

    std::complex<double>& at_index(std::size_t kx, std::size_t ky) { return coeff[kx * n + ky]; }
    const std::complex<double>& at_index(std::size_t kx, std::size_t ky) const {
        return coeff[kx * n + ky];
    }

    /// Access by signed frequency in [-n/2, n/2).
    std::complex<double>& at_freq(int fx, int fy) {
        return coeff[wrap(fx) * n + wrap(fy)];
    }
    const std::complex<double>& at_freq(int fx, int fy) const {
        return coeff[wrap(fx) * n + wrap(fy)];
    }

    std::size_t wrap(int f) const {
        const int m = static_cast<int>(n);
        return static_cast<std::size_t>(((f % m) + m) % m);
    }
};

/// Signed frequency of FFT bin k for transform size n.
int signed_freq(std::size_t k, std::size_t n);

bool is_power_of_two(std::size_t n);

/// In-place radix-2 Cooley-Tukey transform; size must be a power of two.
/// Forward uses exp(-2*pi*i*k*t/n) and is unnormalized; inverse uses the
/// conjugate kernel and multiplies by 1/n, so inverse(forward(x)) == x.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

/// Unnormalized forward 2D transform of an n x n field (n a power of two).
/// Under this convention sum|values|^2 == sum|coeff|^2 / n^2 (Parseval).
Spectrum2D forward_fft2(const ScalarField2D& field);

/// Inverse 2D transform carrying the full 1/n^2 factor. The spectrum must be
/// Hermitian-symmetric (checked; std::invalid_argument otherwise) so the
/// output is real. Samples are laid on the standard domain grid, spacing 4/(n-1).
ScalarField2D inverse_fft2(const Spectrum2D& spectrum);

/// True when coeff(-kx, -ky) == conj(coeff(kx, ky)) for all bins, within
/// rtol * max|coeff|.
bool is_hermitian(const Spectrum2D& spectrum, double rtol = 1e-9);

/// Replaces c(k) by (c(k) + conj(c(-k))) / 2, the projection onto the
/// Hermitian subspace, and sets the flag. Bins that are zero at both k and -k
/// stay exactly zero.
void hermitian_symmetrize(Spectrum2D& spectrum);

}  // namespace epw
