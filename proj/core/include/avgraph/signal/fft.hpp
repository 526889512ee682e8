#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <vector>

namespace avgraph::signal {

// smallest power of two >= n (n >= 1)
std::size_t next_pow2(std::size_t n);

// In-place iterative radix-2 transform. a.size() must be a power of two.
// inverse=true applies the 1/N scale.
void fft(std::vector<std::complex<double>>& a, bool inverse);

// Forward FFT of a real signal zero-padded to next_pow2(max(n, min_size)).
std::vector<std::complex<double>> fft_real(const std::vector<double>& x,
                                           std::size_t min_size = 1);

// 2D forward FFT of a real matrix zero-padded to power-of-two dimensions.
Eigen::MatrixXcd fft2_real(const Eigen::MatrixXd& img);

}  // namespace avgraph::signal
