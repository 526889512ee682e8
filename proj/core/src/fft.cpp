#include "avgraph/signal/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace avgraph::signal {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft: size must be a power of two");

  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  const double pi = 3.14159265358979323846;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

std::vector<std::complex<double>> fft_real(const std::vector<double>& x,
                                           std::size_t min_size) {
  std::size_t n = next_pow2(std::max(x.size(), std::max<std::size_t>(min_size, 1)));
  std::vector<std::complex<double>> a(n, {0.0, 0.0});
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = {x[i], 0.0};
  fft(a, false);
  return a;
}

Eigen::MatrixXcd fft2_real(const Eigen::MatrixXd& img) {
  const auto rows = static_cast<std::size_t>(img.rows());
  const auto cols = static_cast<std::size_t>(img.cols());
  const std::size_t pr = next_pow2(rows);
  const std::size_t pc = next_pow2(cols);

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(pr),
                                                static_cast<Eigen::Index>(pc));
  out.topLeftCorner(img.rows(), img.cols()) = img.cast<std::complex<double>>();

  std::vector<std::complex<double>> buf;
  buf.resize(pc);
  for (std::size_t r = 0; r < pr; ++r) {
    for (std::size_t c = 0; c < pc; ++c) buf[c] = out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    fft(buf, false);
    for (std::size_t c = 0; c < pc; ++c) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = buf[c];
  }
  buf.resize(pr);
  for (std::size_t c = 0; c < pc; ++c) {
    for (std::size_t r = 0; r < pr; ++r) buf[r] = out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    fft(buf, false);
    for (std::size_t r = 0; r < pr; ++r) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = buf[r];
  }
  return out;
}

}  // namespace avgraph::signal
