#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

namespace avgraph::img {

// Grayscale raster, row-major semantics, values nominally 0..255.
using Gray = Eigen::MatrixXd;

struct Rgb {
  Eigen::MatrixXd r, g, b;

  Eigen::Index rows() const { return r.rows(); }
  Eigen::Index cols() const { return r.cols(); }
};

// ITU-R BT.601 luma.
Gray to_gray(const Rgb& im);

struct Frame {
  Gray gray;
  std::optional<Rgb> rgb;  // present when the source file was color
};

// Reads a binary PGM (P5) or PPM (P6) file, 8-bit, maxval 255.
Frame read_image(const std::string& path);

void write_pgm(const std::string& path, const Gray& im);
void write_ppm(const std::string& path, const Rgb& im);

}  // namespace avgraph::img
