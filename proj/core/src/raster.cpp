#include "avgraph/image/raster.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace avgraph::img {

Gray to_gray(const Rgb& im) {
  return 0.299 * im.r + 0.587 * im.g + 0.114 * im.b;
}

namespace {

// Reads the next whitespace/comment-delimited token of a PNM header.
int next_header_int(std::istream& in, const std::string& path) {
  while (true) {
    int c = in.peek();
    if (c == EOF) throw std::runtime_error("image: truncated header: " + path);
    if (c == '#') {
      std::string line;
      std::getline(in, line);
      continue;
    }
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    break;
  }
  int v = 0;
  in >> v;
  if (!in) throw std::runtime_error("image: bad header field: " + path);
  return v;
}

}  // namespace

Frame read_image(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("image: cannot open " + path);
  char m0 = 0, m1 = 0;
  f.get(m0);
  f.get(m1);
  if (m0 != 'P' || (m1 != '5' && m1 != '6'))
    throw std::runtime_error("image: unsupported format (need binary PGM/PPM): " + path);
  const bool color = (m1 == '6');

  int w = next_header_int(f, path);
  int h = next_header_int(f, path);
  int maxval = next_header_int(f, path);
  if (w <= 0 || h <= 0) throw std::runtime_error("image: bad dimensions: " + path);
  if (maxval != 255) throw std::runtime_error("image: only 8-bit rasters supported: " + path);
  f.get();  // single whitespace after maxval

  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * (color ? 3u : 1u);
  std::vector<unsigned char> buf(n);
  f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(f.gcount()) != n)
    throw std::runtime_error("image: truncated pixel data: " + path);

  Frame out;
  if (color) {
    Rgb im;
    im.r.resize(h, w);
    im.g.resize(h, w);
    im.b.resize(h, w);
    std::size_t k = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        im.r(y, x) = buf[k++];
        im.g(y, x) = buf[k++];
        im.b(y, x) = buf[k++];
      }
    out.gray = to_gray(im);
    out.rgb = std::move(im);
  } else {
    out.gray.resize(h, w);
    std::size_t k = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.gray(y, x) = buf[k++];
  }
  return out;
}

namespace {
unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::clamp(std::lround(v), 0l, 255l));
}
}  // namespace

void write_pgm(const std::string& path, const Gray& im) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("image: cannot write " + path);
  f << "P5\n" << im.cols() << " " << im.rows() << "\n255\n";
  for (Eigen::Index y = 0; y < im.rows(); ++y)
    for (Eigen::Index x = 0; x < im.cols(); ++x) {
      unsigned char b = to_byte(im(y, x));
      f.write(reinterpret_cast<const char*>(&b), 1);
    }
}

void write_ppm(const std::string& path, const Rgb& im) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("image: cannot write " + path);
  f << "P6\n" << im.cols() << " " << im.rows() << "\n255\n";
  for (Eigen::Index y = 0; y < im.rows(); ++y)
    for (Eigen::Index x = 0; x < im.cols(); ++x) {
      unsigned char px[3] = {to_byte(im.r(y, x)), to_byte(im.g(y, x)), to_byte(im.b(y, x))};
      f.write(reinterpret_cast<const char*>(px), 3);
    }
}

}  // namespace avgraph::img
