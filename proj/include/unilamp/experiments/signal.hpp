#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "unilamp/error.hpp"
#include "unilamp/rng.hpp"
#include "unilamp/sensor.hpp"

namespace unilamp {

/// x ~ N(0, I_n / κ), so that E‖x‖²/m = 1 for m = n/κ.
inline Vector load_signal_gaussian(std::size_t n, double kappa, std::uint64_t seed) {
  require(n > 0, ErrorKind::invalid_input, "load_signal_gaussian: n must be positive");
  require(kappa > 0.0 && kappa <= 1.0, ErrorKind::invalid_input, "load_signal_gaussian: kappa must lie in (0, 1]");
  CounterRng rng(seed);
  const double scale = 1.0 / std::sqrt(kappa);
  Vector x(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = scale * rng.normal();
  return x;
}

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

/// Binary 8-bit PGM (P5). Comments are allowed between header fields.
inline GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::io_error, "cannot open image '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* field) {
    skip_space();
    require(pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos])), ErrorKind::io_error,
            "image '" + path + "': malformed PGM header (" + field + ")");
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      require(v <= (1u << 30), ErrorKind::io_error, "image '" + path + "': header value too large");
      ++pos;
    }
    return v;
  };
  require(bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5', ErrorKind::io_error,
          "image '" + path + "': not a binary PGM (expected magic P5)");
  pos = 2;
  GrayImage img;
  img.width = read_uint("width");
  img.height = read_uint("height");
  const std::size_t maxval = read_uint("maxval");
  require(maxval >= 1 && maxval <= 255, ErrorKind::io_error, "image '" + path + "': only 8-bit PGM is supported");
  require(pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos])), ErrorKind::io_error,
          "image '" + path + "': malformed PGM header");
  ++pos;
  const std::size_t count = img.width * img.height;
  require(bytes.size() - pos >= count, ErrorKind::io_error,
          "image '" + path + "': truncated pixel data (" + std::to_string(bytes.size() - pos) + " of " +
              std::to_string(count) + " bytes)");
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + count));
  return img;
}

/// `se`: ‖x‖² = n/κ, i.e. ‖x‖²/m = 1. `figure1`: unit sample standard deviation.
enum class Normalization { se, figure1 };

inline std::string_view to_string(Normalization n) { return n == Normalization::se ? "se" : "figure1"; }

inline Normalization parse_normalization(std::string_view s) {
  if (s == "se") return Normalization::se;
  if (s == "figure1") return Normalization::figure1;
  fail(ErrorKind::invalid_input, "unknown normalization '" + std::string(s) + "' (expected se or figure1)");
}

/// First n pixels in row-major order, mean-subtracted, then rescaled.
inline Vector load_signal_image(const std::string& path, std::size_t n, double kappa,
                                Normalization normalization = Normalization::se) {
  require(n > 0, ErrorKind::invalid_input, "load_signal_image: n must be positive");
  require(kappa > 0.0 && kappa <= 1.0, ErrorKind::invalid_input, "load_signal_image: kappa must lie in (0, 1]");
  const GrayImage img = read_pgm(path);
  require(img.pixels.size() >= n, ErrorKind::invalid_input,
          "image '" + path + "' has " + std::to_string(img.pixels.size()) + " pixels, need n=" + std::to_string(n));
  Vector x(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = img.pixels[static_cast<std::size_t>(i)];
  x.array() -= x.mean();
  const double energy = x.squaredNorm();
  require(energy > 0.0, ErrorKind::invalid_input, "image '" + path + "': signal is constant (zero norm after centering)");
  const double target = normalization == Normalization::se ? static_cast<double>(n) / kappa : static_cast<double>(n);
  x *= std::sqrt(target / energy);
  return x;
}

}  // namespace unilamp
