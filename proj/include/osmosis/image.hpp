#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace osmosis {

/// Cell-centred grey or RGB raster. Samples live in [0, 1] after loading;
/// solver state is unconstrained. Pixel (i, j) of channel c sits at linear
/// index j*nx + i (x fastest), matching the unknown ordering of the solvers.
struct Image {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t channels = 1;
  /// Shift added by ensure_positive; subtract before writing results out.
  double positivity_offset = 0.0;
  std::vector<std::vector<double>> planes;

  Image() = default;
  Image(std::size_t nx_, std::size_t ny_, std::size_t channels_ = 1,
        double fill = 0.0);

  std::size_t pixels() const { return nx * ny; }
  double& at(std::size_t c, std::size_t i, std::size_t j) {
    return planes[c][j * nx + i];
  }
  double at(std::size_t c, std::size_t i, std::size_t j) const {
    return planes[c][j * nx + i];
  }
};

enum class PnmErrorKind {
  UnsupportedFormat,
  MalformedHeader,
  TruncatedPayload,
  MalformedPayload,
  IoFailure,
};

class PnmError : public std::runtime_error {
 public:
  PnmError(PnmErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  PnmErrorKind kind() const { return kind_; }

 private:
  PnmErrorKind kind_;
};

/// Reads P2/P5 (grey) or P3/P6 (RGB) with maxval up to 65535; samples are
/// scaled to [0, 1]. Header comments and arbitrary whitespace are accepted.
Image load_image(const std::string& path);

/// Writes P5 (1 channel) or P6 (3 channels) with maxval 255, clamping to
/// [0, 1] and rounding to the nearest level. An 8-bit load/save round trip
/// is bit-exact.
void save_image(const Image& img, const std::string& path);

/// Returns the image shifted by epsilon (> 0), with the shift recorded in
/// positivity_offset so callers can subtract it from results.
Image ensure_positive(Image img, double epsilon);

/// Subtracts the recorded positivity offset and clears it.
Image remove_offset(Image img);

double mean_value(const Image& img, std::size_t channel);

/// Relative RMSE of u against reference, jointly over all channels.
double rrmse(const Image& u, const Image& reference);

}  // namespace osmosis
