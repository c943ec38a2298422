#include "osmosis/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>

#include "osmosis/simd/kernels.hpp"

namespace osmosis {
namespace {

// Skips whitespace and '#' comments, then reads one unsigned decimal token.
// PNM headers allow comments between any two tokens.
long read_header_int(std::istream& in) {
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (std::isspace(ch)) {
      ch = in.get();
    } else {
      break;
    }
  }
  if (ch == EOF || !std::isdigit(ch))
    throw PnmError(PnmErrorKind::MalformedHeader,
                   "malformed header: expected unsigned integer");
  long value = 0;
  while (ch != EOF && std::isdigit(ch)) {
    value = value * 10 + (ch - '0');
    if (value > std::numeric_limits<int>::max())
      throw PnmError(PnmErrorKind::MalformedHeader,
                     "malformed header: value out of range");
    ch = in.get();
  }
  if (ch != EOF) in.unget();
  return value;
}

long read_ascii_sample(std::istream& in) {
  long v;
  if (!(in >> v))
    throw PnmError(PnmErrorKind::TruncatedPayload,
                   "truncated payload: ran out of ASCII samples");
  return v;
}

long read_binary_sample(std::istream& in, bool two_byte) {
  const int hi = in.get();
  if (hi == EOF)
    throw PnmError(PnmErrorKind::TruncatedPayload,
                   "truncated payload: ran out of binary samples");
  if (!two_byte) return hi;
  const int lo = in.get();
  if (lo == EOF)
    throw PnmError(PnmErrorKind::TruncatedPayload,
                   "truncated payload: ran out of binary samples");
  return (hi << 8) | lo;  // big-endian per the format
}

}  // namespace

Image::Image(std::size_t nx_, std::size_t ny_, std::size_t channels_,
             double fill)
    : nx(nx_), ny(ny_), channels(channels_) {
  if (nx == 0 || ny == 0)
    throw std::invalid_argument("image dimensions must be positive");
  if (channels != 1 && channels != 3)
    throw std::invalid_argument("image must have 1 or 3 channels");
  planes.assign(channels, std::vector<double>(nx * ny, fill));
}

Image load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw PnmError(PnmErrorKind::IoFailure, "cannot open " + path);

  const int m0 = in.get();
  const int m1 = in.get();
  if (m0 == EOF || m1 == EOF)
    throw PnmError(PnmErrorKind::MalformedHeader, "empty file: " + path);
  if (m0 != 'P' || (m1 != '2' && m1 != '3' && m1 != '5' && m1 != '6'))
    throw PnmError(PnmErrorKind::UnsupportedFormat,
                   "unsupported magic in " + path +
                       " (want P2, P3, P5 or P6)");
  const bool ascii = m1 == '2' || m1 == '3';
  const std::size_t channels = (m1 == '3' || m1 == '6') ? 3 : 1;

  const long w = read_header_int(in);
  const long h = read_header_int(in);
  const long maxval = read_header_int(in);
  if (w <= 0 || h <= 0)
    throw PnmError(PnmErrorKind::MalformedHeader,
                   "malformed header: non-positive dimensions");
  if (maxval <= 0 || maxval > 65535)
    throw PnmError(PnmErrorKind::MalformedHeader,
                   "malformed header: maxval out of range");
  if (!ascii) {
    const int sep = in.get();  // exactly one whitespace byte before payload
    if (sep == EOF || !std::isspace(sep))
      throw PnmError(PnmErrorKind::MalformedHeader,
                     "malformed header: missing payload separator");
  }

  Image img(static_cast<std::size_t>(w), static_cast<std::size_t>(h),
            channels);
  const bool two_byte = maxval > 255;
  // Divide per sample: raw/maxval differs from raw*(1/maxval) in the last
  // bit, and save/load round trips promise bit-exact values.
  for (std::size_t p = 0; p < img.pixels(); ++p) {
    for (std::size_t c = 0; c < channels; ++c) {
      const long raw =
          ascii ? read_ascii_sample(in) : read_binary_sample(in, two_byte);
      if (raw < 0 || raw > maxval)
        throw PnmError(PnmErrorKind::MalformedPayload,
                       "sample exceeds maxval in " + path);
      img.planes[c][p] =
          static_cast<double>(raw) / static_cast<double>(maxval);
    }
  }
  return img;
}

void save_image(const Image& img, const std::string& path) {
  if (img.channels != 1 && img.channels != 3)
    throw std::invalid_argument("save_image: need 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw PnmError(PnmErrorKind::IoFailure, "cannot write " + path);
  out << (img.channels == 1 ? "P5" : "P6") << "\n"
      << img.nx << " " << img.ny << "\n255\n";
  for (std::size_t p = 0; p < img.pixels(); ++p) {
    for (std::size_t c = 0; c < img.channels; ++c) {
      const double v = std::clamp(img.planes[c][p], 0.0, 1.0);
      out.put(static_cast<char>(
          static_cast<std::uint8_t>(std::lround(v * 255.0))));
    }
  }
  if (!out)
    throw PnmError(PnmErrorKind::IoFailure, "write failed for " + path);
}

Image ensure_positive(Image img, double epsilon) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("ensure_positive: epsilon must be positive");
  for (auto& plane : img.planes)
    for (auto& v : plane) v += epsilon;
  img.positivity_offset += epsilon;
  return img;
}

Image remove_offset(Image img) {
  const double eps = img.positivity_offset;
  if (eps != 0.0)
    for (auto& plane : img.planes)
      for (auto& v : plane) v -= eps;
  img.positivity_offset = 0.0;
  return img;
}

double mean_value(const Image& img, std::size_t channel) {
  if (channel >= img.channels)
    throw std::invalid_argument("mean_value: channel out of range");
  const auto& plane = img.planes[channel];
  return kernels::active().sum(plane.data(), plane.size()) /
         static_cast<double>(plane.size());
}

double rrmse(const Image& u, const Image& reference) {
  if (u.nx != reference.nx || u.ny != reference.ny ||
      u.channels != reference.channels)
    throw std::invalid_argument("rrmse: shape mismatch");
  const auto& k = kernels::active();
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < u.channels; ++c) {
    num += k.sum_sq_diff(u.planes[c].data(), reference.planes[c].data(),
                         u.planes[c].size());
    den += k.dot(reference.planes[c].data(), reference.planes[c].data(),
                 reference.planes[c].size());
  }
  if (den == 0.0)
    throw std::invalid_argument("rrmse: reference is identically zero");
  return std::sqrt(num / den);
}

}  // namespace osmosis
