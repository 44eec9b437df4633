#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "ccmf/datasets.hpp"
#include "ccmf/errors.hpp"

namespace ccmf {

namespace {

// PGM token reader: skips whitespace and '#' comments.
int next_pgm_token(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == EOF) throw MalformedHeaderError("graymap header ends early");
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(c)) {
      in.get();
      continue;
    }
    break;
  }
  int value;
  if (!(in >> value)) throw MalformedHeaderError("graymap header field is not a number");
  return value;
}

}  // namespace

GrayImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[2];
  if (!in.read(magic, 2)) throw MalformedHeaderError("file shorter than a graymap magic");
  bool binary;
  if (magic[0] == 'P' && magic[1] == '5') binary = true;
  else if (magic[0] == 'P' && magic[1] == '2') binary = false;
  else throw UnsupportedFormatError("unsupported magic (expected P2 or P5)");

  GrayImage img;
  img.width = next_pgm_token(in);
  img.height = next_pgm_token(in);
  img.maxval = next_pgm_token(in);
  if (img.width < 1 || img.height < 1 || img.maxval < 1 || img.maxval > 65535)
    throw MalformedHeaderError("implausible graymap dimensions");

  const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
  img.pixels.resize(count);
  if (binary) {
    in.get();  // single whitespace after maxval
    if (img.maxval < 256) {
      std::vector<unsigned char> raw(count);
      if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count)))
        throw TruncatedPayloadError("graymap payload ends early");
      std::copy(raw.begin(), raw.end(), img.pixels.begin());
    } else {
      std::vector<unsigned char> raw(2 * count);
      if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(2 * count)))
        throw TruncatedPayloadError("graymap payload ends early");
      for (std::size_t i = 0; i < count; ++i)  // most significant byte first
        img.pixels[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      long value;
      if (!(in >> value)) throw TruncatedPayloadError("graymap payload ends early");
      if (value < 0 || value > img.maxval) throw TruncatedPayloadError("sample out of range");
      img.pixels[i] = static_cast<std::uint16_t>(value);
    }
  }
  return img;
}

void save_pgm(const std::string& path, const GrayImage& image, bool binary) {
  if (image.width < 1 || image.height < 1) throw InvalidArgumentError("empty image");
  if (static_cast<std::size_t>(image.width) * image.height != image.pixels.size())
    throw DimensionError("pixel buffer does not match dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << (binary ? "P5" : "P2") << '\n'
      << image.width << ' ' << image.height << '\n'
      << image.maxval << '\n';
  if (binary) {
    if (image.maxval < 256) {
      std::vector<unsigned char> raw(image.pixels.size());
      std::transform(image.pixels.begin(), image.pixels.end(), raw.begin(),
                     [](std::uint16_t v) { return static_cast<unsigned char>(v); });
      out.write(reinterpret_cast<const char*>(raw.data()),
                static_cast<std::streamsize>(raw.size()));
    } else {
      std::vector<unsigned char> raw(2 * image.pixels.size());
      for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        raw[2 * i] = static_cast<unsigned char>(image.pixels[i] >> 8);
        raw[2 * i + 1] = static_cast<unsigned char>(image.pixels[i] & 0xff);
      }
      out.write(reinterpret_cast<const char*>(raw.data()),
                static_cast<std::streamsize>(raw.size()));
    }
  } else {
    for (std::size_t i = 0; i < image.pixels.size(); ++i)
      out << image.pixels[i] << ((i + 1) % 16 == 0 ? '\n' : ' ');
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

void save_float_field(const std::string& path, const Extents& extents, const Vector& values) {
  if (extents.dims() != 2) throw InvalidArgumentError("float fields are 2D; use volumes in 3D");
  if (values.size() != extents.count()) throw DimensionError("value length != pixel count");
  double lo = values.minCoeff(), hi = values.maxCoeff();
  double span = hi > lo ? hi - lo : 1.0;

  GrayImage img;
  img.width = extents.x;
  img.height = extents.y;
  img.maxval = 65535;
  img.pixels.resize(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i)
    img.pixels[i] = static_cast<std::uint16_t>(std::lround((values[i] - lo) / span * 65535.0));
  save_pgm(path, img, true);

  std::ofstream side(path + ".range");
  if (!side) throw IoError("cannot write sidecar: " + path + ".range");
  side.precision(std::numeric_limits<double>::max_digits10);
  side << lo << ' ' << hi << '\n';
}

Vector load_float_field(const std::string& path, Extents* extents_out) {
  GrayImage img = load_pgm(path);
  std::ifstream side(path + ".range");
  if (!side) throw IoError("missing sidecar: " + path + ".range");
  double lo, hi;
  if (!(side >> lo >> hi)) throw MalformedHeaderError("sidecar must hold \"min max\"");
  double span = hi > lo ? hi - lo : 1.0;
  Vector values(static_cast<Eigen::Index>(img.pixels.size()));
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    values[static_cast<Eigen::Index>(i)] = lo + img.pixels[i] / 65535.0 * span;
  if (extents_out) *extents_out = {img.width, img.height, 1};
  return values;
}

ImageGrid image_from_gray(const GrayImage& image) {
  ImageGrid grid;
  grid.extents = {image.width, image.height, 1};
  grid.intensity.resize(grid.extents.count());
  for (std::size_t i = 0; i < image.pixels.size(); ++i)
    grid.intensity[static_cast<Eigen::Index>(i)] =
        static_cast<double>(image.pixels[i]) / image.maxval;
  return grid;
}

GrayImage gray_from_mask(const Extents& extents, const std::vector<std::uint8_t>& mask) {
  if (extents.dims() != 2) throw InvalidArgumentError("masks are 2D; use volumes in 3D");
  if (static_cast<int>(mask.size()) != extents.count())
    throw DimensionError("mask length != pixel count");
  GrayImage img;
  img.width = extents.x;
  img.height = extents.y;
  img.maxval = 255;
  img.pixels.resize(mask.size());
  std::transform(mask.begin(), mask.end(), img.pixels.begin(),
                 [](std::uint8_t v) { return v ? std::uint16_t{255} : std::uint16_t{0}; });
  return img;
}

std::vector<std::uint8_t> mask_from_gray(const GrayImage& image) {
  std::vector<std::uint8_t> mask(image.pixels.size());
  int threshold = image.maxval / 2;
  std::transform(image.pixels.begin(), image.pixels.end(), mask.begin(),
                 [threshold](std::uint16_t v) { return v > threshold ? 1 : 0; });
  return mask;
}

std::vector<std::uint8_t> seeds_from_gray(const GrayImage& image) {
  std::vector<std::uint8_t> seeds(image.pixels.size());
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    if (image.pixels[i] > kSeedForeground)
      throw MalformedHeaderError("seed channel values must be 0, 1, or 2");
    seeds[i] = static_cast<std::uint8_t>(image.pixels[i]);
  }
  return seeds;
}

// ---------------------------------------------------------------------------
// Volumes

std::size_t Volume::element_size() const {
  if (dtype == "u8") return 1;
  if (dtype == "u16") return 2;
  if (dtype == "f32") return 4;
  throw UnsupportedFormatError("unsupported volume dtype: " + dtype);
}

Volume load_volume(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::string header;
  if (!std::getline(in, header)) throw MalformedHeaderError("missing volume header");
  std::istringstream hs(header);
  std::string magic;
  Volume vol;
  int x, y, z;
  if (!(hs >> magic)) throw MalformedHeaderError("empty volume header");
  if (magic != "ccmf-vol") throw UnsupportedFormatError("unsupported magic (expected ccmf-vol)");
  if (!(hs >> x >> y >> z >> vol.dtype)) throw MalformedHeaderError("incomplete volume header");
  if (x < 1 || y < 1 || z < 1) throw MalformedHeaderError("implausible volume dimensions");
  vol.extents = {x, y, z};
  std::size_t bytes = static_cast<std::size_t>(vol.extents.count()) * vol.element_size();
  vol.data.resize(bytes);
  if (!in.read(reinterpret_cast<char*>(vol.data.data()), static_cast<std::streamsize>(bytes)))
    throw TruncatedPayloadError("volume payload ends early");
  return vol;
}

void save_volume(const std::string& path, const Volume& volume) {
  std::size_t expected = static_cast<std::size_t>(volume.extents.count()) * volume.element_size();
  if (volume.data.size() != expected) throw DimensionError("payload does not match header dims");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "ccmf-vol " << volume.extents.x << ' ' << volume.extents.y << ' ' << volume.extents.z
      << ' ' << volume.dtype << '\n';
  out.write(reinterpret_cast<const char*>(volume.data.data()),
            static_cast<std::streamsize>(volume.data.size()));
  if (!out) throw IoError("write failed: " + path);
}

Volume volume_from_mask(const Extents& extents, const std::vector<std::uint8_t>& mask) {
  if (static_cast<int>(mask.size()) != extents.count())
    throw DimensionError("mask length != voxel count");
  Volume vol;
  vol.extents = extents;
  vol.dtype = "u8";
  vol.data.assign(mask.begin(), mask.end());
  for (auto& b : vol.data) b = b ? 255 : 0;
  return vol;
}

Volume volume_from_field(const Extents& extents, const Vector& values) {
  if (values.size() != extents.count()) throw DimensionError("value length != voxel count");
  Volume vol;
  vol.extents = extents;
  vol.dtype = "f32";
  vol.data.resize(static_cast<std::size_t>(values.size()) * 4);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    float f = static_cast<float>(values[i]);
    std::memcpy(vol.data.data() + 4 * i, &f, 4);  // little-endian host
  }
  return vol;
}

}  // namespace ccmf
