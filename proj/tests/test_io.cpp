#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ccmf/datasets.hpp"
#include "ccmf/errors.hpp"
#include "doctest.h"

using namespace ccmf;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ccmf_io_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("pgm round trip is byte stable") {
  GrayImage img;
  img.width = 5;
  img.height = 3;
  img.maxval = 255;
  img.pixels = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120, 130, 255};

  auto path = temp_path("mask.pgm");
  save_pgm(path.string(), img);
  GrayImage back = load_pgm(path.string());
  CHECK(back.pixels == img.pixels);

  auto path2 = temp_path("mask2.pgm");
  save_pgm(path2.string(), back);
  CHECK(slurp(path) == slurp(path2));
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("16-bit and text graymaps") {
  GrayImage img;
  img.width = 2;
  img.height = 2;
  img.maxval = 65535;
  img.pixels = {0, 256, 65535, 513};
  auto path = temp_path("wide.pgm");
  save_pgm(path.string(), img);
  CHECK(load_pgm(path.string()).pixels == img.pixels);

  img.maxval = 255;
  img.pixels = {1, 2, 3, 4};
  save_pgm(path.string(), img, /*binary=*/false);  // P2
  GrayImage text = load_pgm(path.string());
  CHECK(text.pixels == img.pixels);
  std::filesystem::remove(path);
}

TEST_CASE("graymap error classes are distinct") {
  auto path = temp_path("bad.pgm");
  {
    std::ofstream out(path, std::ios::binary);
    out << "P6\n2 2\n255\nxxxx";
  }
  CHECK_THROWS_AS(load_pgm(path.string()), UnsupportedFormatError);
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n2 abc\n255\n";
  }
  CHECK_THROWS_AS(load_pgm(path.string()), MalformedHeaderError);
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n4 4\n255\nxx";
  }
  CHECK_THROWS_AS(load_pgm(path.string()), TruncatedPayloadError);
  std::filesystem::remove(path);
}

TEST_CASE("float fields round trip through 16 bits plus sidecar") {
  Extents ext{4, 2, 1};
  Vector values(8);
  values << -1.5, -0.25, 0.0, 0.5, 0.75, 1.0, 2.0, 3.5;
  auto path = temp_path("field.pgm");
  save_float_field(path.string(), ext, values);

  Extents back_ext;
  Vector back = load_float_field(path.string(), &back_ext);
  CHECK(back_ext == ext);
  double span = values.maxCoeff() - values.minCoeff();
  for (int i = 0; i < 8; ++i)
    CHECK(back[i] == doctest::Approx(values[i]).epsilon(0).scale(1).epsilon(span / 65535.0));
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".range");
}

TEST_CASE("seed channel rejects foreign labels") {
  GrayImage img;
  img.width = 2;
  img.height = 1;
  img.maxval = 255;
  img.pixels = {0, 7};
  CHECK_THROWS_AS(seeds_from_gray(img), MalformedHeaderError);
  img.pixels = {2, 1};
  auto seeds = seeds_from_gray(img);
  CHECK(seeds == std::vector<std::uint8_t>{2, 1});
}

TEST_CASE("volume round trip and error classes") {
  Extents ext{3, 2, 2};
  Vector field(12);
  for (int i = 0; i < 12; ++i) field[i] = 0.25 * i - 1.0;
  Volume vol = volume_from_field(ext, field);
  auto path = temp_path("vol.raw");
  save_volume(path.string(), vol);
  Volume back = load_volume(path.string());
  CHECK(back.extents == ext);
  CHECK(back.dtype == "f32");
  CHECK(back.data == vol.data);

  {  // Header promises more voxels than the payload holds.
    std::ofstream out(path, std::ios::binary);
    out << "ccmf-vol 4 4 4 f32\nshort";
  }
  CHECK_THROWS_AS(load_volume(path.string()), TruncatedPayloadError);
  {
    std::ofstream out(path, std::ios::binary);
    out << "ccmf-volume 2 2 2 u8\n";
  }
  CHECK_THROWS_AS(load_volume(path.string()), UnsupportedFormatError);
  {
    std::ofstream out(path, std::ios::binary);
    out << "ccmf-vol 2 2 u8\n";
  }
  CHECK_THROWS_AS(load_volume(path.string()), MalformedHeaderError);

  Volume mismatched = vol;
  mismatched.data.pop_back();
  CHECK_THROWS_AS(save_volume(path.string(), mismatched), DimensionError);
  std::filesystem::remove(path);
}

TEST_CASE("mask volume uses u8 with 255 for foreground") {
  Extents ext{2, 2, 1};
  Volume vol = volume_from_mask(ext, {1, 0, 0, 1});
  CHECK(vol.dtype == "u8");
  CHECK(vol.data == std::vector<std::uint8_t>{255, 0, 0, 255});
}
