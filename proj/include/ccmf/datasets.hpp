#ifndef CCMF_DATASETS_HPP
#define CCMF_DATASETS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ccmf/graph.hpp"
#include "ccmf/solver.hpp"

namespace ccmf {

/// Grayscale image or volume with intensities in [0,1] and an optional
/// per-pixel seed channel (kSeedNone / kSeedBackground / kSeedForeground).
struct ImageGrid {
  Extents extents;
  Vector intensity;                 // length extents.count()
  std::vector<std::uint8_t> seeds;  // empty, or length extents.count()

  void validate() const;  // throws DimensionError / InvalidArgumentError
};

/// Node metric g = exp(-beta ||grad I||_2), central differences inside,
/// one-sided at the borders. Always in (0, 1].
Vector contrast_metric(const ImageGrid& image, double beta);

struct AppearancePriors {
  Vector fg;  // exp(-beta (FC - I)^2)
  Vector bg;  // exp(-beta (BC - I)^2)
};

AppearancePriors appearance_priors(const ImageGrid& image, double fg_color, double bg_color,
                                   double beta);

/// Dice similarity 2|a n b| / (|a| + |b|); both masks empty counts as 1.
/// Nonzero entries are foreground.
double dice(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b);

// ---------------------------------------------------------------------------
// Synthetic phantoms

/// Vertical two-region image: left half intensity 0.25, right half 0.75,
/// with a seed block inside each region. Ground truth = right half.
struct SyntheticInstance {
  ImageGrid image;
  std::vector<std::uint8_t> ground_truth;  // 1 = foreground
};

SyntheticInstance two_region_phantom(int width, int height);

/// Uniform image split by an anti-diagonal step of the given contrast, with
/// disc seeds in the opposite corners. Ground truth = upper-left side.
SyntheticInstance diagonal_line_phantom(int size, double contrast);

/// Deterministic noisy-disc segmentation instance (disc of varying radius
/// and position, additive noise, seed disc inside + border frame outside).
SyntheticInstance synthetic_segmentation_instance(int width, int height, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Perimeter study

struct PerimeterRow {
  std::string shape;          // "disc" or "square"
  double size;                // radius or side length in pixels
  double analytic_perimeter;  // 2 pi r or 4 a
  double ccmf_energy;         // 2 lambda^T g^2
  double gc_cost;             // classical min-cut value, uniform weights
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct PerimeterStudy {
  std::vector<PerimeterRow> rows;
  LinearFit ccmf_fit;    // pooled over all shapes
  LinearFit gc_fit;
  double disc_slope;     // per-family CCMF slopes
  double square_slope;
};

/// Runs the default shape set (8 disc radii, 7 square sides) against both
/// solvers on uniform-capacity images with the shape itself as the
/// foreground seed and the image border as background.
/// threads > 1 fans the independent solves across workers.
PerimeterStudy perimeter_study(int threads = 1);
PerimeterStudy perimeter_study(const std::vector<double>& disc_radii,
                               const std::vector<double>& square_sides, int threads);

// ---------------------------------------------------------------------------
// Catenoid

/// 3D minimal-surface benchmark: two filled discs of radius ring_radius in
/// the planes z = center +- half_separation form the source, the volume
/// boundary the sink, capacities are 1. The analytic minimal surface is
/// r(z) = waist * cosh((z - center) / waist) with ring_radius =
/// waist * cosh(half_separation / waist) (the larger root; the smaller one
/// is the unstable catenoid). Throws InvalidArgumentError when
/// half_separation / ring_radius exceeds the critical ratio ~0.6627.
struct CatenoidPhantom {
  GridGraph grid;
  std::vector<std::uint8_t> seeds;  // per voxel
  Extents extents;
  double ring_radius;
  double half_separation;
  double waist;     // catenary parameter c
  double center_z;  // continuous z of the mid-plane
  int ring_low;     // z slice of the lower ring
  int ring_high;

  double profile(double z) const;  // analytic radius at slice z
};

CatenoidPhantom catenoid_phantom(int grid_size, double ring_radius, double half_separation);

/// Largest root of ring_radius = c cosh(half_separation / c); residual at
/// the root is below 1e-10. Throws when no catenoid exists.
double catenoid_waist(double ring_radius, double half_separation);

/// Per-slice radius sqrt(area / pi) of a thresholded volume mask between the
/// rings, compared against the analytic profile.
double catenoid_rmse(const CatenoidPhantom& phantom, const std::vector<std::uint8_t>& voxel_mask);

// ---------------------------------------------------------------------------
// Zachary karate club

struct KarateInstance {
  TransportGraph graph;              // leaders contracted into source/sink
  std::vector<int> member_node;      // per member: node id, or -1 / -2 for the leaders
  std::vector<std::uint8_t> historical_side;  // per member, 1 = instructor's faction
  int instructor;                    // member 0
  int president;                     // member 33
};

/// The 34-member weighted network with node capacities set to the mean
/// affinity of the incident edges and the two leaders contracted into
/// source (instructor) and sink (president).
KarateInstance zachary_graph();

// ---------------------------------------------------------------------------
// Image and volume I/O  (2D: PGM; 3D: "ccmf-vol" raw)

struct GrayImage {
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<std::uint16_t> pixels;  // row-major
};

/// Reads P2 (text) or P5 (binary) graymaps, 8- or 16-bit. Distinct errors:
/// UnsupportedFormatError (magic), MalformedHeaderError, TruncatedPayloadError.
GrayImage load_pgm(const std::string& path);

/// Writes P5 (binary = true) or P2. 16-bit payloads are big-endian per the
/// format definition. Output is canonical: loading and re-saving a file
/// produced here reproduces it byte for byte.
void save_pgm(const std::string& path, const GrayImage& image, bool binary = true);

/// Float node/pixel fields are stored as 16-bit graymaps scaled to the full
/// range, with a sidecar text file "<path>.range" holding "min max".
void save_float_field(const std::string& path, const Extents& extents, const Vector& values);
Vector load_float_field(const std::string& path, Extents* extents_out = nullptr);

ImageGrid image_from_gray(const GrayImage& image);
GrayImage gray_from_mask(const Extents& extents, const std::vector<std::uint8_t>& mask);
std::vector<std::uint8_t> mask_from_gray(const GrayImage& image);
/// Seed channel: exact values {0, 1, 2}; anything else is malformed.
std::vector<std::uint8_t> seeds_from_gray(const GrayImage& image);

struct Volume {
  Extents extents;
  std::string dtype;               // "u8", "u16", or "f32"
  std::vector<std::uint8_t> data;  // raw little-endian payload

  std::size_t element_size() const;
};

/// One-line header "ccmf-vol X Y Z dtype" followed by the raw payload.
Volume load_volume(const std::string& path);
void save_volume(const std::string& path, const Volume& volume);
Volume volume_from_mask(const Extents& extents, const std::vector<std::uint8_t>& mask);
Volume volume_from_field(const Extents& extents, const Vector& values);

}  // namespace ccmf

#endif
