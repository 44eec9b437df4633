#include "ccmf/datasets.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "ccmf/baselines.hpp"
#include "ccmf/duality.hpp"
#include "ccmf/errors.hpp"

namespace ccmf {

void ImageGrid::validate() const {
  if (extents.x < 1 || extents.y < 1 || extents.z < 1)
    throw InvalidArgumentError("extents must be positive");
  if (intensity.size() != extents.count())
    throw DimensionError("intensity length != pixel count");
  if (!seeds.empty() && static_cast<int>(seeds.size()) != extents.count())
    throw DimensionError("seed channel length != pixel count");
  for (std::uint8_t s : seeds)
    if (s > kSeedForeground) throw InvalidArgumentError("seed labels must be 0, 1, or 2");
}

Vector contrast_metric(const ImageGrid& image, double beta) {
  image.validate();
  if (beta < 0.0) throw InvalidArgumentError("beta must be nonnegative");
  const Extents& ext = image.extents;
  const Vector& I = image.intensity;
  Vector g(ext.count());
  for (int z = 0; z < ext.z; ++z)
    for (int y = 0; y < ext.y; ++y)
      for (int x = 0; x < ext.x; ++x) {
        // Central differences inside, one-sided at the borders.
        auto axis_grad = [&](int lo, int hi, int span) {
          return (I[hi] - I[lo]) / static_cast<double>(span);
        };
        int p = ext.index(x, y, z);
        double gx = ext.x == 1 ? 0.0
                    : axis_grad(ext.index(std::max(x - 1, 0), y, z),
                                ext.index(std::min(x + 1, ext.x - 1), y, z),
                                std::min(x + 1, ext.x - 1) - std::max(x - 1, 0));
        double gy = ext.y == 1 ? 0.0
                    : axis_grad(ext.index(x, std::max(y - 1, 0), z),
                                ext.index(x, std::min(y + 1, ext.y - 1), z),
                                std::min(y + 1, ext.y - 1) - std::max(y - 1, 0));
        double gz = ext.z == 1 ? 0.0
                    : axis_grad(ext.index(x, y, std::max(z - 1, 0)),
                                ext.index(x, y, std::min(z + 1, ext.z - 1)),
                                std::min(z + 1, ext.z - 1) - std::max(z - 1, 0));
        g[p] = std::exp(-beta * std::sqrt(gx * gx + gy * gy + gz * gz));
      }
  return g;
}

AppearancePriors appearance_priors(const ImageGrid& image, double fg_color, double bg_color,
                                   double beta) {
  image.validate();
  if (beta < 0.0) throw InvalidArgumentError("beta must be nonnegative");
  if (fg_color < 0.0 || fg_color > 1.0 || bg_color < 0.0 || bg_color > 1.0)
    throw InvalidArgumentError("reference colors must lie in [0,1]");
  AppearancePriors priors;
  priors.fg = (-beta * (image.intensity.array() - fg_color).square()).exp();
  priors.bg = (-beta * (image.intensity.array() - bg_color).square()).exp();
  return priors;
}

double dice(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  if (a.size() != b.size()) throw DimensionError("mask sizes differ");
  std::size_t count_a = 0, count_b = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    bool fa = a[i] != 0, fb = b[i] != 0;
    count_a += fa;
    count_b += fb;
    both += fa && fb;
  }
  if (count_a + count_b == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(count_a + count_b);
}

// ---------------------------------------------------------------------------
// Phantoms

SyntheticInstance two_region_phantom(int width, int height) {
  if (width < 8 || height < 4) throw InvalidArgumentError("phantom too small");
  SyntheticInstance inst;
  inst.image.extents = {width, height, 1};
  inst.image.intensity.resize(inst.image.extents.count());
  inst.image.seeds.assign(inst.image.extents.count(), kSeedNone);
  inst.ground_truth.assign(inst.image.extents.count(), 0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      int p = inst.image.extents.index(x, y);
      bool right = x >= width / 2;
      inst.image.intensity[p] = right ? 0.75 : 0.25;
      inst.ground_truth[p] = right ? 1 : 0;
    }
  int cy = height / 2;
  inst.image.seeds[inst.image.extents.index(width - 2, cy)] = kSeedForeground;
  inst.image.seeds[inst.image.extents.index(1, cy)] = kSeedBackground;
  return inst;
}

SyntheticInstance diagonal_line_phantom(int size, double contrast) {
  if (size < 16) throw InvalidArgumentError("phantom too small");
  if (contrast <= 0.0 || contrast >= 1.0) throw InvalidArgumentError("contrast must be in (0,1)");
  SyntheticInstance inst;
  Extents ext{size, size, 1};
  inst.image.extents = ext;
  inst.image.intensity.resize(ext.count());
  inst.image.seeds.assign(ext.count(), kSeedNone);
  inst.ground_truth.assign(ext.count(), 0);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      int p = ext.index(x, y);
      bool upper = x + y <= size - 1;  // upper-left side of the anti-diagonal
      inst.image.intensity[p] = upper ? 0.5 - contrast / 2 : 0.5 + contrast / 2;
      inst.ground_truth[p] = upper ? 1 : 0;
    }
  // Disc seeds in the opposite corners, clear of the contour.
  int r = size / 6;
  auto stamp = [&](int cx, int cy, std::uint8_t label) {
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r)
          inst.image.seeds[ext.index(x, y)] = label;
  };
  stamp(size / 4, size / 4, kSeedForeground);
  stamp(size - 1 - size / 4, size - 1 - size / 4, kSeedBackground);
  return inst;
}

SyntheticInstance synthetic_segmentation_instance(int width, int height, std::uint64_t seed) {
  if (width < 32 || height < 32) throw InvalidArgumentError("instance too small");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Extents ext{width, height, 1};
  double radius = 0.18 * std::min(width, height) * (1.0 + 0.5 * unit(rng));
  double cx = width * (0.4 + 0.2 * unit(rng));
  double cy = height * (0.4 + 0.2 * unit(rng));

  SyntheticInstance inst;
  inst.image.extents = ext;
  inst.image.intensity.resize(ext.count());
  inst.image.seeds.assign(ext.count(), kSeedNone);
  inst.ground_truth.assign(ext.count(), 0);
  std::normal_distribution<double> noise(0.0, 0.02);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      int p = ext.index(x, y);
      double d = std::hypot(x - cx, y - cy);
      bool inside = d <= radius;
      inst.ground_truth[p] = inside ? 1 : 0;
      double value = (inside ? 0.8 : 0.2) + noise(rng);
      inst.image.intensity[p] = std::clamp(value, 0.0, 1.0);
    }

  int seed_r = std::max(2, static_cast<int>(radius / 3));
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      int p = ext.index(x, y);
      if (std::hypot(x - cx, y - cy) <= seed_r) inst.image.seeds[p] = kSeedForeground;
      else if (x == 0 || y == 0 || x == width - 1 || y == height - 1)
        inst.image.seeds[p] = kSeedBackground;
    }
  return inst;
}

// ---------------------------------------------------------------------------
// Perimeter study

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgumentError("need >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = std::accumulate(x.begin(), x.end(), 0.0);
  double sy = std::accumulate(y.begin(), y.end(), 0.0);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  LinearFit fit;
  double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_tot = syy - sy * sy / n;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += r * r;
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

namespace {

struct ShapeSpec {
  bool disc;
  double size;
};

PerimeterRow run_shape(const ShapeSpec& spec) {
  const int margin = 6;
  const int half = static_cast<int>(std::ceil(spec.disc ? spec.size : spec.size / 2.0)) + margin;
  const int n = 2 * half + 1;
  Extents ext{n, n, 1};
  const double c = half;  // center

  std::vector<std::uint8_t> seeds(ext.count(), kSeedNone);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      bool inside;
      if (spec.disc) {
        inside = (x - c) * (x - c) + (y - c) * (y - c) <= spec.size * spec.size;
      } else {
        inside = std::abs(x - c) <= spec.size / 2.0 && std::abs(y - c) <= spec.size / 2.0;
      }
      if (inside) seeds[ext.index(x, y)] = kSeedForeground;
      else if (x == 0 || y == 0 || x == n - 1 || y == n - 1)
        seeds[ext.index(x, y)] = kSeedBackground;
    }

  PerimeterRow row;
  row.shape = spec.disc ? "disc" : "square";
  row.size = spec.size;
  row.analytic_perimeter = spec.disc ? 2.0 * M_PI * spec.size : 4.0 * spec.size;

  GridGraph grid = grid_graph(ext, Vector::Ones(ext.count()), seeds);
  SolveResult sol = solve(grid.graph, SolverConfig::strict());
  Vector cap_sq = grid.graph.capacity.cwiseProduct(grid.graph.capacity);
  row.ccmf_energy = 2.0 * sol.dual.lambda.dot(cap_sq);

  Vector uniform = Vector::Ones(static_cast<Eigen::Index>(
      2 * (n - 1) * n));  // 4-connected lattice edge count for an n x n grid
  row.gc_cost = classical_maxflow(grid_edge_graph(ext, seeds, uniform)).value;
  return row;
}

}  // namespace

PerimeterStudy perimeter_study(int threads) {
  return perimeter_study({5, 6, 7, 8, 9, 10, 11, 12}, {8, 10, 12, 14, 16, 18, 20}, threads);
}

PerimeterStudy perimeter_study(const std::vector<double>& disc_radii,
                               const std::vector<double>& square_sides, int threads) {
  std::vector<ShapeSpec> specs;
  for (double r : disc_radii) specs.push_back({true, r});
  for (double a : square_sides) specs.push_back({false, a});
  if (specs.size() < 2) throw InvalidArgumentError("need at least two shapes");

  PerimeterStudy study;
  study.rows.resize(specs.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < specs.size(); ++i) study.rows[i] = run_shape(specs[i]);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next.fetch_add(1); i < specs.size(); i = next.fetch_add(1))
        study.rows[i] = run_shape(specs[i]);
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<double> per_all, ccmf_all, gc_all, per_disc, ccmf_disc, per_sq, ccmf_sq;
  for (const PerimeterRow& row : study.rows) {
    per_all.push_back(row.analytic_perimeter);
    ccmf_all.push_back(row.ccmf_energy);
    gc_all.push_back(row.gc_cost);
    if (row.shape == "disc") {
      per_disc.push_back(row.analytic_perimeter);
      ccmf_disc.push_back(row.ccmf_energy);
    } else {
      per_sq.push_back(row.analytic_perimeter);
      ccmf_sq.push_back(row.ccmf_energy);
    }
  }
  study.ccmf_fit = fit_line(per_all, ccmf_all);
  study.gc_fit = fit_line(per_all, gc_all);
  study.disc_slope = fit_line(per_disc, ccmf_disc).slope;
  study.square_slope = fit_line(per_sq, ccmf_sq).slope;
  return study;
}

// ---------------------------------------------------------------------------
// Catenoid

double catenoid_waist(double ring_radius, double half_separation) {
  if (!(ring_radius > 0.0) || !(half_separation >= 0.0))
    throw InvalidArgumentError("ring radius must be positive, separation nonnegative");
  if (half_separation == 0.0) return ring_radius;
  // Critical ratio: max of m/cosh(m) at m* where m* tanh(m*) = 1.
  const double m_star = 1.1996786402577338;
  const double critical = m_star / std::cosh(m_star);  // ~0.6627
  if (half_separation / ring_radius >= critical)
    throw InvalidArgumentError("no catenoid exists for this ring separation");

  // phi(c) = c cosh(h/c) - R is decreasing then increasing on (0, R];
  // the stable (minimal-area) catenoid is the larger root. phi(R) > 0 and
  // phi < 0 at the minimizer c_min = h / m*, so bisect on [c_min, R].
  auto phi = [&](double c) { return c * std::cosh(half_separation / c) - ring_radius; };
  double lo = half_separation / m_star, hi = ring_radius;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (phi(mid) > 0.0) hi = mid;
    else lo = mid;
    if (hi - lo < 1e-14 * ring_radius) break;
  }
  return 0.5 * (lo + hi);
}

double CatenoidPhantom::profile(double z) const {
  return waist * std::cosh((z - center_z) / waist);
}

CatenoidPhantom catenoid_phantom(int grid_size, double ring_radius, double half_separation) {
  if (grid_size < 16) throw InvalidArgumentError("grid too small for the catenoid phantom");
  double waist = catenoid_waist(ring_radius, half_separation);  // validates the ratio

  CatenoidPhantom ph;
  ph.extents = {grid_size, grid_size, grid_size};
  ph.ring_radius = ring_radius;
  ph.half_separation = half_separation;
  ph.waist = waist;
  ph.center_z = grid_size / 2.0;
  ph.ring_low = static_cast<int>(std::lround(ph.center_z - half_separation));
  ph.ring_high = static_cast<int>(std::lround(ph.center_z + half_separation));
  if (ph.ring_low < 1 || ph.ring_high > grid_size - 2)
    throw InvalidArgumentError("rings do not fit inside the grid");
  double cx = (grid_size - 1) / 2.0, cy = (grid_size - 1) / 2.0;
  if (ring_radius > std::min(cx, cy) - 2)
    throw InvalidArgumentError("rings do not fit inside the grid");

  ph.seeds.assign(ph.extents.count(), kSeedNone);
  for (int z = 0; z < grid_size; ++z)
    for (int y = 0; y < grid_size; ++y)
      for (int x = 0; x < grid_size; ++x) {
        int p = ph.extents.index(x, y, z);
        bool boundary = x == 0 || y == 0 || z == 0 || x == grid_size - 1 || y == grid_size - 1 ||
                        z == grid_size - 1;
        if (boundary) {
          ph.seeds[p] = kSeedBackground;
          continue;
        }
        if (z == ph.ring_low || z == ph.ring_high) {
          double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
          if (d2 <= ring_radius * ring_radius) ph.seeds[p] = kSeedForeground;
        }
      }

  ph.grid = grid_graph(ph.extents, Vector::Ones(ph.extents.count()), ph.seeds);
  return ph;
}

double catenoid_rmse(const CatenoidPhantom& phantom, const std::vector<std::uint8_t>& voxel_mask) {
  if (static_cast<int>(voxel_mask.size()) != phantom.extents.count())
    throw DimensionError("mask length != voxel count");
  double sum_sq = 0.0;
  int slices = 0;
  for (int z = phantom.ring_low; z <= phantom.ring_high; ++z) {
    int area = 0;
    for (int y = 0; y < phantom.extents.y; ++y)
      for (int x = 0; x < phantom.extents.x; ++x)
        area += voxel_mask[phantom.extents.index(x, y, z)] ? 1 : 0;
    double measured = std::sqrt(static_cast<double>(area) / M_PI);
    double err = measured - phantom.profile(z);
    sum_sq += err * err;
    ++slices;
  }
  return std::sqrt(sum_sq / slices);
}

// ---------------------------------------------------------------------------
// Zachary karate club

namespace {

struct WeightedEdge {
  int a, b;
  double w;
};

// The 78 weighted ties of the karate-club network (interaction counts),
// members 0..33; member 0 is the instructor, member 33 the club president.
constexpr std::array<WeightedEdge, 78> kKarateEdges{{
    {0, 1, 4},   {0, 2, 5},   {0, 3, 3},   {0, 4, 3},   {0, 5, 3},   {0, 6, 3},   {0, 7, 2},
    {0, 8, 2},   {0, 10, 2},  {0, 11, 3},  {0, 12, 1},  {0, 13, 3},  {0, 17, 2},  {0, 19, 2},
    {0, 21, 2},  {0, 31, 2},  {1, 2, 6},   {1, 3, 3},   {1, 7, 4},   {1, 13, 5},  {1, 17, 1},
    {1, 19, 2},  {1, 21, 2},  {1, 30, 2},  {2, 3, 3},   {2, 7, 4},   {2, 8, 5},   {2, 9, 1},
    {2, 13, 3},  {2, 27, 2},  {2, 28, 2},  {2, 32, 2},  {3, 7, 3},   {3, 12, 3},  {3, 13, 3},
    {4, 6, 2},   {4, 10, 3},  {5, 6, 5},   {5, 10, 3},  {5, 16, 3},  {6, 16, 3},  {8, 30, 3},
    {8, 32, 3},  {8, 33, 4},  {9, 33, 2},  {13, 33, 3}, {14, 32, 3}, {14, 33, 2}, {15, 32, 3},
    {15, 33, 4}, {18, 32, 1}, {18, 33, 2}, {19, 33, 1}, {20, 32, 3}, {20, 33, 1}, {22, 32, 2},
    {22, 33, 3}, {23, 25, 5}, {23, 27, 4}, {23, 29, 3}, {23, 32, 5}, {23, 33, 4}, {24, 25, 2},
    {24, 27, 3}, {24, 31, 2}, {25, 31, 7}, {26, 29, 4}, {26, 33, 2}, {27, 33, 4}, {28, 31, 2},
    {28, 33, 2}, {29, 32, 4}, {29, 33, 2}, {30, 32, 4}, {30, 33, 3}, {31, 32, 4}, {31, 33, 4},
    {32, 33, 5},
}};

// Post-split membership; 1 = stayed with the instructor (member 0).
constexpr std::array<std::uint8_t, 34> kInstructorSide{
    1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0, 0, 1,
    1, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};

}  // namespace

KarateInstance zachary_graph() {
  const int members = 34;
  KarateInstance inst;
  inst.instructor = 0;
  inst.president = 33;
  inst.historical_side.assign(kInstructorSide.begin(), kInstructorSide.end());

  // Node capacity = mean affinity of the incident ties, on the original graph.
  std::array<double, 34> weight_sum{};
  std::array<int, 34> degree{};
  for (const WeightedEdge& e : kKarateEdges) {
    weight_sum[e.a] += e.w;
    weight_sum[e.b] += e.w;
    ++degree[e.a];
    ++degree[e.b];
  }

  const int source = 0, sink = 1;
  inst.member_node.assign(members, 0);
  inst.member_node[inst.instructor] = -1;
  inst.member_node[inst.president] = -2;
  int next = 2;
  for (int v = 0; v < members; ++v)
    if (v != inst.instructor && v != inst.president) inst.member_node[v] = next++;

  auto to_node = [&](int member) {
    if (member == inst.instructor) return source;
    if (member == inst.president) return sink;
    return inst.member_node[member];
  };

  std::vector<std::pair<int, int>> edges;
  std::set<std::pair<int, int>> seen;
  for (const WeightedEdge& e : kKarateEdges) {
    int u = to_node(e.a), v = to_node(e.b);
    if (u == v) continue;
    if ((u == source && v == sink) || (u == sink && v == source)) continue;
    auto key = std::minmax(u, v);
    if (!seen.insert({key.first, key.second}).second) continue;
    edges.emplace_back(u, v);
  }
  int st_edge = static_cast<int>(edges.size());
  edges.emplace_back(sink, source);

  Vector capacity(next);
  double total = 0.0;
  for (int v = 0; v < members; ++v) {
    if (v == inst.instructor || v == inst.president) continue;
    double mean = weight_sum[v] / degree[v];
    capacity[inst.member_node[v]] = mean;
    total += mean;
  }
  capacity[source] = std::max(total, 1.0);
  capacity[sink] = capacity[source];

  inst.graph = TransportGraph::create(next, std::move(edges), source, sink, st_edge,
                                      std::move(capacity));
  return inst;
}

}  // namespace ccmf
