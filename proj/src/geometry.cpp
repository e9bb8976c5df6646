#include "gcrelay/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace gcrelay::geom {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Poles closer than this in |dot| are treated as the same great circle.
constexpr double kCoincidentPoleTol = 1e-12;
}  // namespace

void validate_node_count(int n) {
  if (n < 4) throw std::invalid_argument("n must be at least 4");
  const int m = static_cast<int>(std::lround(std::sqrt(double(n))));
  if (m * m != n || n % 2 != 0)
    throw std::invalid_argument("n must be an even perfect square");
}

double geodesic_distance(const Vec3& p, const Vec3& q) {
  return kSphereRadius * std::atan2(norm(cross(p, q)), dot(p, q));
}

Vec3 lattice_position(const GreatCircle& circle, int k, int m) {
  if (k < 0 || k >= m) throw std::out_of_range("lattice index out of range");
  const double theta = circle.phase + kTwoPi * k / m;
  return (circle.e1 * std::cos(theta) + circle.e2 * std::sin(theta)) *
         kSphereRadius;
}

int nearest_lattice_index(const GreatCircle& circle, const Vec3& p, int m) {
  const double theta = std::atan2(dot(p, circle.e2), dot(p, circle.e1));
  double delta = std::fmod(theta - circle.phase, kTwoPi);
  if (delta < 0) delta += kTwoPi;
  const int k = static_cast<int>(std::lround(delta / (kTwoPi / m)));
  return k == m ? 0 : k;
}

std::array<Vec3, 2> circle_intersections(const GreatCircle& a,
                                         const GreatCircle& b) {
  const Vec3 axis = cross(a.pole, b.pole);
  const double len = norm(axis);
  if (len < kCoincidentPoleTol)
    throw std::invalid_argument("coincident great circles do not intersect");
  const Vec3 u = axis * (1.0 / len);
  return {u * kSphereRadius, u * (-kSphereRadius)};
}

bool circle_intersects_disk(const GreatCircle& circle, const Vec3& center,
                            double radius_geodesic) {
  const Vec3 pole_point = circle.pole * kSphereRadius;
  const double d = geodesic_distance(pole_point, center);
  return std::abs(d - 0.5 * kPi * kSphereRadius) <= radius_geodesic;
}

double band_hit_probability(double radius_geodesic) {
  const double half_width = radius_geodesic / kSphereRadius;
  if (half_width >= 0.5 * kPi) return 1.0;
  return std::sin(half_width);
}

Vec3 sample_pole(RngStream& rng) {
  while (true) {
    const Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = norm(v);
    if (n > 1e-12) return v * (1.0 / n);
  }
}

std::pair<Vec3, Vec3> make_frame(const Vec3& pole) {
  const Vec3 ref = std::abs(pole.z) > 1.0 - 1e-9 ? Vec3{1, 0, 0} : Vec3{0, 0, 1};
  const Vec3 e1 = normalized(cross(ref, pole));
  const Vec3 e2 = cross(pole, e1);
  return {e1, e2};
}

GreatCircle make_circle(const Vec3& pole, double phase) {
  GreatCircle c;
  c.pole = normalized(pole);
  c.phase = phase;
  std::tie(c.e1, c.e2) = make_frame(c.pole);
  return c;
}

TypicalityReport typicality_report(const Configuration& config,
                                   double band_low, double band_high) {
  if (!(band_low > 0.0 && band_low < band_high))
    throw std::invalid_argument("typicality band must satisfy 0 < low < high");

  TypicalityReport rep;
  rep.band_low = band_low;
  rep.band_high = band_high;
  rep.expected = (config.n - 2) * band_hit_probability(config.disk_radius);
  rep.counts.resize(config.pairs.size());

  // |pole . u_z| <= sin(R/r) is the pole-band form of circle_intersects_disk;
  // one dot product per (pair, circle) instead of a cross product.
  const double half_width = config.disk_radius / kSphereRadius;
  const double band_sin =
      half_width >= 0.5 * kPi ? 1.0 : std::sin(half_width);

  std::int64_t total = 0;
  rep.min_count = config.n;
  rep.max_count = 0;
  bool all_in_band = true;
  const double lo = band_low * rep.expected;
  const double hi = band_high * rep.expected;
  for (std::size_t p = 0; p < config.pairs.size(); ++p) {
    const auto& pg = config.pairs[p];
    const Vec3 uz = normalized(pg.z);
    std::int32_t count = 0;
    for (int k = 0; k < config.n; ++k) {
      if (k == pg.i || k == pg.j) continue;
      if (std::abs(dot(config.circles[k].pole, uz)) <= band_sin) ++count;
    }
    rep.counts[p] = count;
    total += count;
    rep.min_count = std::min(rep.min_count, count);
    rep.max_count = std::max(rep.max_count, count);
    if (count < lo || count > hi) all_in_band = false;
  }
  rep.mean_count =
      config.pairs.empty() ? 0.0 : double(total) / double(config.pairs.size());
  rep.typical = all_in_band;
  return rep;
}

namespace {

void build_derived(Configuration& cfg, RngStream& rng, double band_low,
                   double band_high) {
  const int n = cfg.n;
  const int m = cfg.m;

  cfg.pairs.resize(std::size_t(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      PairGeometry pg;
      pg.i = i;
      pg.j = j;
      const auto pts = circle_intersections(cfg.circles[i], cfg.circles[j]);
      pg.z = pts[rng.next_below(2)];
      pg.a = nearest_lattice_index(cfg.circles[i], pg.z, m);
      pg.b = nearest_lattice_index(cfg.circles[j], pg.z, m);
      pg.disk_radius = cfg.disk_radius;
      cfg.pairs[cfg.pair_index(i, j)] = pg;
    }
  }

  cfg.lattice_points.assign(n, {});
  for (int i = 0; i < n; ++i) {
    cfg.lattice_points[i].resize(m);
    for (int k = 0; k < m; ++k)
      cfg.lattice_points[i][k] = lattice_position(cfg.circles[i], k, m);
  }

  // Meeting-position buckets, sorted by (position, other id).
  auto& idx = cfg.neighbor_index;
  idx.offsets.assign(n, {});
  idx.entries.assign(n, {});
  std::vector<std::vector<std::pair<std::int32_t, NeighborIndex::Entry>>> tmp(n);
  for (const auto& pg : cfg.pairs) {
    tmp[pg.i].push_back({pg.a, {pg.j, pg.b}});
    tmp[pg.j].push_back({pg.b, {pg.i, pg.a}});
  }
  for (int i = 0; i < n; ++i) {
    auto& v = tmp[i];
    std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) {
      return x.first != y.first ? x.first < y.first
                                : x.second.other < y.second.other;
    });
    idx.offsets[i].assign(m + 1, 0);
    idx.entries[i].reserve(v.size());
    for (const auto& [pos, e] : v) {
      ++idx.offsets[i][pos + 1];
      idx.entries[i].push_back(e);
    }
    for (int p = 0; p < m; ++p) idx.offsets[i][p + 1] += idx.offsets[i][p];
  }

  cfg.report = typicality_report(cfg, band_low, band_high);
  cfg.typical = cfg.report.typical;
}

void assign_sd_roles(Configuration& cfg) {
  const int n = cfg.n;
  cfg.pair_of_node.assign(n, -1);
  cfg.is_source.assign(n, false);
  cfg.is_dest.assign(n, false);
  for (std::size_t p = 0; p < cfg.sd_pairs.size(); ++p) {
    const auto [s, d] = cfg.sd_pairs[p];
    cfg.pair_of_node[s] = static_cast<std::int32_t>(p);
    cfg.pair_of_node[d] = static_cast<std::int32_t>(p);
    cfg.is_source[s] = true;
    cfg.is_dest[d] = true;
  }
  for (int i = 0; i < n; ++i)
    if (cfg.pair_of_node[i] < 0)
      throw std::invalid_argument("S-D pairs must cover every node exactly once");
}

}  // namespace

Configuration sample_configuration(int n, double delta, RngStream& rng,
                                   double band_low, double band_high) {
  validate_node_count(n);
  if (delta <= 0.0) throw std::invalid_argument("delta must be positive");

  Configuration cfg;
  cfg.n = n;
  cfg.m = static_cast<int>(std::lround(std::sqrt(double(n))));
  cfg.delta = delta;
  cfg.disk_radius = (2.0 + delta) * std::sqrt(kPi / n);

  cfg.circles.resize(n);
  std::vector<Vec3> poles(n);
  for (int i = 0; i < n; ++i) {
    Vec3 pole = sample_pole(rng);
    bool clash = true;
    while (clash) {
      clash = false;
      for (int j = 0; j < i; ++j) {
        if (std::abs(dot(pole, poles[j])) > 1.0 - kCoincidentPoleTol) {
          pole = sample_pole(rng);
          ++cfg.pole_resamples;
          clash = true;
          break;
        }
      }
    }
    poles[i] = pole;
  }
  for (int i = 0; i < n; ++i)
    cfg.circles[i] = make_circle(poles[i], kTwoPi * rng.next_double());

  // Uniform random perfect matching; first element of each pair is the source.
  std::vector<std::int32_t> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.next_below(std::uint32_t(i) + 1)]);
  cfg.sd_pairs.resize(n / 2);
  for (int p = 0; p < n / 2; ++p) cfg.sd_pairs[p] = {perm[2 * p], perm[2 * p + 1]};
  assign_sd_roles(cfg);

  build_derived(cfg, rng, band_low, band_high);
  return cfg;
}

Configuration build_configuration(int n, double delta,
                                  std::vector<GreatCircle> circles,
                                  std::vector<std::array<std::int32_t, 2>> sd_pairs,
                                  RngStream& rng, double band_low,
                                  double band_high) {
  validate_node_count(n);
  if (delta <= 0.0) throw std::invalid_argument("delta must be positive");
  if (static_cast<int>(circles.size()) != n)
    throw std::invalid_argument("need one circle per node");
  if (static_cast<int>(sd_pairs.size()) != n / 2)
    throw std::invalid_argument("need n/2 S-D pairs");

  Configuration cfg;
  cfg.n = n;
  cfg.m = static_cast<int>(std::lround(std::sqrt(double(n))));
  cfg.delta = delta;
  cfg.disk_radius = (2.0 + delta) * std::sqrt(kPi / n);
  cfg.circles = std::move(circles);
  cfg.sd_pairs = std::move(sd_pairs);
  assign_sd_roles(cfg);
  build_derived(cfg, rng, band_low, band_high);
  return cfg;
}

std::string configuration_summary_json(const Configuration& config) {
  nlohmann::json j;
  j["n"] = config.n;
  j["delta"] = config.delta;
  j["seed"] = config.seed;
  j["typical"] = config.typical;
  j["counts"] = {config.report.min_count, config.report.max_count,
                 config.report.mean_count};
  return j.dump();
}

}  // namespace gcrelay::geom
