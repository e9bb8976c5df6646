#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gcrelay/rng.hpp"

namespace gcrelay::geom {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

inline double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 normalized(const Vec3& a) {
  const double n = norm(a);
  return {a.x / n, a.y / n, a.z / n};
}

// Radius of the unit-area sphere.
inline constexpr double kSphereRadius = 0.28209479177387814;  // 1/(2*sqrt(pi))

// Half the circumference of a great circle, the largest possible geodesic
// distance between two points of the sphere.
inline constexpr double kMaxGeodesic = 0.8862269254527580;  // sqrt(pi)/2

// One node's track: a great circle given by its pole, with an orthonormal
// frame spanning the circle's plane and an angular offset of lattice point 0.
struct GreatCircle {
  Vec3 pole;    // unit vector
  double phase; // in [0, 2*pi)
  Vec3 e1, e2;  // orthonormal, both perpendicular to pole
};

// Geometry attached to one unordered node pair (i < j): the selected
// intersection z of their circles, the lattice indices nearest to it on each
// circle, and the interference disk around z.
struct PairGeometry {
  std::int32_t i = 0, j = 0;
  Vec3 z;
  std::int32_t a = 0;  // lattice index on circle i closest to z
  std::int32_t b = 0;  // lattice index on circle j closest to z
  double disk_radius = 0.0;
};

struct TypicalityReport {
  std::vector<std::int32_t> counts;  // one per pair, same order as pairs
  double expected = 0.0;             // mu = (n-2) * band-hit probability
  double band_low = 0.0, band_high = 0.0;
  bool typical = false;
  std::int32_t min_count = 0, max_count = 0;
  double mean_count = 0.0;
};

// Per-node neighbor lookup: for node i at lattice index p, entries(i, p)
// lists every j (ascending) whose pair meets i at p, with j's meeting index.
struct NeighborIndex {
  struct Entry {
    std::int32_t other;
    std::int32_t other_pos;
  };
  std::vector<std::vector<std::int32_t>> offsets;  // [node][pos..pos+1]
  std::vector<std::vector<Entry>> entries;         // [node]

  std::pair<const Entry*, const Entry*> at(int node, int pos) const {
    const auto& off = offsets[node];
    const auto& e = entries[node];
    return {e.data() + off[pos], e.data() + off[pos + 1]};
  }
};

struct Configuration {
  int n = 0;           // node count, even perfect square
  int m = 0;           // sqrt(n), lattice points per circle
  double delta = 0.0;  // interference guard-zone parameter
  double disk_radius = 0.0;  // (2+delta)*sqrt(pi/n)
  std::uint64_t seed = 0;
  int pole_resamples = 0;

  std::vector<GreatCircle> circles;                  // n
  std::vector<PairGeometry> pairs;                   // n(n-1)/2
  std::vector<std::array<std::int32_t, 2>> sd_pairs; // n/2, {source, dest}
  std::vector<std::int32_t> pair_of_node;            // node -> S-D pair id
  std::vector<bool> is_source, is_dest;

  TypicalityReport report;
  bool typical = false;

  // Caches derived from the circles; immutable once built.
  std::vector<std::vector<Vec3>> lattice_points;  // [node][k]
  NeighborIndex neighbor_index;

  std::size_t pair_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    const std::size_t nn = static_cast<std::size_t>(n);
    return static_cast<std::size_t>(i) * (2 * nn - i - 1) / 2 + (j - i - 1);
  }

  const Vec3& position_of(int node, int lattice_index) const {
    return lattice_points[node][lattice_index];
  }
};

// Geodesic distance between two points of the sphere, r*atan2(|pxq|, p.q).
double geodesic_distance(const Vec3& p, const Vec3& q);

// Point at angle phase + 2*pi*k/m in the circle's frame.
Vec3 lattice_position(const GreatCircle& circle, int k, int m);

// Index k in [0, m) whose lattice point is closest to p along the circle.
int nearest_lattice_index(const GreatCircle& circle, const Vec3& p, int m);

// The two intersection points of two non-coincident great circles.
std::array<Vec3, 2> circle_intersections(const GreatCircle& a,
                                         const GreatCircle& b);

// True iff the circle passes within radius_geodesic of center, i.e. the
// circle's pole lies in the equatorial band |d(pole, center) - pi*r/2| <= R.
bool circle_intersects_disk(const GreatCircle& circle, const Vec3& center,
                            double radius_geodesic);

// Probability that a uniformly random great circle hits a disk of geodesic
// radius R: the area fraction of the band, sin(R/r), clamped to 1.
double band_hit_probability(double radius_geodesic);

// Uniform point on the unit sphere (pole sampling; normalized 3-D Gaussian).
Vec3 sample_pole(RngStream& rng);

// Orthonormal frame perpendicular to the pole, deterministic in the pole.
std::pair<Vec3, Vec3> make_frame(const Vec3& pole);

GreatCircle make_circle(const Vec3& pole, double phase);

// Counts, for every pair, the other circles crossing its disk and compares
// each count against [band_low, band_high] times the expected count.
TypicalityReport typicality_report(const Configuration& config,
                                   double band_low, double band_high);

// Builds a full random configuration: uniform poles (coincident poles
// resampled), uniform phases, equiprobable intersection choice per pair,
// uniform random S-D perfect matching, typicality evaluated.
Configuration sample_configuration(int n, double delta, RngStream& rng,
                                   double band_low = 0.5,
                                   double band_high = 2.0);

// Builds a configuration from caller-supplied circles (tests use this for
// degenerate layouts that sampling would resample away).
Configuration build_configuration(int n, double delta,
                                  std::vector<GreatCircle> circles,
                                  std::vector<std::array<std::int32_t, 2>> sd_pairs,
                                  RngStream& rng, double band_low = 0.5,
                                  double band_high = 2.0);

// JSON text: {n, delta, seed, typical, counts: [min, max, mean]}.
std::string configuration_summary_json(const Configuration& config);

void validate_node_count(int n);  // throws std::invalid_argument

}  // namespace gcrelay::geom
