#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>

#include "hkconv/metric_space.hpp"

namespace hkconv {

/// Point [x, r] of the geometric cone over a finite metric space.
///
/// The radius r is the square root of the Dirac mass the point represents:
/// [x, r] <-> r^2 delta_x. Radii below kVertexRadius collapse to the vertex,
/// which carries the sentinel index kVertex.
struct ConePoint {
  static constexpr std::size_t kVertex = static_cast<std::size_t>(-1);
  static constexpr double kVertexRadius = 1e-15;

  std::size_t x = kVertex;
  double r = 0.0;

  ConePoint() = default;
  ConePoint(std::size_t point, double radius) : x(point), r(radius) {
    if (!(radius >= 0.0) || !std::isfinite(radius))
      throw std::invalid_argument("ConePoint: radius must be finite and nonnegative");
    if (radius < kVertexRadius) {
      x = kVertex;
      r = 0.0;
    }
  }

  static ConePoint vertex() { return {}; }
  static ConePoint from_mass(std::size_t point, double mass) {
    if (!(mass >= 0.0)) throw std::invalid_argument("ConePoint: negative mass");
    return {point, std::sqrt(mass)};
  }

  bool is_vertex() const noexcept { return x == kVertex; }
  double mass() const noexcept { return r * r; }

  friend bool operator==(const ConePoint& a, const ConePoint& b) noexcept {
    return a.x == b.x && a.r == b.r;
  }
};

// Cone distance from radii and the base distance, cosine form.
inline double cone_distance(double r, double s, double base_dist, double cutoff = std::numbers::pi) {
  const double ang = std::min(base_dist, cutoff);
  return std::sqrt(std::max(0.0, r * r + s * s - 2.0 * r * s * std::cos(ang)));
}

// Same quantity in the |r - s|^2 + 4 r s sin^2(angle / 2) form.
inline double cone_distance_sine_form(double r, double s, double base_dist,
                                      double cutoff = std::numbers::pi) {
  const double half = std::sin(std::min(base_dist, cutoff) / 2.0);
  return std::sqrt((r - s) * (r - s) + 4.0 * r * s * half * half);
}

inline double base_distance(const ConePoint& y0, const ConePoint& y1, const FiniteMetricSpace& space) {
  if (y0.is_vertex() || y1.is_vertex()) return 0.0;
  return space.distance(y0.x, y1.x);
}

/// Truncated cone distance d_{a,C}; the cutoff angle must lie in (0, pi].
inline double cone_distance(const ConePoint& y0, const ConePoint& y1, const FiniteMetricSpace& space,
                            double cutoff = std::numbers::pi) {
  if (!(cutoff > 0.0 && cutoff <= std::numbers::pi))
    throw std::domain_error("cone_distance: cutoff must lie in (0, pi]");
  return cone_distance(y0.r, y1.r, base_distance(y0, y1, space), cutoff);
}

enum class GeodesicCase { constant, radial, through_vertex, rotational };

inline const char* to_string(GeodesicCase c) {
  switch (c) {
    case GeodesicCase::constant: return "constant";
    case GeodesicCase::radial: return "radial";
    case GeodesicCase::through_vertex: return "through-vertex";
    case GeodesicCase::rotational: return "rotational";
  }
  return "unknown";
}

/// Constant-speed geodesic of (C[X], d_C) between two cone points.
///
/// The base part of the curve is described by arc(t), the fraction of the
/// way from x(y0) to x(y1) along a geodesic of X.
class ConeGeodesic {
 public:
  ConeGeodesic(ConePoint y0, ConePoint y1, double base_dist) : y0_(y0), y1_(y1), d_(base_dist) {
    if (y0_ == y1_) {
      kind_ = GeodesicCase::constant;
    } else if (y0_.is_vertex() || y1_.is_vertex()) {
      kind_ = GeodesicCase::radial;
    } else if (d_ >= std::numbers::pi) {
      kind_ = GeodesicCase::through_vertex;
      switch_time_ = y0_.r / (y0_.r + y1_.r);
    } else {
      kind_ = GeodesicCase::rotational;
    }
  }

  GeodesicCase kind() const noexcept { return kind_; }
  const ConePoint& start() const noexcept { return y0_; }
  const ConePoint& end() const noexcept { return y1_; }
  double base_length() const noexcept { return d_; }
  /// r0 / (r0 + r1); meaningful for the through-vertex case only.
  double switch_time() const noexcept { return switch_time_; }
  double length() const noexcept { return cone_distance(y0_.r, y1_.r, d_); }

  double radius(double t) const {
    check_time(t);
    const double r0 = y0_.r, r1 = y1_.r;
    switch (kind_) {
      case GeodesicCase::constant: return r0;
      case GeodesicCase::radial: return y0_.is_vertex() ? t * r1 : (1.0 - t) * r0;
      case GeodesicCase::through_vertex:
        return t <= switch_time_ ? r0 - (r0 + r1) * t : (r0 + r1) * t - r0;
      case GeodesicCase::rotational: {
        const double sq = (1.0 - t) * (1.0 - t) * r0 * r0 + t * t * r1 * r1 +
                          2.0 * t * (1.0 - t) * r0 * r1 * std::cos(d_);
        return std::sqrt(std::max(0.0, sq));
      }
    }
    return 0.0;
  }

  /// Angle theta(t) in [0, d]: arc length travelled along the base geodesic.
  double angle(double t) const {
    check_time(t);
    switch (kind_) {
      case GeodesicCase::constant: return 0.0;
      case GeodesicCase::radial: return y0_.is_vertex() ? d_ : 0.0;
      case GeodesicCase::through_vertex: return t <= switch_time_ ? 0.0 : d_;
      case GeodesicCase::rotational: {
        const double r = radius(t);
        const double ratio = ((1.0 - t) * y0_.r + t * y1_.r * std::cos(d_)) / r;
        return std::acos(std::clamp(ratio, -1.0, 1.0));
      }
    }
    return 0.0;
  }

  /// Fraction of the base geodesic travelled at time t.
  double arc(double t) const {
    if (kind_ == GeodesicCase::radial) return y0_.is_vertex() ? 1.0 : 0.0;
    return d_ > 0.0 ? std::clamp(angle(t) / d_, 0.0, 1.0) : 0.0;
  }

  /// Cone point at time t; may append an interpolated point to space.
  ConePoint at(double t, FiniteMetricSpace& space) const {
    const double r = radius(t);
    if (r < ConePoint::kVertexRadius) return ConePoint::vertex();
    switch (kind_) {
      case GeodesicCase::constant: return y0_;
      case GeodesicCase::radial: return {y0_.is_vertex() ? y1_.x : y0_.x, r};
      case GeodesicCase::through_vertex: return {t <= switch_time_ ? y0_.x : y1_.x, r};
      case GeodesicCase::rotational: return {space.geodesic_point(y0_.x, y1_.x, arc(t)), r};
    }
    return ConePoint::vertex();
  }

 private:
  static void check_time(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::out_of_range("ConeGeodesic: time outside [0,1]");
  }

  ConePoint y0_, y1_;
  double d_ = 0.0;
  GeodesicCase kind_ = GeodesicCase::constant;
  double switch_time_ = 0.0;
};

inline ConeGeodesic cone_geodesic(const ConePoint& y0, const ConePoint& y1, const FiniteMetricSpace& space) {
  const ConeGeodesic g(y0, y1, base_distance(y0, y1, space));
  if (g.kind() == GeodesicCase::rotational && g.base_length() > 0.0 && !space.has_interpolation())
    throw BackendMissing("cone_geodesic: base space offers no geodesic interpolation");
  return g;
}

struct MinRadius {
  double t_min;
  double r_min;
};

/// Minimum of the radius along the geodesic joining [x0, r0] and [x1, r1] at
/// base distance d. Requires r0 r1 > 0 and 0 <= d < pi. For equal endpoints
/// the radius is constant and (0, r0) is reported.
inline MinRadius min_radius(double r0, double r1, double d) {
  if (!(r0 > 0.0 && r1 > 0.0)) throw std::domain_error("min_radius: both radii must be positive");
  if (!(d >= 0.0 && d < std::numbers::pi)) throw std::domain_error("min_radius: base distance must lie in [0, pi)");
  if (r0 == r1 && d == 0.0) return {0.0, r0};
  const double c = std::cos(d);
  if (c >= r0 / r1) return {0.0, r0};
  if (c >= r1 / r0) return {1.0, r1};
  const double dc = cone_distance(r0, r1, d);
  return {(r0 * r0 - r0 * r1 * c) / (dc * dc), r0 * r1 * std::sin(d) / dc};
}

inline MinRadius min_radius(const ConePoint& y0, const ConePoint& y1, const FiniteMetricSpace& space) {
  if (y0 == y1 && !y0.is_vertex()) return {0.0, y0.r};
  return min_radius(y0.r, y1.r, base_distance(y0, y1, space));
}

/// N * sum_i d_C^2(y_{i-1}, y_i) for samples at times 0, 1/N, ..., 1.
inline double discrete_action(std::span<const ConePoint> curve, const FiniteMetricSpace& space) {
  if (curve.size() < 2) throw std::invalid_argument("discrete_action: need at least two samples");
  const double n = static_cast<double>(curve.size() - 1);
  double acc = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double dc = cone_distance(curve[i - 1], curve[i], space);
    acc += dc * dc;
  }
  return n * acc;
}

}  // namespace hkconv
