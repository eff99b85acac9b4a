#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spacetime {

using Vector = std::vector<double>;
using ConstCoords = std::span<const double>;
using Coords = std::span<double>;

enum class ManifoldKind {
  kEuclidean,
  kCylindricalEuclidean,
  kHyperboloid,
  kMinkowski,
  kCylindricalMinkowski,
  kAntiDeSitter,
};

std::string_view to_string(ManifoldKind kind);
ManifoldKind parse_manifold_kind(std::string_view name);

class ManifoldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometry plus dimension. `spatial_dim` is N; the number of stored
/// coordinates per point is N (Euclidean kinds), N+1 (Minkowski kinds and
/// the hyperboloid) or N+2 (anti-de Sitter).
class ManifoldSpec {
 public:
  ManifoldSpec(ManifoldKind kind, int spatial_dim,
               std::optional<double> circumference = std::nullopt);

  /// Builds a spec from the total stored-coordinate count d.
  static ManifoldSpec from_embedding_dim(
      ManifoldKind kind, int embedding_dim,
      std::optional<double> circumference = std::nullopt);

  ManifoldKind kind() const { return kind_; }
  int spatial_dim() const { return spatial_dim_; }
  double circumference() const { return circumference_.value_or(0.0); }
  bool has_circumference() const { return circumference_.has_value(); }

  std::size_t ambient_dim() const;
  bool is_cylindrical() const;
  bool is_flat() const;
  bool is_quadric() const;
  /// Number of winding images the wrapped likelihood sums over for a
  /// truncation m: 2m+1 on spaces with a circular time direction, else 1.
  std::size_t image_count(int wrap_m) const;

  bool operator==(const ManifoldSpec&) const = default;

 private:
  ManifoldKind kind_;
  int spatial_dim_;
  std::optional<double> circumference_;
};

/// One translate of q along the time circle, seen from p.
struct IntervalImage {
  double s_sq = 0.0;
  double dt = 0.0;
};

/// Loss sensitivity to one image's (s_sq, dt); the input to the pullback.
struct ImageWeight {
  double d_s_sq = 0.0;
  double d_dt = 0.0;
};

struct IntervalDifferentials {
  Vector ds_sq_dp;
  Vector ds_sq_dq;
  Vector ddt_dp;
  Vector ddt_dq;
};

// Bilinear forms. Hyperboloid and Minkowski share signature (-,+,...,+);
// anti-de Sitter uses (-,-,+,...,+).
double lorentz_inner(const ManifoldSpec& spec, ConstCoords u, ConstCoords v);

/// Residual <x,x>_L + 1 of the quadric constraint (0 for flat kinds).
double quadric_residual(const ManifoldSpec& spec, ConstCoords x);

/// Throws ManifoldError when x violates the invariants of its manifold
/// beyond `tolerance` (quadric residual, upper sheet, cylinder range).
void validate_point(const ManifoldSpec& spec, ConstCoords x,
                    double tolerance = 1e-9);

double squared_distance(const ManifoldSpec& spec, ConstCoords p,
                        ConstCoords q);
double time_delta(const ManifoldSpec& spec, ConstCoords p, ConstCoords q);

/// Polar angle theta = atan2(x_-1, x_0) and radius r(x) = sqrt(1 + |x|^2)
/// of an anti-de Sitter point.
double ads_angle(ConstCoords x);
double ads_radius(ConstCoords x);

/// Writes image_count(m) images, ordered n = -m..m, into `out`.
void interval_images(const ManifoldSpec& spec, ConstCoords p, ConstCoords q,
                     int wrap_m, std::span<IntervalImage> out);
std::vector<IntervalImage> interval_images(const ManifoldSpec& spec,
                                           ConstCoords p, ConstCoords q,
                                           int wrap_m);

/// Accumulates sum_n (w_n.d_s_sq * ds_n + w_n.d_dt * ddt_n) into the ambient
/// differentials with respect to p and q. `weights` has one entry per image
/// (n = -m..m) and determines m.
void pullback_interval(const ManifoldSpec& spec, ConstCoords p, ConstCoords q,
                       std::span<const ImageWeight> weights, Coords grad_p,
                       Coords grad_q);

/// Exact partials of squared_distance and time_delta (the n = 0 image).
IntervalDifferentials interval_differentials(const ManifoldSpec& spec,
                                             ConstCoords p, ConstCoords q);

/// Steepest-descent tangent for a loss with ambient differential `df`.
/// Flat charts use the Wick-rotated gradient; the hyperboloid projects
/// g^-1 df; anti-de Sitter applies the double projection.
Vector descent_tangent(const ManifoldSpec& spec, ConstCoords p,
                       ConstCoords df);

/// Tangent-space projection Pi_p v = v + <v,p>_L p (quadric kinds only).
Vector tangent_projection(const ManifoldSpec& spec, ConstCoords p,
                          ConstCoords v);

Vector exp_map(const ManifoldSpec& spec, ConstCoords p, ConstCoords v);
/// Same as exp_map but writes the result over p.
void exp_map_inplace(const ManifoldSpec& spec, Coords p, ConstCoords v);

/// Pulls a drifted point back onto its manifold; wraps cylinder time into
/// [0, C). Throws ManifoldError if the point is too far to repair.
void project_point_inplace(const ManifoldSpec& spec, Coords p);
Vector project_point(const ManifoldSpec& spec, ConstCoords p);

Vector random_point(const ManifoldSpec& spec, double scale,
                    std::mt19937_64& rng);

/// Principal value of x in [-period/2, period/2).
double wrap_symmetric(double x, double period);

}  // namespace spacetime
