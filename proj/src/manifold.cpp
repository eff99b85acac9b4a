#include "spacetime/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace spacetime {

namespace {

constexpr double kPi = std::numbers::pi;
// Derivative guard at the non-removable singularity <p,q>_L -> +1.
constexpr double kLightconeEps = 1e-6;
// Below this |<v,v>_L| the exponential map is taken to be p + v.
constexpr double kNullNormSq = 1e-24;
// Largest relative constraint residual project_point will repair.
constexpr double kMaxRepairResidual = 0.1;

// Metric sign of ambient coordinate i.
inline double metric_sign(ManifoldKind kind, std::size_t i) {
  switch (kind) {
    case ManifoldKind::kEuclidean:
    case ManifoldKind::kCylindricalEuclidean:
      return 1.0;
    case ManifoldKind::kHyperboloid:
    case ManifoldKind::kMinkowski:
    case ManifoldKind::kCylindricalMinkowski:
      return i == 0 ? -1.0 : 1.0;
    case ManifoldKind::kAntiDeSitter:
      return i <= 1 ? -1.0 : 1.0;
  }
  return 1.0;
}

void check_dims(const ManifoldSpec& spec, std::size_t a, std::size_t b) {
  const std::size_t n = spec.ambient_dim();
  if (a != n || b != n) {
    std::ostringstream msg;
    msg << "dimension mismatch: manifold " << to_string(spec.kind())
        << " expects " << n << " coordinates, got " << a << " and " << b;
    throw ManifoldError(msg.str());
  }
}

double wrap_angle(double a) {
  // (-pi, pi]
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

// acosh(y) / sqrt(y^2 - 1) for y >= 1; tends to 1 at the lightcone.
double acosh_ratio(double y) {
  const double d = y - 1.0;
  if (d < 1e-6) return 1.0 - d / 3.0;
  return std::acosh(y) / std::sqrt(d * (y + 1.0));
}

// acos(y) / sqrt(1 - y^2) for -1 < y < 1; tends to 1 as y -> 1.
double acos_ratio(double y) {
  const double d = 1.0 - y;
  if (d < 1e-6) return 1.0 + d / 3.0;
  y = std::max(y, -1.0 + kLightconeEps);
  return std::acos(y) / std::sqrt((1.0 - y) * (1.0 + y));
}

double ads_s_sq(double inner) {
  const double y = -inner;
  if (y >= 1.0) {
    const double a = std::acosh(y);
    return a * a;
  }
  if (y >= -1.0) {
    const double a = std::acos(y);
    return -a * a;
  }
  return -kPi * kPi;
}

// d s^2 / d<p,q>_L on anti-de Sitter.
double ads_s_sq_slope(double inner) {
  const double y = -inner;
  if (y >= 1.0) return -2.0 * acosh_ratio(y);
  if (y >= -1.0) return -2.0 * acos_ratio(y);
  return 0.0;
}

double hyperboloid_s_sq(double inner) {
  const double a = std::acosh(std::max(1.0, -inner));
  return a * a;
}

double hyperboloid_s_sq_slope(double inner) {
  return -2.0 * acosh_ratio(std::max(1.0, -inner));
}

double spatial_sq(ConstCoords p, ConstCoords q, std::size_t first) {
  double acc = 0.0;
  for (std::size_t i = first; i < p.size(); ++i) {
    const double d = q[i] - p[i];
    acc += d * d;
  }
  return acc;
}

double flat_time_delta(const ManifoldSpec& spec, ConstCoords p,
                       ConstCoords q) {
  const double dt = q[0] - p[0];
  return spec.is_cylindrical() ? wrap_symmetric(dt, spec.circumference())
                               : dt;
}

void canonicalize_cylinder(const ManifoldSpec& spec, Coords x) {
  const double c = spec.circumference();
  double t = x[0] - c * std::floor(x[0] / c);
  if (t >= c || t < 0.0) t = 0.0;
  x[0] = t;
}

}  // namespace

std::string_view to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::kEuclidean:
      return "euclidean";
    case ManifoldKind::kCylindricalEuclidean:
      return "cylindrical_euclidean";
    case ManifoldKind::kHyperboloid:
      return "hyperboloid";
    case ManifoldKind::kMinkowski:
      return "minkowski";
    case ManifoldKind::kCylindricalMinkowski:
      return "cylindrical_minkowski";
    case ManifoldKind::kAntiDeSitter:
      return "ads";
  }
  return "unknown";
}

ManifoldKind parse_manifold_kind(std::string_view name) {
  for (auto kind :
       {ManifoldKind::kEuclidean, ManifoldKind::kCylindricalEuclidean,
        ManifoldKind::kHyperboloid, ManifoldKind::kMinkowski,
        ManifoldKind::kCylindricalMinkowski, ManifoldKind::kAntiDeSitter}) {
    if (to_string(kind) == name) return kind;
  }
  if (name == "anti_de_sitter") return ManifoldKind::kAntiDeSitter;
  throw ManifoldError("unknown manifold kind '" + std::string(name) + "'");
}

ManifoldSpec::ManifoldSpec(ManifoldKind kind, int spatial_dim,
                           std::optional<double> circumference)
    : kind_(kind), spatial_dim_(spatial_dim), circumference_(circumference) {
  const int min_dim = kind == ManifoldKind::kAntiDeSitter ? 0 : 1;
  if (spatial_dim < min_dim) {
    throw ManifoldError("spatial dimension too small for " +
                        std::string(to_string(kind)));
  }
  if (is_cylindrical()) {
    if (!circumference || !(*circumference > 0.0) ||
        !std::isfinite(*circumference)) {
      throw ManifoldError("cylindrical manifolds need a circumference C > 0");
    }
  } else if (circumference) {
    throw ManifoldError("circumference given for non-cylindrical manifold " +
                        std::string(to_string(kind)));
  }
}

ManifoldSpec ManifoldSpec::from_embedding_dim(
    ManifoldKind kind, int embedding_dim,
    std::optional<double> circumference) {
  int n = embedding_dim;
  switch (kind) {
    case ManifoldKind::kEuclidean:
    case ManifoldKind::kCylindricalEuclidean:
      break;
    case ManifoldKind::kHyperboloid:
    case ManifoldKind::kMinkowski:
    case ManifoldKind::kCylindricalMinkowski:
      n -= 1;
      break;
    case ManifoldKind::kAntiDeSitter:
      n -= 2;
      break;
  }
  return ManifoldSpec(kind, n, circumference);
}

std::size_t ManifoldSpec::ambient_dim() const {
  const auto n = static_cast<std::size_t>(spatial_dim_);
  switch (kind_) {
    case ManifoldKind::kEuclidean:
    case ManifoldKind::kCylindricalEuclidean:
      return n;
    case ManifoldKind::kHyperboloid:
    case ManifoldKind::kMinkowski:
    case ManifoldKind::kCylindricalMinkowski:
      return n + 1;
    case ManifoldKind::kAntiDeSitter:
      return n + 2;
  }
  return n;
}

bool ManifoldSpec::is_cylindrical() const {
  return kind_ == ManifoldKind::kCylindricalEuclidean ||
         kind_ == ManifoldKind::kCylindricalMinkowski;
}

bool ManifoldSpec::is_flat() const { return !is_quadric(); }

bool ManifoldSpec::is_quadric() const {
  return kind_ == ManifoldKind::kHyperboloid ||
         kind_ == ManifoldKind::kAntiDeSitter;
}

std::size_t ManifoldSpec::image_count(int wrap_m) const {
  if (wrap_m < 0) throw ManifoldError("wrap truncation m must be >= 0");
  if (is_cylindrical() || kind_ == ManifoldKind::kAntiDeSitter) {
    return 2 * static_cast<std::size_t>(wrap_m) + 1;
  }
  return 1;
}

double wrap_symmetric(double x, double period) {
  double r = x - period * std::floor(x / period + 0.5);
  if (r >= 0.5 * period) r -= period;
  if (r < -0.5 * period) r += period;
  return r;
}

double lorentz_inner(const ManifoldSpec& spec, ConstCoords u, ConstCoords v) {
  check_dims(spec, u.size(), v.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    acc += metric_sign(spec.kind(), i) * u[i] * v[i];
  }
  return acc;
}

double quadric_residual(const ManifoldSpec& spec, ConstCoords x) {
  if (!spec.is_quadric()) return 0.0;
  return lorentz_inner(spec, x, x) + 1.0;
}

void validate_point(const ManifoldSpec& spec, ConstCoords x,
                    double tolerance) {
  check_dims(spec, x.size(), x.size());
  for (double c : x) {
    if (!std::isfinite(c)) throw ManifoldError("non-finite coordinate");
  }
  if (spec.is_quadric()) {
    const double res = quadric_residual(spec, x);
    if (std::abs(res) > tolerance) {
      std::ostringstream msg;
      msg << "point off the " << to_string(spec.kind())
          << " quadric: residual " << res;
      throw ManifoldError(msg.str());
    }
    if (spec.kind() == ManifoldKind::kHyperboloid && !(x[0] > 0.0)) {
      throw ManifoldError("hyperboloid point on the lower sheet");
    }
  }
  if (spec.is_cylindrical() &&
      (x[0] < 0.0 || x[0] >= spec.circumference())) {
    throw ManifoldError("cylinder time coordinate outside [0, C)");
  }
}

double ads_angle(ConstCoords x) { return std::atan2(x[0], x[1]); }

double ads_radius(ConstCoords x) {
  double acc = 1.0;
  for (std::size_t i = 2; i < x.size(); ++i) acc += x[i] * x[i];
  return std::sqrt(acc);
}

double squared_distance(const ManifoldSpec& spec, ConstCoords p,
                        ConstCoords q) {
  check_dims(spec, p.size(), q.size());
  switch (spec.kind()) {
    case ManifoldKind::kEuclidean:
    case ManifoldKind::kCylindricalEuclidean: {
      const double dt = flat_time_delta(spec, p, q);
      return dt * dt + spatial_sq(p, q, 1);
    }
    case ManifoldKind::kMinkowski:
    case ManifoldKind::kCylindricalMinkowski: {
      const double dt = flat_time_delta(spec, p, q);
      return -dt * dt + spatial_sq(p, q, 1);
    }
    case ManifoldKind::kHyperboloid:
      return hyperboloid_s_sq(lorentz_inner(spec, p, q));
    case ManifoldKind::kAntiDeSitter:
      return ads_s_sq(lorentz_inner(spec, p, q));
  }
  return 0.0;
}

double time_delta(const ManifoldSpec& spec, ConstCoords p, ConstCoords q) {
  check_dims(spec, p.size(), q.size());
  if (spec.kind() == ManifoldKind::kAntiDeSitter) {
    return ads_radius(q) * wrap_angle(ads_angle(q) - ads_angle(p));
  }
  return flat_time_delta(spec, p, q);
}

void interval_images(const ManifoldSpec& spec, ConstCoords p, ConstCoords q,
                     int wrap_m, std::span<IntervalImage> out) {
  const std::size_t count = spec.image_count(wrap_m);
  if (out.size() != count) {
    throw ManifoldError("interval_images: output span has wrong size");
  }
  check_dims(spec, p.size(), q.size());
  if (count == 1) {
    out[0] = {squared_distance(spec, p, q), time_delta(spec, p, q)};
    return;
  }
  const int m = wrap_m;
  if (spec.kind() == ManifoldKind::kAntiDeSitter) {
    const double s_sq = ads_s_sq(lorentz_inner(spec, p, q));
    const double r_q = ads_radius(q);
    const double theta = wrap_angle(ads_angle(q) - ads_angle(p));
    for (int n = -m; n <= m; ++n) {
      out[static_cast<std::size_t>(n + m)] = {
          s_sq, r_q * (theta + 2.0 * kPi * n)};
    }
    return;
  }
  const double sign =
      spec.kind() == ManifoldKind::kCylindricalMinkowski ? -1.0 : 1.0;
  const double c = spec.circumference();
  const double dt0 = flat_time_delta(spec, p, q);
  const double space = spatial_sq(p, q, 1);
  for (int n = -m; n <= m; ++n) {
    const double dt = dt0 + n * c;
    out[static_cast<std::size_t>(n + m)] = {sign * dt * dt + space, dt};
  }
}

std::vector<IntervalImage> interval_images(const ManifoldSpec& spec,
                                           ConstCoords p, ConstCoords q,
                                           int wrap_m) {
  std::vector<IntervalImage> out(spec.image_count(wrap_m));
  interval_images(spec, p, q, wrap_m, out);
  return out;
}

void pullback_interval(const ManifoldSpec& spec, ConstCoords p, ConstCoords q,
                       std::span<const ImageWeight> weights, Coords grad_p,
                       Coords grad_q) {
  check_dims(spec, p.size(), q.size());
  check_dims(spec, grad_p.size(), grad_q.size());
  const std::size_t count = weights.size();
  const bool wraps = spec.image_count(1) > 1;
  if (count % 2 == 0 || (!wraps && count != 1)) {
    throw ManifoldError("pullback_interval: bad image count");
  }
  const int m = static_cast<int>(count / 2);
  const std::size_t dim = p.size();

  switch (spec.kind()) {
    case ManifoldKind::kEuclidean:
    case ManifoldKind::kCylindricalEuclidean:
    case ManifoldKind::kMinkowski:
    case ManifoldKind::kCylindricalMinkowski: {
      const bool minkowski = spec.kind() == ManifoldKind::kMinkowski ||
                             spec.kind() == ManifoldKind::kCylindricalMinkowski;
      const double sign = minkowski ? -1.0 : 1.0;
      const double c = spec.is_cylindrical() ? spec.circumference() : 0.0;
      const double dt0 = flat_time_delta(spec, p, q);
      // d/dq0 of image n: sign * 2 dt_n * w_s + w_t; spatial terms share
      // the summed w_s.
      double time_coef = 0.0;
      double space_coef = 0.0;
      for (int n = -m; n <= m; ++n) {
        const ImageWeight& w = weights[static_cast<std::size_t>(n + m)];
        const double dt = dt0 + n * c;
        time_coef += sign * 2.0 * dt * w.d_s_sq + w.d_dt;
        space_coef += w.d_s_sq;
      }
      grad_q[0] += time_coef;
      grad_p[0] -= time_coef;
      for (std::size_t i = 1; i < dim; ++i) {
        const double g = 2.0 * (q[i] - p[i]) * space_coef;
        grad_q[i] += g;
        grad_p[i] -= g;
      }
      return;
    }
    case ManifoldKind::kHyperboloid: {
      const double slope =
          hyperboloid_s_sq_slope(lorentz_inner(spec, p, q)) * weights[0].d_s_sq;
      for (std::size_t i = 0; i < dim; ++i) {
        const double s = metric_sign(spec.kind(), i);
        grad_q[i] += slope * s * p[i];
        grad_p[i] += slope * s * q[i];
      }
      grad_q[0] += weights[0].d_dt;
      grad_p[0] -= weights[0].d_dt;
      return;
    }
    case ManifoldKind::kAntiDeSitter: {
      double w_s = 0.0;
      double w_t = 0.0;
      double w_t_angle = 0.0;
      const double theta = wrap_angle(ads_angle(q) - ads_angle(p));
      for (int n = -m; n <= m; ++n) {
        const ImageWeight& w = weights[static_cast<std::size_t>(n + m)];
        w_s += w.d_s_sq;
        w_t += w.d_dt;
        w_t_angle += w.d_dt * (theta + 2.0 * kPi * n);
      }
      const double slope =
          ads_s_sq_slope(lorentz_inner(spec, p, q)) * w_s;
      for (std::size_t i = 0; i < dim; ++i) {
        const double s = metric_sign(spec.kind(), i);
        grad_q[i] += slope * s * p[i];
        grad_p[i] += slope * s * q[i];
      }
      const double r_q = ads_radius(q);
      const double rho_p = p[0] * p[0] + p[1] * p[1];
      const double rho_q = q[0] * q[0] + q[1] * q[1];
      // theta = atan2(x_-1, x_0)
      grad_p[0] -= r_q * w_t * p[1] / rho_p;
      grad_p[1] += r_q * w_t * p[0] / rho_p;
      grad_q[0] += r_q * w_t * q[1] / rho_q;
      grad_q[1] -= r_q * w_t * q[0] / rho_q;
      for (std::size_t i = 2; i < dim; ++i) {
        grad_q[i] += w_t_angle * q[i] / r_q;
      }
      return;
    }
  }
}

IntervalDifferentials interval_differentials(const ManifoldSpec& spec,
                                             ConstCoords p, ConstCoords q) {
  check_dims(spec, p.size(), q.size());
  const std::size_t dim = p.size();
  IntervalDifferentials out{Vector(dim, 0.0), Vector(dim, 0.0),
                            Vector(dim, 0.0), Vector(dim, 0.0)};
  const ImageWeight s_only{1.0, 0.0};
  const ImageWeight t_only{0.0, 1.0};
  pullback_interval(spec, p, q, std::span(&s_only, 1), out.ds_sq_dp,
                    out.ds_sq_dq);
  pullback_interval(spec, p, q, std::span(&t_only, 1), out.ddt_dp,
                    out.ddt_dq);
  for (const Vector* part :
       {&out.ds_sq_dp, &out.ds_sq_dq, &out.ddt_dp, &out.ddt_dq}) {
    for (double v : *part) {
      if (!std::isfinite(v)) throw ManifoldError("non-finite differential");
    }
  }
  return out;
}

Vector tangent_projection(const ManifoldSpec& spec, ConstCoords p,
                          ConstCoords v) {
  check_dims(spec, p.size(), v.size());
  Vector out(v.begin(), v.end());
  if (!spec.is_quadric()) return out;
  const double c = lorentz_inner(spec, v, p);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * p[i];
  return out;
}

Vector descent_tangent(const ManifoldSpec& spec, ConstCoords p,
                       ConstCoords df) {
  check_dims(spec, p.size(), df.size());
  if (!spec.is_quadric()) return Vector(df.begin(), df.end());
  const ManifoldKind kind = spec.kind();
  // g_L^-1 equals g_L in these charts.
  Vector raised(df.size());
  for (std::size_t i = 0; i < df.size(); ++i) {
    raised[i] = metric_sign(kind, i) * df[i];
  }
  Vector zeta = tangent_projection(spec, p, raised);
  if (kind == ManifoldKind::kAntiDeSitter) {
    for (std::size_t i = 0; i < zeta.size(); ++i) {
      zeta[i] *= metric_sign(kind, i);
    }
    zeta = tangent_projection(spec, p, zeta);
  }
  return zeta;
}

void project_point_inplace(const ManifoldSpec& spec, Coords p) {
  check_dims(spec, p.size(), p.size());
  for (double c : p) {
    if (!std::isfinite(c)) throw ManifoldError("non-finite coordinate");
  }
  switch (spec.kind()) {
    case ManifoldKind::kEuclidean:
    case ManifoldKind::kMinkowski:
      return;
    case ManifoldKind::kCylindricalEuclidean:
    case ManifoldKind::kCylindricalMinkowski:
      canonicalize_cylinder(spec, p);
      return;
    case ManifoldKind::kHyperboloid: {
      double s = 1.0;
      for (std::size_t i = 1; i < p.size(); ++i) s += p[i] * p[i];
      const double target = std::sqrt(s);
      if (!(p[0] > 0.0) ||
          std::abs(p[0] - target) > kMaxRepairResidual * target) {
        throw ManifoldError("hyperboloid point too far from surface to repair");
      }
      p[0] = target;
      return;
    }
    case ManifoldKind::kAntiDeSitter: {
      double s = 1.0;
      for (std::size_t i = 2; i < p.size(); ++i) s += p[i] * p[i];
      const double rho = p[0] * p[0] + p[1] * p[1];
      if (!(rho > 0.0) || std::abs(s - rho) > kMaxRepairResidual * s) {
        throw ManifoldError("AdS point too far from quadric to repair");
      }
      const double scale = std::sqrt(s / rho);
      p[0] *= scale;
      p[1] *= scale;
      return;
    }
  }
}

Vector project_point(const ManifoldSpec& spec, ConstCoords p) {
  Vector out(p.begin(), p.end());
  project_point_inplace(spec, out);
  return out;
}

void exp_map_inplace(const ManifoldSpec& spec, Coords p, ConstCoords v) {
  check_dims(spec, p.size(), v.size());
  for (double c : v) {
    if (!std::isfinite(c)) throw ManifoldError("non-finite tangent vector");
  }
  const std::size_t dim = p.size();
  if (spec.is_flat()) {
    for (std::size_t i = 0; i < dim; ++i) p[i] += v[i];
    if (spec.is_cylindrical()) canonicalize_cylinder(spec, p);
    return;
  }
  const double nsq = lorentz_inner(spec, v, v);
  double a = 1.0;  // coefficient of p
  double b = 1.0;  // coefficient of v
  if (nsq < -kNullNormSq) {
    const double n = std::sqrt(-nsq);
    a = std::cos(n);
    b = std::sin(n) / n;
  } else if (nsq > kNullNormSq) {
    const double n = std::sqrt(nsq);
    a = std::cosh(n);
    b = std::sinh(n) / n;
  }
  for (std::size_t i = 0; i < dim; ++i) p[i] = a * p[i] + b * v[i];
}

Vector exp_map(const ManifoldSpec& spec, ConstCoords p, ConstCoords v) {
  Vector out(p.begin(), p.end());
  exp_map_inplace(spec, out, v);
  if (spec.is_quadric()) project_point_inplace(spec, out);
  return out;
}

Vector random_point(const ManifoldSpec& spec, double scale,
                    std::mt19937_64& rng) {
  if (!(scale > 0.0)) throw ManifoldError("random_point scale must be > 0");
  std::uniform_real_distribution<double> uniform(-scale, scale);
  Vector x(spec.ambient_dim(), 0.0);
  switch (spec.kind()) {
    case ManifoldKind::kEuclidean:
    case ManifoldKind::kMinkowski:
    case ManifoldKind::kCylindricalEuclidean:
    case ManifoldKind::kCylindricalMinkowski:
      for (double& c : x) c = uniform(rng);
      if (spec.is_cylindrical()) canonicalize_cylinder(spec, x);
      break;
    case ManifoldKind::kHyperboloid: {
      double s = 1.0;
      for (std::size_t i = 1; i < x.size(); ++i) {
        x[i] = uniform(rng);
        s += x[i] * x[i];
      }
      x[0] = std::sqrt(s);
      break;
    }
    case ManifoldKind::kAntiDeSitter: {
      const double theta = uniform(rng);
      double s = 1.0;
      for (std::size_t i = 2; i < x.size(); ++i) {
        x[i] = uniform(rng);
        s += x[i] * x[i];
      }
      const double r = std::sqrt(s);
      x[0] = r * std::sin(theta);
      x[1] = r * std::cos(theta);
      break;
    }
  }
  return x;
}

}  // namespace spacetime
