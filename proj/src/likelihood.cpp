#include "spacetime/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace spacetime {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr int kCalibrationGrid = 401;

// log F and dlogF/dx for the factor F_(tau, r, alpha)(x).
struct LogFactor {
  double log_value;
  double slope;
};

inline LogFactor log_fd(double tau, double r, double alpha, double x) {
  const double z = (alpha * x - r) / tau;
  return {-softplus(z), -(alpha / tau) * sigmoid(z)};
}

// log of the k-free TFD value and its partials.
struct LogTfd {
  double log_value;
  double d_s_sq;
  double d_dt;
};

inline LogTfd log_tfd(const TfdParams& p, double s_sq, double dt) {
  const LogFactor f1 = log_fd(p.tau1, p.r, 1.0, s_sq);
  const LogFactor f2 = log_fd(p.tau2, 0.0, 1.0, -dt);
  const LogFactor f3 = log_fd(p.tau2, 0.0, p.alpha, dt);
  constexpr double third = 1.0 / 3.0;
  return {third * (f1.log_value + f2.log_value + f3.log_value),
          third * f1.slope, third * (f3.slope - f2.slope)};
}

// log of the wrapped sum (k-free) with per-image weights T_n / sum.
double log_wrapped(const TfdParams& p, std::span<const IntervalImage> images,
                   std::span<LogTfd> terms) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < images.size(); ++n) {
    terms[n] = log_tfd(p, images[n].s_sq, images[n].dt);
    top = std::max(top, terms[n].log_value);
  }
  double acc = 0.0;
  for (std::size_t n = 0; n < images.size(); ++n) {
    acc += std::exp(terms[n].log_value - top);
  }
  return top + std::log(acc);
}

double wrapped_sum_raw(const TfdParams& p,
                       std::span<const IntervalImage> images) {
  double acc = 0.0;
  for (const auto& img : images) {
    acc += std::exp(log_tfd(p, img.s_sq, img.dt).log_value);
  }
  return acc;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

void FdParams::validate() const {
  if (!(tau > 0.0)) throw LikelihoodError("FD temperature tau must be > 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw LikelihoodError("FD alpha must lie in [0, 1]");
  }
  if (!std::isfinite(r)) throw LikelihoodError("FD r must be finite");
}

void TfdParams::validate() const {
  if (!(tau1 > 0.0) || !(tau2 > 0.0)) {
    throw LikelihoodError("TFD temperatures must be > 0");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw LikelihoodError("TFD alpha must lie in [0, 1]");
  }
  if (!(k > 0.0 && k <= 1.0)) throw LikelihoodError("TFD k must lie in (0, 1]");
  if (!std::isfinite(r)) throw LikelihoodError("TFD r must be finite");
  if (wrap_m < 0) throw LikelihoodError("wrap truncation m must be >= 0");
}

std::string_view to_string(LikelihoodKind kind) {
  switch (kind) {
    case LikelihoodKind::kFd:
      return "fd";
    case LikelihoodKind::kTfd:
      return "tfd";
    case LikelihoodKind::kWrappedTfd:
      return "wrapped_tfd";
  }
  return "unknown";
}

LikelihoodKind parse_likelihood_kind(std::string_view name) {
  if (name == "fd") return LikelihoodKind::kFd;
  if (name == "tfd") return LikelihoodKind::kTfd;
  if (name == "wrapped_tfd") return LikelihoodKind::kWrappedTfd;
  throw LikelihoodError("unknown likelihood '" + std::string(name) + "'");
}

Likelihood Likelihood::make_fd(const FdParams& params) {
  Likelihood lik;
  lik.kind = LikelihoodKind::kFd;
  lik.fd = params;
  lik.validate();
  return lik;
}

Likelihood Likelihood::make_tfd(const TfdParams& params) {
  Likelihood lik;
  lik.kind = LikelihoodKind::kTfd;
  lik.tfd = params;
  lik.validate();
  return lik;
}

Likelihood Likelihood::make_wrapped_tfd(const TfdParams& params) {
  Likelihood lik;
  lik.kind = LikelihoodKind::kWrappedTfd;
  lik.tfd = params;
  lik.validate();
  return lik;
}

void Likelihood::validate() const {
  if (kind == LikelihoodKind::kFd) {
    fd.validate();
  } else {
    tfd.validate();
  }
}

double fd(const FdParams& params, double x) {
  return sigmoid(-(params.alpha * x - params.r) / params.tau);
}

double tfd(const TfdParams& params, double s_sq, double dt) {
  return params.k * std::exp(log_tfd(params, s_sq, dt).log_value);
}

TfdPartials tfd_partials(const TfdParams& params, double s_sq, double dt) {
  const LogTfd t = log_tfd(params, s_sq, dt);
  const double value = params.k * std::exp(t.log_value);
  return {value * t.d_s_sq, value * t.d_dt};
}

EdgeProbability wrapped_tfd(const TfdParams& params,
                            std::span<const IntervalImage> images) {
  EdgeProbability out;
  out.partials.resize(images.size());
  for (std::size_t n = 0; n < images.size(); ++n) {
    const LogTfd t = log_tfd(params, images[n].s_sq, images[n].dt);
    const double value = params.k * std::exp(t.log_value);
    out.value += value;
    out.partials[n] = {value * t.d_s_sq, value * t.d_dt};
  }
  return out;
}

double calibrate_k(const TfdParams& params, const ManifoldSpec& spec) {
  const bool ads = spec.kind() == ManifoldKind::kAntiDeSitter;
  if (!spec.is_cylindrical() && !ads) return params.k;
  // AdS is scanned at unit radius, where images are closest together.
  const double c = ads ? 2.0 * std::numbers::pi : spec.circumference();
  const double s_lo = ads ? -std::numbers::pi * std::numbers::pi : -c * c;
  const double s_hi = c * c;
  const int m = params.wrap_m;
  std::vector<IntervalImage> images(2 * static_cast<std::size_t>(m) + 1);
  const double sign =
      spec.kind() == ManifoldKind::kCylindricalEuclidean ? 1.0 : -1.0;
  double best = 0.0;
  for (int i = 0; i < kCalibrationGrid; ++i) {
    const double s_sq = s_lo + (s_hi - s_lo) * i / (kCalibrationGrid - 1);
    for (int j = 0; j < kCalibrationGrid; ++j) {
      const double dt = c * j / kCalibrationGrid;
      if (ads) {
        for (int n = -m; n <= m; ++n) {
          images[static_cast<std::size_t>(n + m)] = {s_sq, dt + n * c};
        }
      } else {
        // s_sq is the n = 0 interval; the spatial part must be >= 0.
        const double space = s_sq - sign * dt * dt;
        if (space < 0.0) continue;
        for (int n = -m; n <= m; ++n) {
          const double dtn = dt + n * c;
          images[static_cast<std::size_t>(n + m)] = {sign * dtn * dtn + space,
                                                     dtn};
        }
      }
      best = std::max(best, wrapped_sum_raw(params, images));
    }
  }
  if (!(best > 0.0)) return 1.0;
  return std::min(1.0, 1.0 / best);
}

double edge_nll(double prob, EdgeLabel label) {
  const double p = std::clamp(prob, kProbFloor, 1.0 - kProbFloor);
  return label == EdgeLabel::kPositive ? -std::log(p) : -std::log1p(-p);
}

double edge_probability(const Likelihood& lik,
                        std::span<const IntervalImage> images) {
  if (images.empty()) throw LikelihoodError("no interval images");
  switch (lik.kind) {
    case LikelihoodKind::kFd:
      return fd(lik.fd, images[images.size() / 2].s_sq);
    case LikelihoodKind::kTfd: {
      const auto& img = images[images.size() / 2];
      return tfd(lik.tfd, img.s_sq, img.dt);
    }
    case LikelihoodKind::kWrappedTfd:
      return lik.tfd.k * wrapped_sum_raw(lik.tfd, images);
  }
  return 0.0;
}

double edge_loss(const Likelihood& lik, std::span<const IntervalImage> images,
                 EdgeLabel label, std::span<ImageWeight> grad) {
  if (images.empty() || grad.size() != images.size()) {
    throw LikelihoodError("edge_loss: image/gradient size mismatch");
  }
  std::fill(grad.begin(), grad.end(), ImageWeight{});
  const bool positive = label == EdgeLabel::kPositive;

  if (lik.kind == LikelihoodKind::kFd) {
    // Only the principal image enters; the slopes are written so that the
    // (1 - P) factors cancel analytically.
    const std::size_t mid = images.size() / 2;
    const FdParams& f = lik.fd;
    const double z = (f.alpha * images[mid].s_sq - f.r) / f.tau;
    const double prob = sigmoid(-z);
    grad[mid].d_s_sq = positive ? (f.alpha / f.tau) * sigmoid(z)
                                : -(f.alpha / f.tau) * prob;
    return edge_nll(prob, label);
  }

  std::span<const IntervalImage> used = images;
  std::size_t offset = 0;
  if (lik.kind == LikelihoodKind::kTfd) {
    offset = images.size() / 2;
    used = images.subspan(offset, 1);
  }
  // At most a handful of images; avoid heap traffic in the training loop.
  constexpr std::size_t kMaxStack = 64;
  LogTfd stack_terms[kMaxStack];
  std::vector<LogTfd> heap_terms;
  std::span<LogTfd> terms;
  if (used.size() <= kMaxStack) {
    terms = std::span<LogTfd>(stack_terms, used.size());
  } else {
    heap_terms.resize(used.size());
    terms = heap_terms;
  }
  const double log_raw = log_wrapped(lik.tfd, used, terms);
  const double log_prob = std::log(lik.tfd.k) + log_raw;
  const double prob = std::exp(log_prob);
  // dNLL = coef * dlogP
  const double coef =
      positive ? -1.0 : prob / std::max(1.0 - prob, kProbFloor);
  for (std::size_t n = 0; n < used.size(); ++n) {
    const double w = std::exp(terms[n].log_value - log_raw);
    grad[offset + n].d_s_sq = coef * w * terms[n].d_s_sq;
    grad[offset + n].d_dt = coef * w * terms[n].d_dt;
  }
  if (positive) {
    return std::min(-log_prob, -std::log(kProbFloor));
  }
  return edge_nll(prob, label);
}

}  // namespace spacetime
