#pragma once

#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "spacetime/manifold.hpp"

namespace spacetime {

class LikelihoodError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fermi-Dirac factor 1 / (exp((alpha x - r) / tau) + 1).
struct FdParams {
  double tau = 1.0;
  double r = 0.0;
  double alpha = 1.0;

  void validate() const;
};

/// Triple Fermi-Dirac parameters. F1 acts on s^2 with (tau1, r), F2 on -dt
/// and F3 on alpha * dt, both with tau2. k scales the cube-root product.
struct TfdParams {
  double tau1 = 1.0;
  double tau2 = 1.0;
  double alpha = 0.0;
  double r = 0.0;
  double k = 1.0;
  int wrap_m = 3;

  void validate() const;
};

enum class LikelihoodKind { kFd, kTfd, kWrappedTfd };

std::string_view to_string(LikelihoodKind kind);
LikelihoodKind parse_likelihood_kind(std::string_view name);

/// The edge-probability model used for training and scoring. FD sees only
/// s^2 of the principal image; TFD adds the time difference; the wrapped
/// TFD sums over 2m+1 winding images on circular-time manifolds.
struct Likelihood {
  LikelihoodKind kind = LikelihoodKind::kTfd;
  FdParams fd;
  TfdParams tfd;

  static Likelihood make_fd(const FdParams& params);
  static Likelihood make_tfd(const TfdParams& params);
  static Likelihood make_wrapped_tfd(const TfdParams& params);

  /// Truncation m used when generating interval images.
  int wrap_m() const { return kind == LikelihoodKind::kWrappedTfd ? tfd.wrap_m : 0; }
  void validate() const;
};

enum class EdgeLabel { kNegative = 0, kPositive = 1 };

struct TfdPartials {
  double d_s_sq = 0.0;
  double d_dt = 0.0;
};

struct EdgeProbability {
  double value = 0.0;
  /// d value / d (s_sq, dt) of each image, ordered n = -m..m.
  std::vector<TfdPartials> partials;
};

// Numerically stable logistic helpers.
double sigmoid(double z);
double softplus(double z);

double fd(const FdParams& params, double x);
double tfd(const TfdParams& params, double s_sq, double dt);
TfdPartials tfd_partials(const TfdParams& params, double s_sq, double dt);

/// Sum of tfd over the supplied images (k applied once to the sum).
EdgeProbability wrapped_tfd(const TfdParams& params,
                            std::span<const IntervalImage> images);

/// Largest k <= 1 with k * max(wrapped sum) <= 1, the max taken over a
/// 401 x 401 grid of (s_sq, dt). Returns params.k on spaces without a time
/// circle.
double calibrate_k(const TfdParams& params, const ManifoldSpec& spec);

/// NLL of one labelled edge, prob clamped to [1e-12, 1 - 1e-12].
double edge_nll(double prob, EdgeLabel label);

/// Probability of an edge whose interval images are `images`.
double edge_probability(const Likelihood& lik,
                        std::span<const IntervalImage> images);

/// NLL of one labelled edge plus dNLL/d(s_sq, dt) per image in `grad`.
/// The gradient is that of the unclamped NLL.
double edge_loss(const Likelihood& lik, std::span<const IntervalImage> images,
                 EdgeLabel label, std::span<ImageWeight> grad);

}  // namespace spacetime
