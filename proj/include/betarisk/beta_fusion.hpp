// Beta-distribution fusion of direct and indirect trust.
//
// A trust estimate (mean, variance) is mapped onto Beta(alpha, beta) by the
// method of moments. The direct estimate acts as the prior and the indirect
// estimate as the likelihood; their kernel product is again a Beta, and its
// mean is the combined trust. The same mean can be written as a weighted sum
// of the two input means, which is what FusionWeights carries.

#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace betarisk {

/// Trust means are clamped to [eps, 1 - eps] before moment inversion.
inline constexpr double kMeanClampEpsilon = 1e-6;

/// Variance assumed for a trust estimate when none is configured.
inline constexpr double kDefaultVariance = 0.01;

enum class FusionErrorKind {
  InvalidVariance,      // no Beta distribution has the requested moments
  DegeneratePosterior,  // a posterior shape (or K) is not positive
};

inline const char* to_string(FusionErrorKind kind) {
  switch (kind) {
    case FusionErrorKind::InvalidVariance:
      return "InvalidVariance";
    case FusionErrorKind::DegeneratePosterior:
      return "DegeneratePosterior";
  }
  return "unknown";
}

class FusionError : public std::domain_error {
 public:
  FusionError(FusionErrorKind kind, const std::string& what)
      : std::domain_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        detail_(what) {}

  FusionErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  FusionErrorKind kind_;
  std::string detail_;
};

/// A probability in [0, 1].
class TrustValue {
 public:
  constexpr TrustValue() = default;

  explicit TrustValue(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      std::ostringstream msg;
      msg << "trust value " << value << " outside [0, 1]";
      throw std::domain_error(msg.str());
    }
  }

  constexpr double value() const noexcept { return value_; }

  friend constexpr auto operator<=>(TrustValue, TrustValue) = default;

 private:
  double value_ = 0.0;
};

/// Trust mean paired with the variance expressing confidence in it.
struct TrustEstimate {
  TrustValue mean;
  double variance = kDefaultVariance;

  TrustEstimate() = default;
  TrustEstimate(TrustValue m, double var = kDefaultVariance)
      : mean(m), variance(var) {}
  TrustEstimate(double m, double var = kDefaultVariance)
      : mean(m), variance(var) {}

  friend bool operator==(const TrustEstimate&, const TrustEstimate&) = default;
};

/// Shape pair of a Beta distribution; both shapes strictly positive.
class BetaParams {
 public:
  BetaParams(double alpha, double beta) : alpha_(alpha), beta_(beta) {
    if (!(alpha > 0.0 && std::isfinite(alpha) && beta > 0.0 &&
          std::isfinite(beta))) {
      std::ostringstream msg;
      msg << "Beta shapes must be finite and positive, got (" << alpha << ", "
          << beta << ")";
      throw std::domain_error(msg.str());
    }
  }

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

  friend bool operator==(const BetaParams&, const BetaParams&) = default;

 private:
  double alpha_;
  double beta_;
};

/// Weights such that combined = w_a * mean_a + w_b * mean_b, with
/// k = alpha_a + alpha_b + beta_a + beta_b - 2. w_b is negative whenever
/// alpha_b < 1; that is returned unchanged.
struct FusionWeights {
  double w_a = 0.0;
  double w_b = 0.0;
  double k = 0.0;
};

/// Density of Beta(alpha, beta) at x, evaluated in log space.
///
/// Returns +infinity at x = 0 when alpha < 1 and at x = 1 when beta < 1.
/// Throws std::domain_error for x outside [0, 1].
inline double beta_pdf(const BetaParams& params, double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream msg;
    msg << "beta_pdf argument " << x << " outside [0, 1]";
    throw std::domain_error(msg.str());
  }
  const double a = params.alpha();
  const double b = params.beta();

  auto log_power = [](double base, double exponent) {
    if (exponent == 0.0) return 0.0;
    if (base == 0.0) {
      return exponent > 0.0 ? -std::numeric_limits<double>::infinity()
                            : std::numeric_limits<double>::infinity();
    }
    return exponent * std::log(base);
  };

  const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  const double log_x = log_power(x, a - 1.0);
  const double log_1mx = x == 1.0 ? log_power(0.0, b - 1.0)
                                  : (b == 1.0 ? 0.0 : (b - 1.0) * std::log1p(-x));
  return std::exp(log_norm + log_x + log_1mx);
}

inline double beta_mean(const BetaParams& params) {
  return params.alpha() / (params.alpha() + params.beta());
}

inline double beta_variance(const BetaParams& params) {
  const double a = params.alpha();
  const double b = params.beta();
  const double s = a + b;
  return (a * b) / ((s + 1.0) * s * s);
}

inline double clamp_trust_mean(double mean) {
  return std::clamp(mean, kMeanClampEpsilon, 1.0 - kMeanClampEpsilon);
}

/// Method-of-moments inversion: the Beta whose mean and variance equal the
/// (clamped) estimate. Requires 0 < variance < mean * (1 - mean).
inline BetaParams moments_to_beta(const TrustEstimate& estimate) {
  const double m = clamp_trust_mean(estimate.mean.value());
  const double v = estimate.variance;
  const double bound = m * (1.0 - m);
  if (!(v > 0.0 && v < bound)) {
    std::ostringstream msg;
    msg << "method-of-moments inversion needs 0 < variance < mean*(1-mean); "
        << "mean=" << m << " variance=" << v << " mean*(1-mean)=" << bound;
    throw FusionError(FusionErrorKind::InvalidVariance, msg.str());
  }
  const double alpha = m * (bound / v - 1.0);
  const double beta = alpha * (1.0 - m) / m;
  return BetaParams(alpha, beta);
}

/// Beta(alpha_p + alpha_l - 1, beta_p + beta_l - 1): the normalised product
/// of the prior and likelihood kernels.
inline BetaParams posterior_params(const BetaParams& prior,
                                   const BetaParams& likelihood) {
  const double a = prior.alpha() + likelihood.alpha() - 1.0;
  const double b = prior.beta() + likelihood.beta() - 1.0;
  if (!(a > 0.0 && b > 0.0)) {
    std::ostringstream msg;
    msg << "posterior shape not positive: alpha=" << a << " beta=" << b;
    throw FusionError(FusionErrorKind::DegeneratePosterior, msg.str());
  }
  return BetaParams(a, b);
}

inline FusionWeights fusion_weights(const BetaParams& a, const BetaParams& b) {
  const double k = a.alpha() + b.alpha() + a.beta() + b.beta() - 2.0;
  if (!(k > 0.0)) {
    std::ostringstream msg;
    msg << "normalising constant K=" << k << " not positive";
    throw FusionError(FusionErrorKind::DegeneratePosterior, msg.str());
  }
  FusionWeights w;
  w.k = k;
  w.w_a = (a.alpha() + a.beta()) / k;
  w.w_b = (b.alpha() + b.beta()) * (b.alpha() - 1.0) / (b.alpha() * k);
  return w;
}

/// Every intermediate of one fusion, in evaluation order.
struct FusionBreakdown {
  BetaParams prior;
  BetaParams likelihood;
  BetaParams posterior;
  FusionWeights weights;
  double prior_mean;       // clamped
  double likelihood_mean;  // clamped
  TrustValue combined;
};

/// Full pipeline with `prior` treated as the prior. Errors are rethrown
/// with the failing side named.
inline FusionBreakdown fuse(const TrustEstimate& prior,
                            const TrustEstimate& likelihood,
                            const std::string& prior_name = "prior",
                            const std::string& likelihood_name = "likelihood") {
  auto invert = [](const TrustEstimate& e, const std::string& side) {
    try {
      return moments_to_beta(e);
    } catch (const FusionError& err) {
      throw FusionError(err.kind(), side + " estimate: " + err.detail());
    }
  };
  const BetaParams pa = invert(prior, prior_name);
  const BetaParams pb = invert(likelihood, likelihood_name);
  const BetaParams post = posterior_params(pa, pb);
  const FusionWeights w = fusion_weights(pa, pb);
  const double ma = clamp_trust_mean(prior.mean.value());
  const double mb = clamp_trust_mean(likelihood.mean.value());
  const double c = std::clamp(ma * w.w_a + mb * w.w_b, 0.0, 1.0);
  return FusionBreakdown{pa, pb, post, w, ma, mb, TrustValue(c)};
}

/// Combined trust with `a` (direct trust) as the prior. Swap the arguments
/// to treat the indirect estimate as the prior instead.
inline TrustValue combined_trust(const TrustEstimate& a,
                                 const TrustEstimate& b) {
  return fuse(a, b).combined;
}

}  // namespace betarisk
