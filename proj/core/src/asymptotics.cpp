#include "kpplab/asymptotics.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "kpplab/errors.hpp"

namespace kpplab {
namespace {

void require_fraction(double a, bool allow_zero) {
  const bool ok = std::isfinite(a) && (allow_zero ? a >= 0.0 : a > 0.0) && a < 1.0;
  if (!ok) {
    std::ostringstream msg;
    msg << "growth deficit a=" << a << " must lie in " << (allow_zero ? "[0,1)" : "(0,1)");
    throw DomainError(msg.str());
  }
}

LogCoefficient classical_theta(double lambda_min) {
  return LogCoefficient{-3.0 / (2.0 * lambda_min), 0.0, false};
}

}  // namespace

double EnvironmentSpec::shift(double t) const {
  return beta * t - eta * std::log(t + 1.0);
}

std::string_view to_string(RegimeLabel label) noexcept {
  switch (label) {
    case RegimeLabel::Subcritical:
      return "subcritical";
    case RegimeLabel::SupercriticalPulling:
      return "supercritical-pulling";
    case RegimeLabel::CriticalPulling:
      return "critical-pulling";
    case RegimeLabel::NoPulling:
      return "no-pulling";
  }
  return "unknown";
}

double pulling_threshold(double a) {
  require_fraction(a, /*allow_zero=*/true);
  return 2.0 * (std::sqrt(a) + std::sqrt(1.0 - a));
}

Regime classify_regime(const EnvironmentSpec& env, double tol) {
  require_fraction(env.a, /*allow_zero=*/false);
  if (!(tol >= 0.0) || !std::isfinite(env.beta) || !std::isfinite(env.eta)) {
    throw DomainError("classify_regime: beta, eta must be finite and tol >= 0");
  }
  const double threshold = pulling_threshold(env.a);
  const double beta = env.beta;
  Regime regime{RegimeLabel::NoPulling, tol};
  if (std::abs(beta - threshold) <= tol) {
    regime.label = RegimeLabel::CriticalPulling;
  } else if (beta < 2.0 - tol) {
    regime.label = RegimeLabel::Subcritical;
  } else if (std::abs(beta - 2.0) <= tol) {
    if (env.eta >= 0.5) {
      std::ostringstream msg;
      msg << "beta=2 with eta=" << env.eta << " >= 1/2 has no front prediction";
      throw UnsupportedRegime(msg.str());
    }
    regime.label = RegimeLabel::SupercriticalPulling;
  } else if (beta < threshold) {
    regime.label = RegimeLabel::SupercriticalPulling;
  }
  return regime;
}

double effective_exponent(const EnvironmentSpec& env, double tol) {
  const Regime regime = classify_regime(env, tol);
  if (regime.label != RegimeLabel::SupercriticalPulling) {
    throw RegimeError("effective exponent lambda_* only exists for supercritical pulling, got " +
                      std::string(to_string(regime.label)));
  }
  return env.beta / 2.0 - std::sqrt(env.a);
}

double spreading_speed(const EnvironmentSpec& env, double tol) {
  require_fraction(env.a, /*allow_zero=*/true);
  if (env.a == 0.0 || env.beta <= 2.0) {
    return 2.0;
  }
  const double threshold = pulling_threshold(env.a);
  if (env.beta >= threshold - tol) {
    return 2.0 * std::sqrt(1.0 - env.a);
  }
  const double lambda = env.beta / 2.0 - std::sqrt(env.a);
  return wave_speed(lambda, 1.0 - env.a);
}

double wave_speed(double lambda, double R) {
  if (!(lambda > 0.0) || !(R > 0.0)) {
    throw DomainError("wave_speed requires lambda > 0 and R > 0");
  }
  return lambda + R / lambda;
}

LogCoefficient log_coefficient(const EnvironmentSpec& env, double tol) {
  require_fraction(env.a, /*allow_zero=*/true);
  if (env.a == 0.0) {
    return classical_theta(1.0);
  }
  const Regime regime = classify_regime(env, tol);
  const double lambda_min = std::sqrt(1.0 - env.a);
  switch (regime.label) {
    case RegimeLabel::Subcritical:
      return classical_theta(1.0);
    case RegimeLabel::SupercriticalPulling: {
      const double lambda = env.beta / 2.0 - std::sqrt(env.a);
      return LogCoefficient{-(1.5 - std::sqrt(env.a) * env.eta) / lambda, 0.0, false};
    }
    case RegimeLabel::CriticalPulling: {
      const double q = -1.5 + env.eta * std::sqrt(env.a);
      if (std::abs(q + 2.0) <= tol) {
        return LogCoefficient{-3.0 / (2.0 * lambda_min), 1.0 / lambda_min, true};
      }
      if (q < -2.0) {
        return classical_theta(lambda_min);
      }
      return LogCoefficient{(q - 1.0) / (2.0 * lambda_min), 0.0, false};
    }
    case RegimeLabel::NoPulling:
      return classical_theta(lambda_min);
  }
  return {};
}

double delay_m(double lambda, double R, double q, double t) {
  if (!(lambda > 0.0) || !(R > 0.0)) {
    throw DomainError("delay_m requires lambda > 0 and R > 0");
  }
  if (lambda >= std::sqrt(R)) {
    throw RegimeError("delay_m requires lambda < sqrt(R); use delay_m_tilde for lambda = sqrt(R)");
  }
  const double c = wave_speed(lambda, R);
  const double gap = c - 2.0 * lambda;
  if (!(t > 1.0 / gap)) {
    throw DomainError("delay_m requires t > 1/(c_lambda - 2 lambda)");
  }
  return c * t + (q / lambda) * std::log(gap * t);
}

double delay_m_tilde(double R, double q, double t) {
  if (!(R > 0.0) || !(t > 1.0)) {
    throw DomainError("delay_m_tilde requires R > 0 and t > 1");
  }
  const double lambda_min = std::sqrt(R);
  const double c_min = 2.0 * lambda_min;
  const double log_t = std::log(t);
  if (q < -2.0) {
    return c_min * t - 3.0 / (2.0 * lambda_min) * log_t;
  }
  if (q == -2.0) {
    return c_min * t - 3.0 / (2.0 * lambda_min) * log_t + std::log(log_t) / lambda_min;
  }
  return c_min * t + (q - 1.0) / (2.0 * lambda_min) * log_t;
}

LogCoefficient tail_log_coefficient(double lambda, double R, double q) {
  if (!(lambda > 0.0) || !(R > 0.0) || !std::isfinite(q)) {
    throw DomainError("tail_log_coefficient requires lambda > 0, R > 0 and finite q");
  }
  const double lambda_min = std::sqrt(R);
  if (lambda > lambda_min * (1.0 + 1e-12)) {
    throw DomainError("tail_log_coefficient requires lambda <= sqrt(R)");
  }
  if (lambda < lambda_min * (1.0 - 1e-12)) return LogCoefficient{q / lambda, 0.0, false};
  if (q < -2.0) return classical_theta(lambda_min);
  if (q == -2.0) return LogCoefficient{-3.0 / (2.0 * lambda_min), 1.0 / lambda_min, true};
  return LogCoefficient{(q - 1.0) / (2.0 * lambda_min), 0.0, false};
}

FrontPrediction predict_front(const EnvironmentSpec& env, double tol) {
  FrontPrediction p;
  require_fraction(env.a, /*allow_zero=*/true);
  if (env.a == 0.0) {
    p.regime = Regime{RegimeLabel::Subcritical, tol};
    p.c_star = 2.0;
    p.lambda_eff = 1.0;
    p.plateau = 1.0;
    p.q_eff = -3.0;
  } else {
    p.regime = classify_regime(env, tol);
    p.plateau = 1.0 - env.a;
    const double lambda_min = std::sqrt(1.0 - env.a);
    switch (p.regime.label) {
      case RegimeLabel::Subcritical:
        p.lambda_eff = 1.0;
        p.q_eff = -3.0;
        break;
      case RegimeLabel::SupercriticalPulling:
        p.lambda_eff = env.beta / 2.0 - std::sqrt(env.a);
        p.q_eff = -1.5 + env.eta * std::sqrt(env.a);
        break;
      case RegimeLabel::CriticalPulling:
        p.lambda_eff = lambda_min;
        p.q_eff = -1.5 + env.eta * std::sqrt(env.a);
        break;
      case RegimeLabel::NoPulling:
        p.lambda_eff = lambda_min;
        p.q_eff = -3.0;
        break;
    }
    p.c_star = spreading_speed(env, tol);
  }
  p.theta = log_coefficient(env, tol);

  const double c = p.c_star;
  const LogCoefficient theta = p.theta;
  p.delay = [c, theta](double t) {
    if (!(t >= 1.0)) {
      throw DomainError("predicted front is defined for t >= 1");
    }
    double x = c * t + theta.log_t * std::log(t);
    if (theta.has_log_log && t > 1.0) {
      x += theta.log_log_t * std::log(std::log(t));
    }
    return x;
  };
  return p;
}

double predicted_front(const EnvironmentSpec& env, double t, double tol) {
  return predict_front(env, tol).delay(t);
}

}  // namespace kpplab
