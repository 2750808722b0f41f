#pragma once

#include <cstdint>
#include <vector>

#include "thinfilm/common.hpp"

namespace thinfilm {

enum class PathKind { fixed_s, power_law, log_critical, inverse_log_power, custom };

struct PathPoint {
  double eps;
  double s;
};

// A (eps, s_eps) path with eps strictly decreasing. Closed-form kinds:
//   fixed_s:            s constant
//   power_law:          1 - s = eps^beta, beta > 0
//   log_critical:       eps^{1-s} = kappa, kappa in (0,1)
//   inverse_log_power:  1 - s = |log eps|^{-gamma}, gamma > 0
struct ParamPath {
  PathKind kind = PathKind::custom;
  double param = 0.0;  // s / beta / kappa / gamma depending on kind
  std::vector<PathPoint> points;

  static ParamPath fixed_s(double s, std::vector<double> eps_list);
  static ParamPath power_law(double beta, std::vector<double> eps_list);
  static ParamPath log_critical(double kappa, std::vector<double> eps_list);
  static ParamPath inverse_log_power(double gamma, std::vector<double> eps_list);
  static ParamPath custom(std::vector<PathPoint> points);
};

enum class Regime { subcritical, critical, supercritical };

const char* regime_name(Regime r);

struct KappaEstimate {
  double value = 0.0;
  bool converged = true;
};

struct RegimeReport {
  double kappa_estimate = 0.0;
  Regime regime = Regime::supercritical;
  double predicted_limit_membrane = 0.0;  // kappa^2 (unit reduced-gradient coefficient)
  double predicted_limit_native = 1.0;
};

// eps^{2s-3}; combines the 1/eps geometric factor with the eps-range of
// relevant pair interactions.
double native_scaling(double eps, double s);

// lim eps^{1-s} along the path. Closed form for analytic kinds; for custom
// tables a structured log-log extrapolation of (1-s)|log eps| with a
// convergence flag.
KappaEstimate path_kappa(const ParamPath& path);

RegimeReport classify_regime(const ParamPath& path);

enum class LimitPrediction { zero, infinity, unknown };

const char* limit_prediction_name(LimitPrediction p);

struct FixedSLimit {
  LimitPrediction prediction = LimitPrediction::unknown;
  bool critical_alpha = false;  // alpha == 3-2s, where the limit is open
};

// Gamma-limit of eps^{-alpha} * (unweighted seminorm) at fixed s in (1/2,1):
// zero below the critical exponent 3-2s; above it zero only for constants.
FixedSLimit fixed_s_limit_prediction(double alpha, double s, bool u_is_constant);

}  // namespace thinfilm
