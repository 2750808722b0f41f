#include "thinfilm/scaling.hpp"

#include <algorithm>
#include <cmath>

namespace thinfilm {

namespace {

void validate_eps_list(const std::vector<double>& eps_list) {
  if (eps_list.empty()) throw Error(Errc::invalid_config, "eps list must be nonempty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw Error(Errc::invalid_config, "eps values must be positive");
    if (i && !(eps_list[i] < eps_list[i - 1]))
      throw Error(Errc::invalid_config, "eps list must be strictly decreasing");
  }
}

void validate_points(const std::vector<PathPoint>& pts) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!(pts[i].eps > 0.0)) throw Error(Errc::invalid_config, "eps values must be positive");
    if (!(pts[i].s > 0.0 && pts[i].s < 1.0))
      throw Error(Errc::invalid_config, "s values must lie in (0,1)");
    if (i && !(pts[i].eps < pts[i - 1].eps))
      throw Error(Errc::invalid_config, "eps list must be strictly decreasing");
  }
}

ParamPath build(PathKind kind, double param, std::vector<double> eps_list,
                double (*s_of)(double eps, double param)) {
  validate_eps_list(eps_list);
  ParamPath p;
  p.kind = kind;
  p.param = param;
  p.points.reserve(eps_list.size());
  for (double e : eps_list) p.points.push_back({e, s_of(e, param)});
  validate_points(p.points);
  return p;
}

}  // namespace

ParamPath ParamPath::fixed_s(double s, std::vector<double> eps_list) {
  if (!(s > 0.0 && s < 1.0)) throw Error(Errc::invalid_s, "s must lie in (0,1)");
  return build(PathKind::fixed_s, s, std::move(eps_list), [](double, double p) { return p; });
}

ParamPath ParamPath::power_law(double beta, std::vector<double> eps_list) {
  if (!(beta > 0.0)) throw Error(Errc::invalid_config, "beta must be positive");
  return build(PathKind::power_law, beta, std::move(eps_list),
               [](double e, double p) { return 1.0 - std::pow(e, p); });
}

ParamPath ParamPath::log_critical(double kappa, std::vector<double> eps_list) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw Error(Errc::invalid_config, "kappa must lie in (0,1)");
  return build(PathKind::log_critical, kappa, std::move(eps_list),
               [](double e, double p) { return 1.0 - std::log(1.0 / p) / std::abs(std::log(e)); });
}

ParamPath ParamPath::inverse_log_power(double gamma, std::vector<double> eps_list) {
  if (!(gamma > 0.0)) throw Error(Errc::invalid_config, "gamma must be positive");
  return build(PathKind::inverse_log_power, gamma, std::move(eps_list),
               [](double e, double p) { return 1.0 - std::pow(std::abs(std::log(e)), -p); });
}

ParamPath ParamPath::custom(std::vector<PathPoint> points) {
  validate_points(points);
  ParamPath p;
  p.kind = PathKind::custom;
  p.points = std::move(points);
  return p;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::subcritical: return "subcritical";
    case Regime::critical: return "critical";
    case Regime::supercritical: return "supercritical";
  }
  return "unknown";
}

double native_scaling(double eps, double s) {
  if (!(eps > 0.0)) throw Error(Errc::nonpositive_thickness, "eps must be positive");
  if (!(s > 0.0 && s < 1.0)) throw Error(Errc::invalid_s, "s must lie in (0,1)");
  return std::pow(eps, 2.0 * s - 3.0);
}

KappaEstimate path_kappa(const ParamPath& path) {
  switch (path.kind) {
    case PathKind::fixed_s: return {0.0, true};
    case PathKind::power_law: return {1.0, true};
    case PathKind::log_critical: return {path.param, true};
    case PathKind::inverse_log_power:
      if (path.param > 1.0) return {1.0, true};
      if (path.param < 1.0) return {0.0, true};
      return {std::exp(-1.0), true};
    case PathKind::custom: break;
  }
  // Structured extrapolation: u = (1-s)|log eps| determines eps^{1-s} = e^{-u}.
  // A log-log trend of u against eps separates u -> 0 (kappa = 1), u -> inf
  // (kappa = 0) and u ~ const (critical, kappa = e^{-mean u}).
  if (path.points.size() < 3) throw Error(Errc::path_too_short, "custom path needs at least 3 points");
  const std::size_t n = path.points.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  double mean_u = 0.0;
  for (const PathPoint& p : path.points) {
    const double u = (1.0 - p.s) * std::abs(std::log(p.eps));
    const double x = std::log(p.eps), y = std::log(u);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    mean_u += u / double(n);
  }
  const double denom = double(n) * sxx - sx * sx;
  const double slope = (double(n) * sxy - sx * sy) / denom;
  const double corr2 = (double(n) * sxy - sx * sy) * (double(n) * sxy - sx * sy) /
                       std::max(1e-300, denom * (double(n) * syy - sy * sy));
  const double tau = 0.02;
  if (slope > tau) return {1.0, corr2 > 0.5};
  if (slope < -tau) return {0.0, corr2 > 0.5};
  // nearly flat: treat as critical
  double spread = 0.0;
  for (const PathPoint& p : path.points) {
    const double u = (1.0 - p.s) * std::abs(std::log(p.eps));
    spread = std::max(spread, std::abs(u - mean_u));
  }
  return {std::exp(-mean_u), spread < 0.05 * std::abs(mean_u)};
}

RegimeReport classify_regime(const ParamPath& path) {
  const KappaEstimate k = path_kappa(path);
  RegimeReport rep;
  rep.kappa_estimate = k.value;
  if (k.value >= 1.0 - 1e-9) rep.regime = Regime::subcritical;
  else if (k.value <= 1e-9) rep.regime = Regime::supercritical;
  else rep.regime = Regime::critical;
  rep.predicted_limit_native = 1.0;
  rep.predicted_limit_membrane = k.value * k.value;
  return rep;
}

const char* limit_prediction_name(LimitPrediction p) {
  switch (p) {
    case LimitPrediction::zero: return "zero";
    case LimitPrediction::infinity: return "infinity";
    case LimitPrediction::unknown: return "unknown";
  }
  return "unknown";
}

FixedSLimit fixed_s_limit_prediction(double alpha, double s, bool u_is_constant) {
  if (!(s > 0.5 && s < 1.0)) throw Error(Errc::invalid_s, "s must lie in (1/2,1)");
  const double critical = 3.0 - 2.0 * s;
  FixedSLimit out;
  if (u_is_constant) {
    out.prediction = LimitPrediction::zero;  // zero energy at every scaling
    out.critical_alpha = std::abs(alpha - critical) <= 1e-12;
    return out;
  }
  if (alpha < critical - 1e-12) {
    out.prediction = LimitPrediction::zero;
  } else if (alpha > critical + 1e-12) {
    out.prediction = LimitPrediction::infinity;
  } else {
    out.prediction = LimitPrediction::unknown;
    out.critical_alpha = true;
  }
  return out;
}

}  // namespace thinfilm
