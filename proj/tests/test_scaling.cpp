#include <doctest.h>

#include <cmath>

#include "thinfilm/scaling.hpp"

using namespace thinfilm;

TEST_CASE("native scaling factor") {
  CHECK(native_scaling(0.1, 0.9) == doctest::Approx(std::pow(10.0, 1.2)).epsilon(1e-12));
  CHECK(native_scaling(1.0, 0.37) == doctest::Approx(1.0));
  CHECK(native_scaling(0.01, 0.5) == doctest::Approx(1e4).epsilon(1e-12));
  CHECK_THROWS_AS(native_scaling(0.0, 0.5), Error);
  CHECK_THROWS_AS(native_scaling(0.1, 1.0), Error);
}

TEST_CASE("kappa of closed-form paths") {
  const std::vector<double> eps = {0.2, 0.1, 0.05, 0.02};
  CHECK(path_kappa(ParamPath::log_critical(0.5, eps)).value == doctest::Approx(0.5));
  CHECK(path_kappa(ParamPath::fixed_s(0.75, eps)).value == doctest::Approx(0.0));
  CHECK(path_kappa(ParamPath::power_law(0.5, eps)).value == doctest::Approx(1.0));
  // 1-s = 1/|log eps| pins eps^{1-s} to 1/e
  CHECK(path_kappa(ParamPath::inverse_log_power(1.0, eps)).value ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(path_kappa(ParamPath::inverse_log_power(2.0, eps)).value == doctest::Approx(1.0));
  CHECK(path_kappa(ParamPath::inverse_log_power(0.5, eps)).value == doctest::Approx(0.0));
}

TEST_CASE("custom-path extrapolation") {
  // a power-law table must extrapolate to kappa = 1 within 1e-3
  std::vector<PathPoint> pts;
  for (double e : {1e-1, 1e-2, 1e-3, 1e-4}) pts.push_back({e, 1.0 - std::pow(e, 0.5)});
  const KappaEstimate k = path_kappa(ParamPath::custom(pts));
  CHECK(std::abs(k.value - 1.0) <= 1e-3);
  CHECK(k.converged);

  // exactly critical table
  std::vector<PathPoint> crit;
  for (double e : {1e-1, 1e-2, 1e-3, 1e-4})
    crit.push_back({e, 1.0 - std::log(1 / 0.3) / std::abs(std::log(e))});
  const KappaEstimate kc = path_kappa(ParamPath::custom(crit));
  CHECK(kc.value == doctest::Approx(0.3).epsilon(1e-10));

  CHECK_THROWS_AS(path_kappa(ParamPath::custom({{0.1, 0.5}, {0.05, 0.6}})), Error);
}

TEST_CASE("regime classification") {
  const std::vector<double> eps = {0.2, 0.1, 0.05, 0.02};
  const RegimeReport sub = classify_regime(ParamPath::power_law(0.5, eps));
  CHECK(sub.regime == Regime::subcritical);
  CHECK(sub.predicted_limit_membrane == doctest::Approx(1.0));

  const RegimeReport crit = classify_regime(ParamPath::log_critical(0.5, eps));
  CHECK(crit.regime == Regime::critical);
  CHECK(crit.predicted_limit_membrane == doctest::Approx(0.25));

  const RegimeReport sup = classify_regime(ParamPath::fixed_s(0.75, eps));
  CHECK(sup.regime == Regime::supercritical);
  CHECK(sup.predicted_limit_membrane == doctest::Approx(0.0));

  // invariant: membrane prediction = kappa^2 * native prediction
  for (const RegimeReport& r : {sub, crit, sup})
    CHECK(r.predicted_limit_membrane ==
          doctest::Approx(r.kappa_estimate * r.kappa_estimate * r.predicted_limit_native).epsilon(1e-12));
}

TEST_CASE("regime is stable under truncating the coarse end") {
  std::vector<PathPoint> pts;
  for (double e : {0.3, 0.1, 0.03, 0.01, 0.003, 0.001}) pts.push_back({e, 1.0 - std::pow(e, 0.4)});
  const ParamPath full = ParamPath::custom(pts);
  const ParamPath tail = ParamPath::custom({pts.begin() + 2, pts.end()});
  CHECK(classify_regime(full).regime == classify_regime(tail).regime);
}

TEST_CASE("native and membrane scalings satisfy the algebraic identity") {
  // native * eps = (eps^{1-s})^{-2}
  const std::vector<double> eps = {0.2, 0.1, 0.05, 0.02, 0.01};
  const ParamPath path = ParamPath::log_critical(0.5, eps);
  for (const PathPoint& p : path.points) {
    const double lhs = native_scaling(p.eps, p.s) * p.eps;
    const double kappa = std::pow(p.eps, 1.0 - p.s);
    CHECK(lhs == doctest::Approx(1.0 / (kappa * kappa)).epsilon(1e-12));
  }
}

TEST_CASE("fixed-s limit prediction table") {
  CHECK(fixed_s_limit_prediction(1.0, 0.75, false).prediction == LimitPrediction::zero);
  CHECK(fixed_s_limit_prediction(2.0, 0.75, false).prediction == LimitPrediction::infinity);
  const FixedSLimit crit = fixed_s_limit_prediction(1.5, 0.75, false);
  CHECK(crit.prediction == LimitPrediction::unknown);
  CHECK(crit.critical_alpha);
  const FixedSLimit cc = fixed_s_limit_prediction(1.5, 0.75, true);
  CHECK(cc.prediction == LimitPrediction::zero);
  CHECK(cc.critical_alpha);
  CHECK_THROWS_AS(fixed_s_limit_prediction(1.0, 0.4, false), Error);
}
