#include "thinfilm/sweep.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "thinfilm/rng.hpp"

namespace thinfilm {

const char* scaling_kind_name(ScalingKind k) {
  switch (k) {
    case ScalingKind::native: return "native";
    case ScalingKind::membrane: return "membrane";
    case ScalingKind::power_alpha: return "power_alpha";
  }
  return "unknown";
}

namespace {

constexpr int kSchemaVersion = 1;

double scaling_factor(ScalingKind kind, double eps, double s, double alpha) {
  switch (kind) {
    case ScalingKind::native: return native_scaling(eps, s);
    case ScalingKind::membrane: return 1.0 / eps;
    case ScalingKind::power_alpha: return std::pow(eps, -alpha);
  }
  return 1.0;
}

}  // namespace

std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg) {
  const FieldFunction u = make_field(cfg.function, cfg.d);
  const Box omega = Box::make(cfg.omega_lo, cfg.omega_hi);
  if (omega.dim() != cfg.d - 1)
    throw Error(Errc::invalid_config, "omega must have dimension d-1");
  if (cfg.path.points.empty()) throw Error(Errc::invalid_config, "path has no points");

  // Deterministic predicted limit per regime; NaN when no finite positive
  // prediction applies (constant fields, power_alpha paths).
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double base_limit = nan;
  if (u.horizontal_only() && u.has_gradient()) {
    const double rd = reduced_dirichlet(u, omega, 512);
    const double cd = bbm_constant(cfg.d);
    if (cfg.scaling == ScalingKind::native) {
      base_limit = cd * rd;
    } else if (cfg.scaling == ScalingKind::membrane) {
      const RegimeReport regime = classify_regime(cfg.path);
      base_limit = regime.predicted_limit_membrane * cd * rd;
    }
  }

  const double eps0 = cfg.path.points.front().eps;
  std::vector<SweepRecord> records;
  records.reserve(cfg.path.points.size());
  for (std::size_t i = 0; i < cfg.path.points.size(); ++i) {
    const PathPoint& p = cfg.path.points[i];
    try {
      const auto t0 = std::chrono::steady_clock::now();
      ThinDomain dom;
      dom.d = cfg.d;
      dom.omega = omega;
      dom.eps = p.eps;
      // budget grows as eps shrinks to offset the decaying far-field share
      const double boost = std::sqrt(eps0 / p.eps);
      SplitConfig sc = cfg.sampler;
      sc.n_near = std::int64_t(std::ceil(double(sc.n_near) * boost));
      sc.n_far = std::int64_t(std::ceil(double(sc.n_far) * boost));
      const std::uint64_t seed_i = mix64(cfg.seed ^ (0xC0FFEE00 + i));

      SweepRecord rec;
      rec.eps = p.eps;
      rec.s = p.s;
      rec.scaling = cfg.scaling;
      rec.alpha = cfg.scaling == ScalingKind::power_alpha ? cfg.alpha : 0.0;
      rec.energy = cfg.scaling == ScalingKind::power_alpha
                       ? fixed_s_energy(u, dom, p.s, sc, seed_i)
                       : film_energy(u, dom, p.s, sc, seed_i);
      const double factor = scaling_factor(cfg.scaling, p.eps, p.s, cfg.alpha);
      rec.scaled_value = factor * rec.energy.value;
      rec.predicted_limit = base_limit;
      rec.ratio = (std::isfinite(base_limit) && base_limit > 0.0) ? rec.scaled_value / base_limit : nan;
      rec.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
      records.push_back(std::move(rec));
    } catch (const Error& e) {
      throw PartialResultsError(std::move(records),
                                std::string("sweep point eps=") + format_double(p.eps) +
                                    " failed: " + e.what());
    }
  }
  return records;
}

RateFit fit_rate_xy(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::invalid_config, "mismatched fit inputs");
  if (x.size() < 3) throw Error(Errc::too_few_points, "rate fit needs at least 3 points");
  for (double v : y)
    if (!(v > 0.0)) throw Error(Errc::non_positive_values, "rate fit needs positive values");
  for (double v : x)
    if (!(v > 0.0)) throw Error(Errc::non_positive_values, "rate fit needs positive abscissae");
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  RateFit fit;
  fit.n_points = int(x.size());
  const double denom = n * sxx - sx * sx;
  fit.exponent = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.exponent * sx) / n;
  const double sy_var = n * syy - sy * sy;
  if (sy_var <= 0.0) {
    fit.r_squared = 1.0;  // constant data: the fit is exact with zero slope
  } else {
    const double r = (n * sxy - sx * sy) / std::sqrt(denom * sy_var);
    fit.r_squared = r * r;
  }
  return fit;
}

RateFit fit_rate(const std::vector<SweepRecord>& records, bool use_scaled) {
  std::vector<double> x, y;
  x.reserve(records.size());
  y.reserve(records.size());
  for (const SweepRecord& r : records) {
    x.push_back(r.eps);
    y.push_back(use_scaled ? r.scaled_value : r.energy.value);
  }
  return fit_rate_xy(x, y);
}

namespace {

nlohmann::ordered_json record_to_json(const SweepRecord& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["eps"] = r.eps;
  j["s"] = r.s;
  j["scaling"] = scaling_kind_name(r.scaling);
  j["alpha"] = r.alpha;
  nlohmann::ordered_json e;
  e["value"] = r.energy.value;
  e["std_error"] = r.energy.std_error;
  e["n_samples"] = r.energy.n_samples;
  e["method"] = method_name(r.energy.method);
  if (r.energy.seed) e["seed"] = *r.energy.seed;
  else e["seed"] = nullptr;
  e["prefactor"] = r.energy.prefactor;
  j["energy"] = e;
  j["scaled_value"] = r.scaled_value;
  if (std::isfinite(r.predicted_limit)) j["predicted_limit"] = r.predicted_limit;
  else j["predicted_limit"] = nullptr;
  if (std::isfinite(r.ratio)) j["ratio"] = r.ratio;
  else j["ratio"] = nullptr;
  return j;
}

Method method_from_name(const std::string& name) {
  if (name == "monte_carlo_pairs") return Method::monte_carlo_pairs;
  if (name == "split_near_far") return Method::split_near_far;
  if (name == "dense_grid") return Method::dense_grid;
  if (name == "analytic") return Method::analytic;
  throw Error(Errc::invalid_config, "unknown method '" + name + "'");
}

ScalingKind scaling_from_name(const std::string& name) {
  if (name == "native") return ScalingKind::native;
  if (name == "membrane") return ScalingKind::membrane;
  if (name == "power_alpha") return ScalingKind::power_alpha;
  throw Error(Errc::invalid_config, "unknown scaling '" + name + "'");
}

}  // namespace

void write_results(const std::vector<SweepRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot open '" + path + "' for writing");
  for (const SweepRecord& r : records) out << record_to_json(r).dump() << '\n';
  if (!out) throw Error(Errc::io_error, "write failed for '" + path + "'");
}

std::vector<SweepRecord> read_results(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");
  std::vector<SweepRecord> out;
  std::string line;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::io_error, std::string("bad record line: ") + e.what());
    }
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
        j["schema_version"].get<int>() != kSchemaVersion)
      throw Error(Errc::schema_version_mismatch, "unsupported schema_version in '" + path + "'");
    SweepRecord r;
    r.eps = j.at("eps").get<double>();
    r.s = j.at("s").get<double>();
    r.scaling = scaling_from_name(j.at("scaling").get<std::string>());
    r.alpha = j.at("alpha").get<double>();
    const auto& e = j.at("energy");
    r.energy.value = e.at("value").get<double>();
    r.energy.std_error = e.at("std_error").get<double>();
    r.energy.n_samples = e.at("n_samples").get<std::int64_t>();
    r.energy.method = method_from_name(e.at("method").get<std::string>());
    if (!e.at("seed").is_null()) r.energy.seed = e.at("seed").get<std::uint64_t>();
    r.energy.prefactor = e.at("prefactor").get<double>();
    r.scaled_value = j.at("scaled_value").get<double>();
    r.predicted_limit = j.at("predicted_limit").is_null() ? nan : j.at("predicted_limit").get<double>();
    r.ratio = j.at("ratio").is_null() ? nan : j.at("ratio").get<double>();
    out.push_back(std::move(r));
  }
  return out;
}

void write_csv(const std::vector<SweepRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot open '" + path + "' for writing");
  out << "eps,s,scaled_value,std_error,predicted,ratio\n";
  for (const SweepRecord& r : records) {
    const double factor = scaling_factor(r.scaling, r.eps, r.s, r.alpha);
    out << format_double(r.eps) << ',' << format_double(r.s) << ',' << format_double(r.scaled_value)
        << ',' << format_double(std::abs(factor) * r.energy.std_error) << ','
        << (std::isfinite(r.predicted_limit) ? format_double(r.predicted_limit) : "")
        << ',' << (std::isfinite(r.ratio) ? format_double(r.ratio) : "") << '\n';
  }
  if (!out) throw Error(Errc::io_error, "write failed for '" + path + "'");
}

}  // namespace thinfilm
