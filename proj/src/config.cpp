#include "thinfilm/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace thinfilm {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::invalid_config, what); }

double require_number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) bad(std::string("config: missing number '") + key + "'");
  return j.at(key).get<double>();
}

ParamPath parse_path(const json& j) {
  if (!j.is_object() || !j.contains("kind")) bad("config: path must be an object with 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "custom") {
    if (!j.contains("points") || !j.at("points").is_array()) bad("config: custom path needs 'points'");
    std::vector<PathPoint> pts;
    for (const auto& p : j.at("points")) {
      if (!p.is_array() || p.size() != 2) bad("config: custom path points must be [eps, s] pairs");
      pts.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return ParamPath::custom(std::move(pts));
  }
  if (!j.contains("eps_list") || !j.at("eps_list").is_array()) bad("config: path needs 'eps_list'");
  std::vector<double> eps = j.at("eps_list").get<std::vector<double>>();
  if (kind == "fixed_s") return ParamPath::fixed_s(require_number(j, "s"), std::move(eps));
  if (kind == "power_law") return ParamPath::power_law(require_number(j, "beta"), std::move(eps));
  if (kind == "log_critical") return ParamPath::log_critical(require_number(j, "kappa"), std::move(eps));
  if (kind == "inverse_log_power")
    return ParamPath::inverse_log_power(require_number(j, "gamma"), std::move(eps));
  if (kind == "sqrt")  // s = 1 - sqrt(eps); convenient shorthand for the native sweeps
    return ParamPath::power_law(0.5, std::move(eps));
  bad("config: unknown path kind '" + kind + "'");
}

json path_to_json(const ParamPath& p) {
  json j;
  switch (p.kind) {
    case PathKind::fixed_s: j["kind"] = "fixed_s"; j["s"] = p.param; break;
    case PathKind::power_law: j["kind"] = "power_law"; j["beta"] = p.param; break;
    case PathKind::log_critical: j["kind"] = "log_critical"; j["kappa"] = p.param; break;
    case PathKind::inverse_log_power: j["kind"] = "inverse_log_power"; j["gamma"] = p.param; break;
    case PathKind::custom: {
      j["kind"] = "custom";
      json pts = json::array();
      for (const PathPoint& q : p.points) pts.push_back({q.eps, q.s});
      j["points"] = pts;
      return j;
    }
  }
  std::vector<double> eps;
  for (const PathPoint& q : p.points) eps.push_back(q.eps);
  j["eps_list"] = eps;
  return j;
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) bad("config: top level must be an object");
  if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer() ||
      j.at("schema_version").get<int>() != 1)
    throw Error(Errc::schema_version_mismatch, "config: schema_version must be 1");

  ExperimentConfig cfg;
  if (j.contains("function")) cfg.function = j.at("function").get<std::string>();
  if (!j.contains("domain")) bad("config: missing 'domain'");
  const json& dom = j.at("domain");
  cfg.d = int(require_number(dom, "d"));
  if (!dom.contains("omega_lo") || !dom.contains("omega_hi")) bad("config: domain needs omega_lo/omega_hi");
  cfg.omega_lo = dom.at("omega_lo").get<std::vector<double>>();
  cfg.omega_hi = dom.at("omega_hi").get<std::vector<double>>();
  if (cfg.d < 2 || cfg.d > kMaxDim) bad("config: d out of range");
  if (int(cfg.omega_lo.size()) != cfg.d - 1 || int(cfg.omega_hi.size()) != cfg.d - 1)
    bad("config: omega extents must have length d-1");
  for (int a = 0; a < cfg.d - 1; ++a)
    if (!(cfg.omega_lo[std::size_t(a)] < cfg.omega_hi[std::size_t(a)])) bad("config: empty omega extent");

  if (!j.contains("path")) bad("config: missing 'path'");
  cfg.path = parse_path(j.at("path"));

  if (j.contains("scaling")) {
    const std::string sk = j.at("scaling").get<std::string>();
    if (sk == "native") cfg.scaling = ScalingKind::native;
    else if (sk == "membrane") cfg.scaling = ScalingKind::membrane;
    else if (sk == "power_alpha") cfg.scaling = ScalingKind::power_alpha;
    else bad("config: unknown scaling '" + sk + "'");
  }
  if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
  if (cfg.scaling == ScalingKind::power_alpha) {
    for (const PathPoint& p : cfg.path.points)
      if (!(p.s > 0.5 && p.s < 1.0)) bad("config: power_alpha scaling needs s in (1/2,1)");
  }

  if (j.contains("sampler")) {
    const json& smp = j.at("sampler");
    if (smp.contains("r")) cfg.sampler.r = smp.at("r").get<double>();
    if (smp.contains("n_near")) cfg.sampler.n_near = smp.at("n_near").get<std::int64_t>();
    if (smp.contains("n_far")) cfg.sampler.n_far = smp.at("n_far").get<std::int64_t>();
    if (smp.contains("n_mu_samples")) cfg.n_mu_samples = smp.at("n_mu_samples").get<int>();
  }
  if (!(cfg.sampler.r > 0.0 && cfg.sampler.r < 0.5)) bad("config: sampler.r must lie in (0, 1/2)");
  if (cfg.sampler.n_near < 1 || cfg.sampler.n_far < 1) bad("config: sample counts must be positive");
  if (cfg.n_mu_samples < 2) bad("config: n_mu_samples must be at least 2");

  if (j.contains("sigma")) cfg.sigma = j.at("sigma").get<double>();
  if (!(cfg.sigma > 0.0 && cfg.sigma < 0.5))
    throw Error(Errc::invalid_sigma, "sigma must lie in (0, 1/2)");
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("output")) {
    const json& out = j.at("output");
    if (out.contains("ndjson")) cfg.out_ndjson = out.at("ndjson").get<std::string>();
    if (out.contains("csv")) cfg.out_csv = out.at("csv").get<std::string>();
    if (out.contains("svg")) cfg.out_svg = out.at("svg").get<std::string>();
  }

  // function must build in this dimension
  make_field(cfg.function, cfg.d);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::invalid_config, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["function"] = cfg.function;
  j["domain"] = {{"d", cfg.d}, {"omega_lo", cfg.omega_lo}, {"omega_hi", cfg.omega_hi}};
  j["path"] = path_to_json(cfg.path);
  j["scaling"] = scaling_kind_name(cfg.scaling);
  j["alpha"] = cfg.alpha;
  j["sampler"] = {{"r", cfg.sampler.r},
                  {"n_near", cfg.sampler.n_near},
                  {"n_far", cfg.sampler.n_far},
                  {"n_mu_samples", cfg.n_mu_samples}};
  j["sigma"] = cfg.sigma;
  j["seed"] = cfg.seed;
  json out;
  if (!cfg.out_ndjson.empty()) out["ndjson"] = cfg.out_ndjson;
  if (!cfg.out_csv.empty()) out["csv"] = cfg.out_csv;
  if (!cfg.out_svg.empty()) out["svg"] = cfg.out_svg;
  j["output"] = out;
  return j.dump(2);
}

}  // namespace thinfilm
