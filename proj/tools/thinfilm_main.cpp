// thinfilm: energies on thin box domains, scaling sweeps and inequality checks.
//
// Exit codes: 0 ok, 2 config/validation error, 3 estimator error,
// 4 partial results, 5 check failure.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thinfilm/config.hpp"
#include "thinfilm/extension.hpp"
#include "thinfilm/lattice.hpp"
#include "thinfilm/svg.hpp"

namespace tf = thinfilm;

namespace {

int exit_code_for(const tf::Error& e) {
  switch (e.code()) {
    case tf::Errc::invalid_dimension:
    case tf::Errc::empty_box:
    case tf::Errc::nonpositive_thickness:
    case tf::Errc::parse_error:
    case tf::Errc::unknown_variable:
    case tf::Errc::invalid_cutoff:
    case tf::Errc::invalid_sigma:
    case tf::Errc::path_too_short:
    case tf::Errc::path_violates_thickness:
    case tf::Errc::schema_version_mismatch:
    case tf::Errc::invalid_config:
      return 2;
    default:
      return 3;
  }
}

std::vector<double> split_csv(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find(',', pos);
    const std::string tok = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    if (!tok.empty()) out.push_back(std::stod(tok));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

struct EnergyArgs {
  std::string fn = "x1";
  int d = 2;
  std::string omega = "0,1";
  double eps = 0.1;
  double s = 0.8;
  double r = 0.25;
  std::int64_t n = 400000;
  std::uint64_t seed = 1234;
  std::string method = "mc";
  int grid = 48;
  std::string energy = "f";  // f | g | raw
};

int cmd_energy(const EnergyArgs& a) {
  if (!(a.s > 0.0 && a.s < 1.0)) {
    std::cerr << "s must lie in (0,1)\n";
    return 2;
  }
  const std::vector<double> ext = split_csv(a.omega);
  if (ext.size() != std::size_t(2 * (a.d - 1))) {
    std::cerr << "omega must list d-1 lo,hi pairs\n";
    return 2;
  }
  std::vector<double> lo, hi;
  for (std::size_t i = 0; i < ext.size(); i += 2) {
    lo.push_back(ext[i]);
    hi.push_back(ext[i + 1]);
  }
  const tf::ThinDomain dom = tf::make_thin_film(a.d, lo, hi, a.eps);
  const tf::FieldFunction u = tf::make_field(a.fn, a.d);

  tf::EnergyEstimate est;
  if (a.method == "dense") {
    est = tf::dense_seminorm_sq(u, dom, a.s, a.grid);
    if (a.energy == "f") {
      est.value *= 1.0 - a.s;
      est.std_error *= 1.0 - a.s;
      est.prefactor = 1.0 - a.s;
    }
  } else if (a.method == "mc") {
    tf::SplitConfig cfg{a.r, a.n / 2, a.n - a.n / 2};
    if (a.energy == "f") est = tf::film_energy(u, dom, a.s, cfg, a.seed);
    else if (a.energy == "g") est = tf::fixed_s_energy(u, dom, a.s, cfg, a.seed);
    else est = tf::gagliardo_sq(u, dom, a.s, cfg, a.seed);
  } else {
    std::cerr << "method must be mc or dense\n";
    return 2;
  }

  nlohmann::ordered_json j;
  j["value"] = est.value;
  j["std_error"] = est.std_error;
  j["method"] = tf::method_name(est.method);
  if (est.seed) j["seed"] = *est.seed;
  else j["seed"] = nullptr;
  std::cout << j.dump() << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, std::uint64_t seed_override, bool have_seed) {
  tf::ExperimentConfig cfg = tf::load_config(config_path);
  if (have_seed) cfg.seed = seed_override;
  std::vector<tf::SweepRecord> records;
  bool partial = false;
  std::string partial_msg;
  try {
    records = tf::run_sweep(cfg);
  } catch (const tf::PartialResultsError& e) {
    records = e.completed();
    partial = true;
    partial_msg = e.what();
  }
  const std::string title = cfg.function + " / " + tf::scaling_kind_name(cfg.scaling);
  if (!cfg.out_ndjson.empty()) tf::write_results(records, cfg.out_ndjson);
  if (!cfg.out_csv.empty()) tf::write_csv(records, cfg.out_csv);
  if (!cfg.out_svg.empty()) tf::write_sweep_svg(records, title, cfg.out_svg);
  for (const tf::SweepRecord& r : records) {
    std::cout << "eps=" << tf::format_double(r.eps) << " s=" << tf::format_double(r.s)
              << " scaled=" << tf::format_double(r.scaled_value);
    if (std::isfinite(r.ratio)) std::cout << " ratio=" << tf::format_double(r.ratio);
    std::cout << "\n";
  }
  if (partial) {
    std::cerr << "partial results: " << partial_msg << "\n";
    return 4;
  }
  return 0;
}

struct CheckArgs {
  std::string suite;
  std::string config_path;
  double sigma = 0.2;
  double s = -1.0;  // <0: use the suite default grid
  std::uint64_t seed = 2024;
  std::int64_t n = 300000;
  int n_mu = 12;
};

void print_row(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%-6s %-40s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
}

int cmd_check(const CheckArgs& a) {
  const int d = 2;
  int failures = 0;
  const tf::SplitConfig cfg{0.25, a.n, a.n};

  if (a.suite == "lemma1" || a.suite == "prop4") {
    const std::vector<std::string> fns = {"const:1", "x1", "x1sq", "sin2pi"};
    const std::vector<double> svals = a.s > 0.0 ? std::vector<double>{a.s}
                                                : std::vector<double>{0.6, 0.8, 0.95};
    if (a.suite == "prop4" && !(a.sigma > 0.0 && a.sigma < 0.5)) {
      std::cerr << "sigma must lie in (0, 1/2)\n";
      return 2;
    }
    for (const std::string& fn : fns) {
      for (double s : svals) {
        const tf::ThinDomain dom = tf::make_thin_film(d, {0.0}, {1.0}, 0.2);
        const tf::FieldFunction u = tf::make_field(fn, d);
        std::string name = a.suite + " " + fn + " s=" + tf::format_double(s);
        try {
          if (a.suite == "lemma1") {
            const tf::BoundCheck bc =
                tf::check_lattice_lower_bound(u, dom, 0.05, s, a.n_mu, a.seed, cfg);
            const bool ok = bc.holds();
            print_row(name, ok,
                      "lhs=" + tf::format_double(bc.lhs.value) + " rhs=" + tf::format_double(bc.rhs.value));
            failures += ok ? 0 : 1;
          } else {
            const tf::SmoothingCheck sc =
                tf::check_smoothing_bound(u, dom, s, a.sigma, cfg, a.seed, a.n_mu);
            const bool ok = sc.holds();
            print_row(name, ok,
                      "lhs=" + tf::format_double(sc.lhs) + " rhs=" + tf::format_double(sc.rhs.value));
            failures += ok ? 0 : 1;
          }
        } catch (const tf::Error& e) {
          print_row(name, false, std::string("error: ") + e.what());
          ++failures;
        }
      }
    }
  } else if (a.suite == "constant") {
    const std::vector<double> cutoffs = {0.1, 0.05, 0.025, 0.0125};
    const tf::Box omega = tf::Box::make({0.0}, {1.0});
    const auto zero = tf::constancy_diagnostic(tf::constant_field(1.0, d), omega, cutoffs);
    bool all_zero = true;
    for (double v : zero) all_zero = all_zero && v == 0.0;
    print_row("constant const:1", all_zero, "all shells zero");
    failures += all_zero ? 0 : 1;

    const auto grow = tf::constancy_diagnostic(tf::make_field("x1", d), omega, cutoffs);
    bool diverging = true;
    for (std::size_t i = 1; i < grow.size(); ++i)
      diverging = diverging && grow[i] >= 1.2 * grow[i - 1];
    print_row("constant x1", diverging,
              diverging ? "diagnostic diverges: non-constant" : "growth below 20% per halving");
    failures += diverging ? 0 : 1;
  } else if (a.suite == "thickfilm") {
    const tf::Box omega = tf::Box::make({0.0}, {1.0});
    std::vector<tf::PathPoint> pts;
    for (double eps : {0.3, 0.2, 0.1}) pts.push_back({eps, 1.0 - eps * eps});
    const tf::ParamPath path = tf::ParamPath::custom(pts);
    const auto seq = tf::thick_film_sequence(tf::make_field("x1", d), omega, path, 1.0, cfg, a.seed);
    double lo = seq[0].second, hi = seq[0].second;
    for (const auto& [eps, v] : seq) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const bool bounded = hi < 2.0 * lo;
    print_row("thickfilm x1", bounded, "min=" + tf::format_double(lo) + " max=" + tf::format_double(hi));
    failures += bounded ? 0 : 1;
  } else {
    std::cerr << "unknown suite '" << a.suite << "'\n";
    return 2;
  }
  return failures == 0 ? 0 : 5;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fractional energies on thin box domains"};
  app.require_subcommand(1);

  EnergyArgs ea;
  CLI::App* energy = app.add_subcommand("energy", "evaluate one energy");
  energy->add_option("--fn", ea.fn, "catalog id or expression");
  energy->add_option("--d", ea.d, "space dimension (>= 2)");
  energy->add_option("--omega", ea.omega, "cross-section extents lo,hi per axis");
  energy->add_option("--eps", ea.eps, "film thickness");
  energy->add_option("--s", ea.s, "fractional order in (0,1)");
  energy->add_option("--r", ea.r, "near/far cutoff fraction in (0,1/2)");
  energy->add_option("--n", ea.n, "total Monte Carlo samples");
  energy->add_option("--seed", ea.seed, "random seed");
  energy->add_option("--method", ea.method, "mc or dense");
  energy->add_option("--grid", ea.grid, "dense oracle cells per axis");
  energy->add_option("--energy", ea.energy, "f (weighted), g (fixed-s) or raw");

  std::string sweep_config;
  std::uint64_t sweep_seed = 0;
  CLI::App* sweep = app.add_subcommand("sweep", "run a configured sweep");
  sweep->add_option("config", sweep_config, "experiment config (JSON)")->required();
  CLI::Option* seed_opt = sweep->add_option("--seed", sweep_seed, "override the config seed");

  CheckArgs ca;
  CLI::App* check = app.add_subcommand("check", "run an inequality/diagnostic suite");
  check->add_option("--suite", ca.suite, "lemma1 | prop4 | constant | thickfilm")->required();
  check->add_option("--config", ca.config_path, "optional experiment config (seed/budget)");
  check->add_option("--sigma", ca.sigma, "smoothing cutoff in (0,1/2)");
  check->add_option("--s", ca.s, "restrict the suite to one s");
  check->add_option("--seed", ca.seed, "random seed");
  check->add_option("--n", ca.n, "Monte Carlo samples per part");
  check->add_option("--n-mu", ca.n_mu, "lattice samples per check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (energy->parsed()) return cmd_energy(ea);
    if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_seed, seed_opt->count() > 0);
    if (check->parsed()) {
      if (!ca.config_path.empty()) {
        const tf::ExperimentConfig cfg = tf::load_config(ca.config_path);
        ca.seed = cfg.seed;
        ca.n = cfg.sampler.n_near;
        ca.n_mu = cfg.n_mu_samples;
        if (check->get_option("--sigma")->count() == 0) ca.sigma = cfg.sigma;
      }
      return cmd_check(ca);
    }
  } catch (const tf::Error& e) {
    std::cerr << tf::errc_name(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
