#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "thinfilm/config.hpp"
#include "thinfilm/svg.hpp"

using namespace thinfilm;

namespace {

ExperimentConfig small_native_config() {
  ExperimentConfig cfg;
  cfg.function = "x1";
  cfg.d = 2;
  cfg.omega_lo = {0.0};
  cfg.omega_hi = {1.0};
  cfg.path = ParamPath::power_law(0.5, {0.2, 0.1, 0.05});
  cfg.scaling = ScalingKind::native;
  cfg.sampler = SplitConfig{0.25, 60000, 60000};
  cfg.seed = 31;
  return cfg;
}

}  // namespace

TEST_CASE("sweep records and determinism") {
  const ExperimentConfig cfg = small_native_config();
  const auto a = run_sweep(cfg);
  const auto b = run_sweep(cfg);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].energy.value == b[i].energy.value);  // bit-for-bit
    CHECK(a[i].scaled_value ==
          doctest::Approx(native_scaling(a[i].eps, a[i].s) * a[i].energy.value).epsilon(1e-15));
    CHECK(a[i].predicted_limit == doctest::Approx(bbm_constant(2)));
    CHECK(a[i].ratio == doctest::Approx(a[i].scaled_value / a[i].predicted_limit));
  }
}

TEST_CASE("constant sweeps flag undefined ratios") {
  ExperimentConfig cfg = small_native_config();
  cfg.function = "const:2";
  const auto recs = run_sweep(cfg);
  for (const SweepRecord& r : recs) {
    CHECK(r.scaled_value == 0.0);
    CHECK(std::isnan(r.ratio));
  }
}

TEST_CASE("membrane sweep uses the regime coefficient") {
  ExperimentConfig cfg = small_native_config();
  cfg.scaling = ScalingKind::membrane;
  cfg.path = ParamPath::log_critical(0.5, {0.1, 0.05});
  const auto recs = run_sweep(cfg);
  CHECK(recs[0].predicted_limit == doctest::Approx(0.25 * bbm_constant(2)));
}

TEST_CASE("budget refinement shrinks reported errors") {
  // doubling the sample count should cut std_error by about sqrt(2)
  const ThinDomain dom = make_thin_film(2, {0.0}, {1.0}, 0.1);
  const FieldFunction u = make_field("sin2pi", 2);
  double se_small = 0.0, se_big = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    se_small += gagliardo_sq(u, dom, 0.8, SplitConfig{0.25, 20000, 20000}, seed).std_error;
    se_big += gagliardo_sq(u, dom, 0.8, SplitConfig{0.25, 40000, 40000}, 100 + seed).std_error;
  }
  CHECK(se_small / se_big >= 1.2);
}

TEST_CASE("rate fitting") {
  SUBCASE("exact power data") {
    std::vector<double> x, y;
    for (double e : {0.3, 0.1, 0.03, 0.01}) {
      x.push_back(e);
      y.push_back(std::pow(e, 1.5));
    }
    const RateFit fit = fit_rate_xy(x, y);
    CHECK(fit.exponent == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("too few points") {
    CHECK_THROWS_AS(fit_rate_xy(std::vector<double>{0.1, 0.05}, std::vector<double>{1.0, 2.0}), Error);
  }
  SUBCASE("non positive values") {
    CHECK_THROWS_AS(fit_rate_xy(std::vector<double>{0.1, 0.05, 0.02}, std::vector<double>{1.0, 0.0, 2.0}),
                    Error);
  }
}

TEST_CASE("results round trip") {
  const ExperimentConfig cfg = small_native_config();
  const auto recs = run_sweep(cfg);
  const std::string path = "test_results.ndjson";
  write_results(recs, path);
  const auto back = read_results(path);
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].eps == recs[i].eps);
    CHECK(back[i].s == recs[i].s);
    CHECK(back[i].energy.value == recs[i].energy.value);  // exact double round trip
    CHECK(back[i].energy.std_error == recs[i].energy.std_error);
    CHECK(back[i].scaled_value == recs[i].scaled_value);
    CHECK(back[i].ratio == recs[i].ratio);
  }
  std::remove(path.c_str());

  SUBCASE("empty record list") {
    write_results({}, path);
    CHECK(read_results(path).empty());
    std::remove(path.c_str());
  }
  SUBCASE("unknown schema version") {
    {
      std::ofstream out(path);
      out << "{\"schema_version\":99}\n";
    }
    CHECK_THROWS_AS(read_results(path), Error);
    try {
      read_results(path);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::schema_version_mismatch);
    }
    std::remove(path.c_str());
  }
}

TEST_CASE("config parsing") {
  const std::string good = R"({
    "schema_version": 1,
    "function": "x1",
    "domain": {"d": 2, "omega_lo": [0], "omega_hi": [1]},
    "path": {"kind": "log_critical", "kappa": 0.5, "eps_list": [0.1, 0.05, 0.02]},
    "scaling": "membrane",
    "sampler": {"r": 0.25, "n_near": 1000, "n_far": 1000},
    "sigma": 0.2,
    "seed": 7
  })";
  const ExperimentConfig cfg = config_from_json_text(good);
  CHECK(cfg.scaling == ScalingKind::membrane);
  CHECK(cfg.path.points.size() == 3);
  CHECK(cfg.seed == 7);

  // round trip through the writer
  const ExperimentConfig again = config_from_json_text(config_to_json_text(cfg));
  CHECK(again.path.param == doctest::Approx(cfg.path.param));

  CHECK_THROWS_AS(config_from_json_text("{"), Error);
  CHECK_THROWS_AS(config_from_json_text(R"({"schema_version": 2})"), Error);
  CHECK_THROWS_AS(config_from_json_text(R"({"schema_version": 1})"), Error);
  const std::string bad_sigma = R"({
    "schema_version": 1, "function": "x1",
    "domain": {"d": 2, "omega_lo": [0], "omega_hi": [1]},
    "path": {"kind": "fixed_s", "s": 0.75, "eps_list": [0.1, 0.05, 0.02]},
    "sigma": 0.7
  })";
  try {
    config_from_json_text(bad_sigma);
    FAIL("unreachable");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_sigma);
  }
}

TEST_CASE("svg output is deterministic and well formed") {
  const ExperimentConfig cfg = small_native_config();
  const auto recs = run_sweep(cfg);
  const std::string a = render_sweep_svg(recs, "t");
  const std::string b = render_sweep_svg(recs, "t");
  CHECK(a == b);
  CHECK(a.find("<svg") == 0);
  CHECK(a.find("polyline") != std::string::npos);
  CHECK(a.find("predicted") != std::string::npos);
  CHECK(a.rfind("</svg>\n") == a.size() - 7);
}
