#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thinfilm/scaling.hpp"
#include "thinfilm/seminorm.hpp"

namespace thinfilm {

enum class ScalingKind { native, membrane, power_alpha };

const char* scaling_kind_name(ScalingKind k);

struct SweepRecord {
  double eps = 0.0;
  double s = 0.0;
  ScalingKind scaling = ScalingKind::native;
  double alpha = 0.0;  // only with power_alpha
  EnergyEstimate energy;
  double scaled_value = 0.0;
  double predicted_limit = 0.0;  // NaN when no finite prediction applies
  double ratio = 0.0;            // NaN when predicted_limit is not positive finite
  std::int64_t wall_time_ms = 0; // in-memory only, never serialized
};

struct ExperimentConfig {
  int schema_version = 1;
  std::string function = "x1";
  int d = 2;
  std::vector<double> omega_lo{0.0};
  std::vector<double> omega_hi{1.0};
  ParamPath path = ParamPath::fixed_s(0.75, {0.2, 0.1, 0.05, 0.02});
  ScalingKind scaling = ScalingKind::native;
  double alpha = 0.0;
  SplitConfig sampler;
  int n_mu_samples = 16;
  double sigma = 0.2;
  std::uint64_t seed = 1234;
  std::string out_ndjson, out_csv, out_svg;  // empty = skip
};

class PartialResultsError : public Error {
 public:
  PartialResultsError(std::vector<SweepRecord> completed, std::string message)
      : Error(Errc::invalid_config, std::move(message)), completed_(std::move(completed)) {}
  const std::vector<SweepRecord>& completed() const { return completed_; }

 private:
  std::vector<SweepRecord> completed_;
};

// One record per path point, in path order, deterministic for fixed
// (config, seed). Sample budgets grow like eps^{-1/2} from the coarsest
// point. Predicted limits use the deterministic reduced Dirichlet integral
// and the exact limit constant, never Monte Carlo.
std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg);

struct RateFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
};

// Ordinary least squares on (log eps, log y).
RateFit fit_rate(const std::vector<SweepRecord>& records, bool use_scaled);
RateFit fit_rate_xy(std::span<const double> x, std::span<const double> y);

// Newline-delimited JSON with a mandatory schema_version per record.
// Round-trips doubles exactly (shortest round-trip encoding).
void write_results(const std::vector<SweepRecord>& records, const std::string& path);
std::vector<SweepRecord> read_results(const std::string& path);

void write_csv(const std::vector<SweepRecord>& records, const std::string& path);

}  // namespace thinfilm
