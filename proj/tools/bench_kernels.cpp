// Timings for the parallel kernels against the serial reference path.
// Both paths fold batch results in the same order, so the outputs must match
// bit for bit; the table reports that check alongside the speedup.

#include <chrono>
#include <cstdio>

#include "thinfilm/seminorm.hpp"

namespace tf = thinfilm;

namespace {

template <class F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
  const tf::ThinDomain dom = tf::make_thin_film(2, {0.0}, {1.0}, 0.1);
  const tf::FieldFunction u = tf::make_field("sin2pi", 2);
  const double s = 0.8;

  std::printf("%-28s %12s %12s %8s %s\n", "kernel", "serial ms", "parallel ms", "speedup", "identical");

  for (std::int64_t n : {std::int64_t(1) << 20, std::int64_t(1) << 22}) {
    const tf::SplitConfig cfg{0.25, n, n};
    tf::EnergyEstimate es, ep;
    const double ts = time_ms([&] { es = tf::gagliardo_sq(u, dom, s, cfg, 42, tf::Exec::serial); });
    const double tp = time_ms([&] { ep = tf::gagliardo_sq(u, dom, s, cfg, 42, tf::Exec::parallel); });
    std::printf("%-28s %12.1f %12.1f %8.2f %s\n",
                ("mc_seminorm n=" + std::to_string(2 * n)).c_str(), ts, tp, ts / tp,
                es.value == ep.value && es.std_error == ep.std_error ? "yes" : "NO");
  }

  for (int grid : {32, 48}) {
    tf::EnergyEstimate es, ep;
    const double ts = time_ms([&] { es = tf::dense_seminorm_sq(u, dom, s, grid, tf::Exec::serial); });
    const double tp = time_ms([&] { ep = tf::dense_seminorm_sq(u, dom, s, grid, tf::Exec::parallel); });
    std::printf("%-28s %12.1f %12.1f %8.2f %s\n", ("dense_oracle grid=" + std::to_string(grid)).c_str(),
                ts, tp, ts / tp, es.value == ep.value && es.std_error == ep.std_error ? "yes" : "NO");
  }

  const tf::Box omega = tf::Box::make({0.0}, {1.0});
  const std::vector<double> cutoffs = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> vs, vp;
  const double ts = time_ms([&] { vs = tf::constancy_diagnostic(u, omega, cutoffs, 2048, tf::Exec::serial); });
  const double tp = time_ms([&] { vp = tf::constancy_diagnostic(u, omega, cutoffs, 2048, tf::Exec::parallel); });
  std::printf("%-28s %12.1f %12.1f %8.2f %s\n", "constancy_diagnostic", ts, tp, ts / tp,
              vs == vp ? "yes" : "NO");
  return 0;
}
