#include "thinfilm/seminorm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "thinfilm/rng.hpp"

namespace thinfilm {

const char* method_name(Method m) {
  switch (m) {
    case Method::monte_carlo_pairs: return "monte_carlo_pairs";
    case Method::split_near_far: return "split_near_far";
    case Method::dense_grid: return "dense_grid";
    case Method::analytic: return "analytic";
  }
  return "unknown";
}

double sphere_area(int d) {
  if (d < 1) throw Error(Errc::invalid_dimension, "sphere dimension must be >= 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double bbm_constant(int d) { return sphere_area(d) / (2.0 * d); }

namespace {

constexpr std::int64_t kBatch = 1 << 14;

struct PartAccum {
  double sum = 0.0;
  double sumsq = 0.0;
  std::int64_t accepted = 0;
  int nonfinite = 0;
};

struct PartResult {
  double mean = 0.0;
  double se = 0.0;
  double accept_rate = 1.0;
  bool nonfinite = false;
};

// Deterministic mean/stderr over n samples produced by `sample(counter)`;
// batches are folded in index order so worker count never changes the bits.
template <class SampleFn>
PartResult run_part(std::int64_t n, Exec exec, SampleFn&& sample) {
  if (n <= 0) return {};
  const std::int64_t nb = (n + kBatch - 1) / kBatch;
  std::vector<PartAccum> acc(static_cast<std::size_t>(nb));
  for_batches(nb, exec, [&](std::int64_t b) {
    PartAccum a;
    const std::int64_t end = std::min(n, (b + 1) * kBatch);
    for (std::int64_t i = b * kBatch; i < end; ++i) {
      const double w = sample(std::uint64_t(i), a.accepted);
      if (!std::isfinite(w)) {
        a.nonfinite = 1;
        continue;
      }
      a.sum += w;
      a.sumsq += w * w;
    }
    acc[std::size_t(b)] = a;
  });
  PartAccum total;
  for (const PartAccum& a : acc) {
    total.sum += a.sum;
    total.sumsq += a.sumsq;
    total.accepted += a.accepted;
    total.nonfinite += a.nonfinite;
  }
  PartResult r;
  r.nonfinite = total.nonfinite != 0;
  r.mean = total.sum / double(n);
  if (n > 1) {
    const double var = std::max(0.0, (total.sumsq - total.sum * total.sum / double(n)) / double(n - 1));
    r.se = std::sqrt(var / double(n));
  }
  r.accept_rate = double(total.accepted) / double(n);
  return r;
}

void validate_split(const SplitConfig& cfg) {
  if (!(cfg.r > 0.0 && cfg.r < 0.5))
    throw Error(Errc::invalid_cutoff, "near/far cutoff r must lie in (0, 1/2)");
  if (cfg.n_near < 1 || cfg.n_far < 1)
    throw Error(Errc::invalid_config, "sample counts must be positive");
}

}  // namespace

EnergyEstimate gagliardo_sq(const FieldFunction& u, const ThinDomain& dom, double s,
                            const SplitConfig& cfg, std::uint64_t seed, Exec exec) {
  if (!(s > 0.0 && s < 1.0)) throw Error(Errc::invalid_s, "s must lie in (0,1)");
  validate_split(cfg);
  const Box box = dom.film_box();
  const int d = dom.d;
  const double vol = box.volume();
  const double cut = cfg.r * dom.eps;
  const double two_minus_2s = 2.0 - 2.0 * s;
  const double c_near = vol * sphere_area(d) * std::pow(cut, two_minus_2s) / two_minus_2s;
  const bool grad_ok = u.has_gradient();
  const double tiny_t = 1e-6 * cut;

  const CounterRng rng_near = CounterRng::make(seed, 1);
  const PartResult near = run_part(cfg.n_near, exec, [&](std::uint64_t i, std::int64_t& accepted) {
    std::array<double, kMaxDim> x{}, dir{}, y{};
    for (int a = 0; a < d; ++a) x[a] = box.lo[a] + rng_near.uniform(i, std::uint32_t(a)) * box.extent(a);
    double norm2 = 0.0;
    for (int a = 0; a < d; a += 2) {
      double g0, g1;
      rng_near.gaussian_pair(i, std::uint32_t(8 + a), g0, g1);
      dir[a] = g0;
      if (a + 1 < d) dir[a + 1] = g1;
    }
    for (int a = 0; a < d; ++a) norm2 += dir[a] * dir[a];
    if (norm2 < 1e-280) return 0.0;
    const double inv = 1.0 / std::sqrt(norm2);
    const double t = cut * std::pow(rng_near.uniform(i, 24), 1.0 / two_minus_2s);
    for (int a = 0; a < d; ++a) {
      dir[a] *= inv;
      y[a] = x[a] + t * dir[a];
    }
    if (!box.contains_open({y.data(), std::size_t(d)})) return 0.0;
    ++accepted;
    double ratio;  // |u(x)-u(y)| / t
    if (grad_ok && t < tiny_t) {
      // Differences below fp resolution: use the midpoint directional
      // derivative instead of a catastrophically cancelled subtraction.
      std::array<double, kMaxDim> mid{}, g{};
      for (int a = 0; a < d; ++a) mid[a] = x[a] + 0.5 * t * dir[a];
      u.gradient({mid.data(), std::size_t(d)}, {g.data(), std::size_t(d)});
      ratio = 0.0;
      for (int a = 0; a < d; ++a) ratio += g[a] * dir[a];
    } else {
      ratio = (u.value({x.data(), std::size_t(d)}) - u.value({y.data(), std::size_t(d)})) / t;
    }
    return c_near * ratio * ratio;
  });

  const double vol2 = vol * vol;
  const double kern_exp = -0.5 * (d + 2.0 * s);
  const CounterRng rng_far = CounterRng::make(seed, 2);
  const PartResult far = run_part(cfg.n_far, exec, [&](std::uint64_t i, std::int64_t& accepted) {
    std::array<double, kMaxDim> x{}, y{};
    for (int a = 0; a < d; ++a) {
      x[a] = box.lo[a] + rng_far.uniform(i, std::uint32_t(a)) * box.extent(a);
      y[a] = box.lo[a] + rng_far.uniform(i, std::uint32_t(8 + a)) * box.extent(a);
    }
    double dist2 = 0.0;
    for (int a = 0; a < d; ++a) dist2 += (x[a] - y[a]) * (x[a] - y[a]);
    if (dist2 <= cut * cut) return 0.0;
    ++accepted;
    const double du = u.value({x.data(), std::size_t(d)}) - u.value({y.data(), std::size_t(d)});
    return vol2 * du * du * std::pow(dist2, kern_exp);
  });

  if (near.nonfinite || far.nonfinite)
    throw Error(Errc::non_finite_sample, "integrand overflow: u is too singular for the sampler");
  if (far.accept_rate < 1e-4)
    throw Error(Errc::degenerate_sampling, "far-field acceptance rate below 1e-4");

  EnergyEstimate est;
  est.value = near.mean + far.mean;
  est.std_error = std::hypot(near.se, far.se);
  est.n_samples = cfg.n_near + cfg.n_far;
  est.method = Method::split_near_far;
  est.seed = seed;
  est.near_value = near.mean;
  est.far_value = far.mean;
  est.near_accept = near.accept_rate;
  est.far_accept = far.accept_rate;
  return est;
}

EnergyEstimate film_energy(const FieldFunction& u, const ThinDomain& dom, double s,
                           const SplitConfig& cfg, std::uint64_t seed, Exec exec) {
  EnergyEstimate est = gagliardo_sq(u, dom, s, cfg, seed, exec);
  const double w = 1.0 - s;
  est.value *= w;
  est.std_error *= w;
  est.near_value *= w;
  est.far_value *= w;
  est.prefactor = w;
  return est;
}

EnergyEstimate fixed_s_energy(const FieldFunction& u, const ThinDomain& dom, double s,
                              const SplitConfig& cfg, std::uint64_t seed, Exec exec) {
  if (!(s > 0.5 && s < 1.0)) throw Error(Errc::invalid_s, "s must lie in (1/2,1)");
  return gagliardo_sq(u, dom, s, cfg, seed, exec);
}

double dirichlet_energy(const FieldFunction& u, const Box& region, int grid_n, Exec exec) {
  if (!u.has_gradient()) throw Error(Errc::gradient_unavailable, "field has no gradient");
  if (grid_n < 1) throw Error(Errc::invalid_config, "grid_n must be positive");
  const int k = region.dim();
  std::array<double, kMaxDim> h{};
  for (int a = 0; a < k; ++a) h[a] = region.extent(a) / grid_n;
  std::int64_t inner = 1;
  for (int a = 1; a < k; ++a) inner *= grid_n;
  const double cell = region.volume() / (double(grid_n) * double(inner));

  std::vector<double> slice(std::size_t(grid_n), 0.0);
  for_batches(grid_n, exec, [&](std::int64_t i0) {
    std::array<double, kMaxDim> x{}, g{};
    std::array<int, kMaxDim> idx{};
    x[0] = region.lo[0] + (double(i0) + 0.5) * h[0];
    double sum = 0.0;
    for (std::int64_t flat = 0; flat < inner; ++flat) {
      std::int64_t rem = flat;
      for (int a = 1; a < k; ++a) {
        idx[a] = int(rem % grid_n);
        rem /= grid_n;
        x[a] = region.lo[a] + (idx[a] + 0.5) * h[a];
      }
      u.gradient({x.data(), std::size_t(k)}, {g.data(), std::size_t(k)});
      double n2 = 0.0;
      for (int a = 0; a < k; ++a) n2 += g[a] * g[a];
      sum += n2;
    }
    slice[std::size_t(i0)] = sum;
  });
  double total = 0.0;
  for (double v : slice) total += v;
  return total * cell;
}

double reduced_dirichlet(const FieldFunction& u, const Box& omega, int grid_n) {
  if (!u.horizontal_only()) throw Error(Errc::not_horizontal, "field depends on the vertical variable");
  if (!u.has_gradient()) throw Error(Errc::gradient_unavailable, "field has no gradient");
  const int d = u.dim();
  if (omega.dim() != d - 1) throw Error(Errc::invalid_config, "omega must have dimension d-1");
  const int k = d - 1;
  std::array<double, kMaxDim> h{};
  for (int a = 0; a < k; ++a) h[a] = omega.extent(a) / grid_n;
  std::int64_t cells = 1;
  for (int a = 0; a < k; ++a) cells *= grid_n;
  const double cell = omega.volume() / double(cells);
  std::array<double, kMaxDim> x{}, g{};
  x[k] = 0.0;  // horizontal: the height is immaterial
  double total = 0.0;
  for (std::int64_t flat = 0; flat < cells; ++flat) {
    std::int64_t rem = flat;
    for (int a = 0; a < k; ++a) {
      x[a] = omega.lo[a] + (double(rem % grid_n) + 0.5) * h[a];
      rem /= grid_n;
    }
    u.gradient({x.data(), std::size_t(d)}, {g.data(), std::size_t(d)});
    double n2 = 0.0;
    for (int a = 0; a < k; ++a) n2 += g[a] * g[a];
    total += n2;
  }
  return total * cell;
}

std::vector<double> constancy_diagnostic(const FieldFunction& u, const Box& omega,
                                         std::span<const double> cutoffs, int grid_n, Exec exec) {
  if (!u.horizontal_only()) throw Error(Errc::not_horizontal, "field depends on the vertical variable");
  if (cutoffs.empty()) return {};
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    if (!(cutoffs[i] > 0.0)) throw Error(Errc::invalid_config, "cutoffs must be positive");
    if (i && !(cutoffs[i] < cutoffs[i - 1]))
      throw Error(Errc::invalid_config, "cutoffs must be strictly decreasing");
  }
  const int k = omega.dim();
  const int d = u.dim();
  if (k != d - 1) throw Error(Errc::invalid_config, "omega must have dimension d-1");

  std::int64_t n_pts = 1;
  for (int a = 0; a < k; ++a) n_pts *= grid_n;
  if (n_pts > 200000)
    throw Error(Errc::budget_exceeded, "diagnostic grid too large");
  std::array<double, kMaxDim> h{};
  for (int a = 0; a < k; ++a) h[a] = omega.extent(a) / grid_n;
  const double cell = omega.volume() / double(n_pts);

  std::vector<double> pts(std::size_t(n_pts) * std::size_t(k));
  std::vector<double> vals(static_cast<std::size_t>(n_pts));
  {
    std::array<double, kMaxDim> x{};
    x[k] = 0.0;
    for (std::int64_t flat = 0; flat < n_pts; ++flat) {
      std::int64_t rem = flat;
      for (int a = 0; a < k; ++a) {
        x[a] = omega.lo[a] + (double(rem % grid_n) + 0.5) * h[a];
        rem /= grid_n;
        pts[std::size_t(flat) * k + a] = x[a];
      }
      vals[std::size_t(flat)] = u.value({x.data(), std::size_t(d)});
    }
  }

  const double exponent = -0.5 * (k + 2.0);
  const std::size_t nc = cutoffs.size();
  // hist[b][m] collects pairs whose distance lies in (cutoff_m, cutoff_{m-1}];
  // prefix sums then give I(cutoff_m).
  const std::int64_t nb = (n_pts + 255) / 256;
  std::vector<std::vector<double>> hist(std::size_t(nb), std::vector<double>(nc, 0.0));
  for_batches(nb, exec, [&](std::int64_t b) {
    std::vector<double>& hloc = hist[std::size_t(b)];
    const std::int64_t end = std::min<std::int64_t>(n_pts, (b + 1) * 256);
    for (std::int64_t i = b * 256; i < end; ++i) {
      for (std::int64_t j = i + 1; j < n_pts; ++j) {
        double dist2 = 0.0;
        for (int a = 0; a < k; ++a) {
          const double dd = pts[std::size_t(i) * k + a] - pts[std::size_t(j) * k + a];
          dist2 += dd * dd;
        }
        const double dist = std::sqrt(dist2);
        // first cutoff index m with cutoff_m < dist; contributes to all >= m
        std::size_t m = 0;
        while (m < nc && cutoffs[m] >= dist) ++m;
        if (m == nc) continue;
        const double du = vals[std::size_t(i)] - vals[std::size_t(j)];
        hloc[m] += 2.0 * du * du * std::pow(dist2, exponent);  // ordered pairs
      }
    }
  });
  std::vector<double> shells(nc, 0.0);
  for (const auto& hloc : hist)
    for (std::size_t m = 0; m < nc; ++m) shells[m] += hloc[m];
  std::vector<double> out(nc, 0.0);
  double acc = 0.0;
  for (std::size_t m = 0; m < nc; ++m) {
    acc += shells[m];
    out[m] = acc * cell * cell;
  }
  return out;
}

}  // namespace thinfilm
