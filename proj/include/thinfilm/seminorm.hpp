#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "thinfilm/domain.hpp"
#include "thinfilm/parallel.hpp"

namespace thinfilm {

enum class Method { monte_carlo_pairs, split_near_far, dense_grid, analytic };

const char* method_name(Method m);

struct EnergyEstimate {
  double value = 0.0;
  double std_error = 0.0;          // 0 for deterministic methods; bracket half-width for dense_grid
  std::int64_t n_samples = 0;
  Method method = Method::analytic;
  std::optional<std::uint64_t> seed;
  double prefactor = 1.0;          // multiplicative weight applied on top of the raw seminorm

  // Diagnostics (sampler only).
  double near_value = 0.0;
  double far_value = 0.0;
  double near_accept = 1.0;
  double far_accept = 1.0;
};

struct SplitConfig {
  double r = 0.25;              // near/far cutoff at |x-y| = r * eps, r in (0, 1/2)
  std::int64_t n_near = 200000;
  std::int64_t n_far = 200000;
};

// H^{d-1}(S^{d-1}) = 2 pi^{d/2} / Gamma(d/2).
double sphere_area(int d);

// The constant in the s->1 limit of (1-s)-weighted Gagliardo energies:
// H^{d-1}(S^{d-1}) / (2d).
double bbm_constant(int d);

// Monte Carlo estimate of the squared Gagliardo seminorm
//   int_{B x B} |u(x)-u(y)|^2 / |x-y|^{d+2s} dx dy,  B = film box.
//
// Near field (|x-y| < r*eps): x uniform, offset radius t with density
// proportional to t^{1-2s} on (0, r*eps] (inverse CDF t = r*eps*U^{1/(2-2s)}),
// direction uniform. The importance weight turns each sample into
// C * (|u(x)-u(x+t*th)| / t)^2 which is bounded by C*L^2 for Lipschitz u.
// Offsets leaving the box contribute 0, which keeps the estimate unbiased.
// Far field: uniform pairs, zero contribution inside the cutoff.
EnergyEstimate gagliardo_sq(const FieldFunction& u, const ThinDomain& dom, double s,
                            const SplitConfig& cfg, std::uint64_t seed,
                            Exec exec = Exec::parallel);

// (1-s) * gagliardo_sq; the equi-coercive film energy.
EnergyEstimate film_energy(const FieldFunction& u, const ThinDomain& dom, double s,
                           const SplitConfig& cfg, std::uint64_t seed,
                           Exec exec = Exec::parallel);

// Unweighted seminorm with s fixed in (1/2, 1); used by the fixed-s sweeps.
EnergyEstimate fixed_s_energy(const FieldFunction& u, const ThinDomain& dom, double s,
                              const SplitConfig& cfg, std::uint64_t seed,
                              Exec exec = Exec::parallel);

// Midpoint-rule integral of |grad u|^2 over a box of the same dimension as u.
double dirichlet_energy(const FieldFunction& u, const Box& region, int grid_n,
                        Exec exec = Exec::parallel);

// int_omega |grad' u|^2 dx' for horizontal u; omega is (d-1)-dimensional.
double reduced_dirichlet(const FieldFunction& u, const Box& omega, int grid_n);

// Deterministic oracle for gagliardo_sq. Cell-pair product quadrature with
// precomputed singular kernel moments per lattice offset; pairs close to the
// diagonal carry a rigorous derivative-based bracket which is reported as
// std_error (the estimate is the bracket midpoint). Budget: (grid_n^d)^2
// cell pairs at most 1e8.
EnergyEstimate dense_seminorm_sq(const FieldFunction& u, const ThinDomain& dom, double s,
                                 int grid_n, Exec exec = Exec::parallel);

// I(delta) = pair integral of |u(x')-u(y')|^2 / |x'-y'|^{(d-1)+2} over
// omega x omega restricted to |x'-y'| > delta. Grows without bound as
// delta -> 0 unless u is constant. cutoffs must be positive decreasing.
std::vector<double> constancy_diagnostic(const FieldFunction& u, const Box& omega,
                                         std::span<const double> cutoffs, int grid_n = 2048,
                                         Exec exec = Exec::parallel);

namespace detail {
// Kernel moments of one cell-offset class; exposed for oracle verification.
struct ClassMoments {
  std::array<double, kMaxDim * kMaxDim> m{};  // int O(xi) xi_a xi_b |xi|^{-d-2s}
  double s2 = 0.0;                            // int O(xi) |xi|^{2-d-2s}
  double s4 = 0.0;                            // int O(xi) |xi|^{4-d-2s}
  double s6 = 0.0;                            // int O(xi) |xi|^{6-d-2s}
};
ClassMoments compute_class_moments(std::span<const double> h, std::span<const double> delta,
                                   double s, int d, int angular_n = 1536);
}  // namespace detail

}  // namespace thinfilm
