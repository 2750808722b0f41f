#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thinfilm/seminorm.hpp"

namespace thinfilm {

// Orthonormal d-frame plus lattice parameters. Columns of `nu` are the frame
// vectors; lattice spacing is r*rho along each of them.
struct Frame {
  int d = 0;
  std::vector<double> nu;  // column-major d x d
  double rho = 1.0;        // in (0, 1]
  double r = 1.0;          // lattice scale

  double col(int j, int a) const { return nu[std::size_t(j) * d + a]; }
  double spacing() const { return r * rho; }
};

// Haar-distributed orthonormal frame (Gram-Schmidt of a Gaussian matrix with
// positive-diagonal convention). rho/r left at 1.
Frame random_frame(int d, std::uint64_t seed);

double frame_det(const Frame& f);
bool frame_orthonormal(const Frame& f, double tol = 1e-12);

// Pure geometry of the corner-anchored rotated lattice over a box:
// node z sits at anchor + r*rho*nu*z, its cell is the unit frame cube at z,
// and z is interior when the double cube z+[0,2]^d fits strictly inside the
// domain (exactly the condition for all Kuhn neighbors to carry values).
struct LatticeGeometry {
  Frame frame;
  Box domain;

  void to_frame(std::span<const double> x, std::span<double> w) const;
  void node_position(std::span<const int> z, std::span<double> x) const;
  bool cube_inside(std::span<const int> z, int extent) const;
  bool interior(std::span<const int> z) const { return cube_inside(z, 2); }
  bool point_in_interior_cell(std::span<const double> x) const;

  // Midpoint-rule cell average with m points per axis (exact for affine u).
  double node_value(const FieldFunction& u, std::span<const int> z, int m = 4) const;

  // Kuhn simplicial interpolation of cell averages at `x`; throws
  // outside_interior when the containing cell is not interior. The gradient is
  // constant on each simplex.
  double kuhn_value(const FieldFunction& u, std::span<const double> x, int m = 4) const;
  void kuhn_gradient(const FieldFunction& u, std::span<const double> x, std::span<double> g,
                     int m = 4) const;
};

// Materialized lattice field: cell averages on every in-domain node plus the
// interior index set. Used by the discretization operations and tests; the
// averaging machinery evaluates lazily through LatticeGeometry instead.
class LatticeField {
 public:
  LatticeField(LatticeGeometry geo, const FieldFunction& u, int m = 4);

  const LatticeGeometry& geometry() const { return geo_; }
  int dim() const { return geo_.frame.d; }
  std::int64_t n_nodes() const;
  std::int64_t n_interior() const { return n_interior_; }

  bool has_node(std::span<const int> z) const;
  bool is_interior(std::span<const int> z) const;
  double node(std::span<const int> z) const;

  double eval(std::span<const double> x) const;                       // kuhn interpolation
  void gradient(std::span<const double> x, std::span<double> g) const;

  // Exact integral of |grad interpolant|^2 over `region` (per-simplex constant
  // gradients; straddling cells resolved by stratified subsampling).
  double gradient_energy(const Box& region) const;

  std::string debug_json() const;  // frame matrix + node table

 private:
  friend LatticeField discretize(const FieldFunction&, const Box&, const Frame&, int);
  LatticeGeometry geo_;
  std::vector<int> zlo_, zn_;
  std::vector<double> values_;
  std::vector<std::uint8_t> flags_;  // bit0 has value, bit1 interior
  std::int64_t n_interior_ = 0;

  std::int64_t index_of(std::span<const int> z) const;
};

LatticeField discretize(const FieldFunction& u, const Box& domain, const Frame& frame, int m = 4);
double kuhn_eval(const LatticeField& lf, std::span<const double> x);
double discrete_gradient_energy(const LatticeField& lf, const Box& region);

// Largest axis-aligned box covered by interior cells of every sample
// (d=2 exact maximal rectangle on a coverage grid, then verified sample by
// sample; other d use conservative margins). Throws empty_interior.
Box common_interior_box(const std::vector<LatticeGeometry>& samples, const Box& domain,
                        std::optional<std::pair<double, double>> vertical_window = std::nullopt);

struct BoundCheck {
  EnergyEstimate lhs;
  EnergyEstimate rhs;
  Box inner_region;
  bool holds(double n_sigma = 3.0) const;
};

// Checks the lattice lower bound for the squared seminorm: lhs = seminorm^2
// over the film, rhs = r^{2(1-s)}/d * H^{d-1}(S^{d-1}) * E[gradient energy of
// the lattice interpolant over the common interior box], the expectation
// taken over Haar frames and rho with density (2-2s) rho^{1-2s}.
BoundCheck check_lattice_lower_bound(const FieldFunction& u, const ThinDomain& dom, double r,
                                     double s, int n_mu_samples, std::uint64_t seed,
                                     const SplitConfig& lhs_cfg = SplitConfig{0.25, 400000, 400000},
                                     std::int64_t energy_points = 40000);

struct SmoothedField {
  FieldFunction field;   // average of lattice interpolants over the mu samples
  Box region;            // common interior where the average is defined
  std::vector<LatticeGeometry> samples;
};

// Empirical mu-average of lattice interpolants at scale r = sigma*eps:
// rho drawn by inverse CDF rho = U^{1/(2-2s)} so the average is unweighted.
SmoothedField lattice_smoothed_field(const FieldFunction& u, const ThinDomain& dom, double s,
                                     double sigma, int n_mu_samples, std::uint64_t seed);

struct SmoothingCheck {
  double lhs = 0.0;              // c_d sigma^{2(1-s)} (1/eps) * gradient energy over inner region
  EnergyEstimate rhs;            // eps^{2s-3} * film energy
  Box inner_region;
  double volume_fraction = 0.0;  // |inner region| / |film|
  double ratio_normalized = 0.0; // (lhs/volume_fraction) / rhs.value
  bool holds(double n_sigma = 3.0) const;
};

// Checks the smoothing upper bound lhs <= rhs (Jensen direction) and reports
// the volume-normalized ratio used by the sweep diagnostics.
SmoothingCheck check_smoothing_bound(const FieldFunction& u, const ThinDomain& dom, double s,
                                     double sigma, const SplitConfig& cfg, std::uint64_t seed,
                                     int n_mu_samples = 16, int grid_n = 64);

}  // namespace thinfilm
