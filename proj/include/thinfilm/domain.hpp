#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>

#include "thinfilm/common.hpp"

namespace thinfilm {

// Film geometry: Omega_eps = omega x (0, eps), omega an axis-aligned box in
// R^{d-1}. The last coordinate is the thin one.
struct ThinDomain {
  int d = 2;
  Box omega;   // (d-1)-dimensional cross-section
  double eps = 0.0;

  Box film_box() const;   // omega x (0, eps)
  Box unit_box() const;   // omega x (0, 1)
  double volume() const { return omega.volume() * eps; }
};

ThinDomain make_thin_film(int d, std::vector<double> omega_lo, std::vector<double> omega_hi, double eps);

// Derivative magnitude bounds on a box, used by samplers and the dense
// quadrature to control the singular kernel. `estimated` marks sampled
// (non-analytic) bounds.
struct SmoothnessBounds {
  std::optional<double> lip;    // sup |grad u|
  std::optional<double> hess;   // sup |D^2 u| (operator norm bound)
  std::optional<double> third;  // sup |D^3 u|
  bool estimated = false;
};

class FieldImpl;

// Scalar function on a box domain. Value type; cheap to copy.
class FieldFunction {
 public:
  FieldFunction() = default;
  explicit FieldFunction(std::shared_ptr<const FieldImpl> impl) : impl_(std::move(impl)) {}

  int dim() const;
  double value(std::span<const double> x) const;
  bool has_gradient() const;
  void gradient(std::span<const double> x, std::span<double> out) const;
  bool horizontal_only() const;  // independent of x_d by construction
  SmoothnessBounds bounds(const Box& box) const;
  std::string describe() const;

  const FieldImpl* impl() const { return impl_.get(); }

 private:
  std::shared_ptr<const FieldImpl> impl_;
};

// Catalog of test functions with exact derivatives.
FieldFunction constant_field(double c, int d);
FieldFunction linear_horizontal(std::vector<double> coeffs, int d);  // sum a_i x_i, horizontal
FieldFunction quadratic_horizontal(int d);                           // x_1^2
FieldFunction sine_horizontal(double freq, int d);                   // sin(freq * x_1)
FieldFunction vertical_linear(double slope, int d);                  // slope * x_d

// Arithmetic over x1..xd with + - * / ^, sin, cos, exp. Gradient comes from
// forward-mode differentiation of the tree.
FieldFunction parse_expression(const std::string& text, int d);

// Catalog id ("const:<c>", "x1", "linear:<a,...>", "x1sq", "sin:<f>",
// "sin2pi", "vertical:<b>") or, failing those, an expression string.
FieldFunction make_field(const std::string& id, int d);

// w(x', t) = u(x', factor * t). rescale_to_unit(u, dom) maps a function on
// Omega_eps to its representative on omega x (0,1).
FieldFunction vertical_scale(const FieldFunction& u, double factor);
FieldFunction rescale_to_unit(const FieldFunction& u_eps, const ThinDomain& dom);

// Test helpers: lambda*u and u + c.
FieldFunction scale_field(const FieldFunction& u, double lambda);
FieldFunction offset_field(const FieldFunction& u, double c);

}  // namespace thinfilm
