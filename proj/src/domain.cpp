#include "thinfilm/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "field_impl.hpp"

namespace thinfilm {

Box ThinDomain::film_box() const {
  Box b = omega;
  b.lo.push_back(0.0);
  b.hi.push_back(eps);
  return b;
}

Box ThinDomain::unit_box() const {
  Box b = omega;
  b.lo.push_back(0.0);
  b.hi.push_back(1.0);
  return b;
}

ThinDomain make_thin_film(int d, std::vector<double> omega_lo, std::vector<double> omega_hi,
                          double eps) {
  if (d < 2 || d > kMaxDim)
    throw Error(Errc::invalid_dimension, "film dimension must be in [2, " + std::to_string(kMaxDim) + "]");
  if (omega_lo.size() != std::size_t(d - 1) || omega_hi.size() != std::size_t(d - 1))
    throw Error(Errc::empty_box, "omega extents must have dimension d-1");
  if (!(eps > 0.0)) throw Error(Errc::nonpositive_thickness, "film thickness must be positive");
  ThinDomain dom;
  dom.d = d;
  dom.omega = Box::make(std::move(omega_lo), std::move(omega_hi));
  dom.eps = eps;
  return dom;
}

int FieldFunction::dim() const { return impl_->dim(); }
double FieldFunction::value(std::span<const double> x) const { return impl_->value(x); }
bool FieldFunction::has_gradient() const { return impl_->has_gradient(); }
void FieldFunction::gradient(std::span<const double> x, std::span<double> out) const {
  impl_->gradient(x, out);
}
bool FieldFunction::horizontal_only() const { return impl_->horizontal_only(); }
SmoothnessBounds FieldFunction::bounds(const Box& box) const { return impl_->bounds(box); }
std::string FieldFunction::describe() const { return impl_->describe(); }

namespace {

double abs_sup(const Box& box, int axis) {
  return std::max(std::abs(box.lo[axis]), std::abs(box.hi[axis]));
}

class ConstantImpl final : public FieldImpl {
 public:
  ConstantImpl(double c, int d) : c_(c), d_(d) {}
  int dim() const override { return d_; }
  double value(std::span<const double>) const override { return c_; }
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double>, std::span<double> g) const override {
    std::fill(g.begin(), g.begin() + d_, 0.0);
  }
  bool horizontal_only() const override { return true; }
  SmoothnessBounds bounds(const Box&) const override { return {0.0, 0.0, 0.0, false}; }
  std::string describe() const override { return "const:" + format_double(c_); }

 private:
  double c_;
  int d_;
};

class LinearHorizontalImpl final : public FieldImpl {
 public:
  LinearHorizontalImpl(std::vector<double> a, int d) : a_(std::move(a)), d_(d) {}
  int dim() const override { return d_; }
  double value(std::span<const double> x) const override {
    double v = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i) v += a_[i] * x[i];
    return v;
  }
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double>, std::span<double> g) const override {
    std::fill(g.begin(), g.begin() + d_, 0.0);
    for (std::size_t i = 0; i < a_.size(); ++i) g[i] = a_[i];
  }
  bool horizontal_only() const override { return true; }
  SmoothnessBounds bounds(const Box&) const override {
    double n2 = 0.0;
    for (double a : a_) n2 += a * a;
    return {std::sqrt(n2), 0.0, 0.0, false};
  }
  std::string describe() const override { return "linear:" + join_doubles(a_); }

 private:
  std::vector<double> a_;  // size d-1
  int d_;
};

class QuadraticHorizontalImpl final : public FieldImpl {
 public:
  explicit QuadraticHorizontalImpl(int d) : d_(d) {}
  int dim() const override { return d_; }
  double value(std::span<const double> x) const override { return x[0] * x[0]; }
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double> x, std::span<double> g) const override {
    std::fill(g.begin(), g.begin() + d_, 0.0);
    g[0] = 2.0 * x[0];
  }
  bool horizontal_only() const override { return true; }
  SmoothnessBounds bounds(const Box& box) const override {
    return {2.0 * abs_sup(box, 0), 2.0, 0.0, false};
  }
  std::string describe() const override { return "x1sq"; }

 private:
  int d_;
};

class SineHorizontalImpl final : public FieldImpl {
 public:
  SineHorizontalImpl(double freq, int d) : f_(freq), d_(d) {}
  int dim() const override { return d_; }
  double value(std::span<const double> x) const override { return std::sin(f_ * x[0]); }
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double> x, std::span<double> g) const override {
    std::fill(g.begin(), g.begin() + d_, 0.0);
    g[0] = f_ * std::cos(f_ * x[0]);
  }
  bool horizontal_only() const override { return true; }
  SmoothnessBounds bounds(const Box&) const override {
    const double f = std::abs(f_);
    return {f, f * f, f * f * f, false};
  }
  std::string describe() const override { return "sin:" + format_double(f_); }

 private:
  double f_;
  int d_;
};

class VerticalLinearImpl final : public FieldImpl {
 public:
  VerticalLinearImpl(double b, int d) : b_(b), d_(d) {}
  int dim() const override { return d_; }
  double value(std::span<const double> x) const override { return b_ * x[d_ - 1]; }
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double>, std::span<double> g) const override {
    std::fill(g.begin(), g.begin() + d_, 0.0);
    g[d_ - 1] = b_;
  }
  bool horizontal_only() const override { return false; }
  SmoothnessBounds bounds(const Box&) const override { return {std::abs(b_), 0.0, 0.0, false}; }
  std::string describe() const override { return "vertical:" + format_double(b_); }

 private:
  double b_;
  int d_;
};

class VerticalScaleImpl final : public FieldImpl {
 public:
  VerticalScaleImpl(FieldFunction base, double factor) : base_(std::move(base)), f_(factor) {}
  int dim() const override { return base_.dim(); }
  double value(std::span<const double> x) const override {
    std::array<double, kMaxDim> y{};
    map(x, y);
    return base_.value({y.data(), x.size()});
  }
  bool has_gradient() const override { return base_.has_gradient(); }
  void gradient(std::span<const double> x, std::span<double> g) const override {
    std::array<double, kMaxDim> y{};
    map(x, y);
    base_.gradient({y.data(), x.size()}, g);
    g[dim() - 1] *= f_;
  }
  bool horizontal_only() const override { return base_.horizontal_only(); }
  SmoothnessBounds bounds(const Box& box) const override {
    Box mapped = box;
    const int v = dim() - 1;
    double a = box.lo[v] * f_, b = box.hi[v] * f_;
    mapped.lo[v] = std::min(a, b);
    mapped.hi[v] = std::max(a, b);
    if (!(mapped.lo[v] < mapped.hi[v])) mapped.hi[v] = mapped.lo[v] + 1e-300;
    SmoothnessBounds sb = base_.bounds(mapped);
    const double k = std::max(1.0, std::abs(f_));
    if (sb.lip) *sb.lip *= k;
    if (sb.hess) *sb.hess *= k * k;
    if (sb.third) *sb.third *= k * k * k;
    return sb;
  }
  std::string describe() const override {
    return "vscale(" + base_.describe() + "," + format_double(f_) + ")";
  }

 private:
  void map(std::span<const double> x, std::array<double, kMaxDim>& y) const {
    std::copy(x.begin(), x.end(), y.begin());
    y[x.size() - 1] *= f_;
  }
  FieldFunction base_;
  double f_;
};

class AffineOfFieldImpl final : public FieldImpl {
 public:
  // lambda * u + c
  AffineOfFieldImpl(FieldFunction base, double lambda, double c)
      : base_(std::move(base)), lambda_(lambda), c_(c) {}
  int dim() const override { return base_.dim(); }
  double value(std::span<const double> x) const override { return lambda_ * base_.value(x) + c_; }
  bool has_gradient() const override { return base_.has_gradient(); }
  void gradient(std::span<const double> x, std::span<double> g) const override {
    base_.gradient(x, g);
    for (int a = 0; a < dim(); ++a) g[a] *= lambda_;
  }
  bool horizontal_only() const override { return base_.horizontal_only(); }
  SmoothnessBounds bounds(const Box& box) const override {
    SmoothnessBounds sb = base_.bounds(box);
    const double k = std::abs(lambda_);
    if (sb.lip) *sb.lip *= k;
    if (sb.hess) *sb.hess *= k;
    if (sb.third) *sb.third *= k;
    return sb;
  }
  std::string describe() const override {
    return format_double(lambda_) + "*(" + base_.describe() + ")+" + format_double(c_);
  }

 private:
  FieldFunction base_;
  double lambda_, c_;
};

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char* end = nullptr;
    double v = std::strtod(text.c_str() + pos, &end);
    if (end == text.c_str() + pos)
      throw Error(Errc::invalid_config, "bad numeric list: '" + text + "'");
    out.push_back(v);
    pos = std::size_t(end - text.c_str());
    if (pos < text.size()) {
      if (text[pos] != ',') throw Error(Errc::invalid_config, "bad numeric list: '" + text + "'");
      ++pos;
    }
  }
  return out;
}

}  // namespace

FieldFunction constant_field(double c, int d) {
  return FieldFunction(std::make_shared<ConstantImpl>(c, d));
}

FieldFunction linear_horizontal(std::vector<double> coeffs, int d) {
  if (coeffs.size() != std::size_t(d - 1))
    throw Error(Errc::invalid_config, "linear field needs d-1 coefficients");
  return FieldFunction(std::make_shared<LinearHorizontalImpl>(std::move(coeffs), d));
}

FieldFunction quadratic_horizontal(int d) {
  return FieldFunction(std::make_shared<QuadraticHorizontalImpl>(d));
}

FieldFunction sine_horizontal(double freq, int d) {
  return FieldFunction(std::make_shared<SineHorizontalImpl>(freq, d));
}

FieldFunction vertical_linear(double slope, int d) {
  return FieldFunction(std::make_shared<VerticalLinearImpl>(slope, d));
}

FieldFunction make_field(const std::string& id, int d) {
  if (d < 2 || d > kMaxDim) throw Error(Errc::invalid_dimension, "dimension out of range");
  auto after = [&](const char* prefix) { return id.substr(std::strlen(prefix)); };
  if (id.rfind("const:", 0) == 0) return constant_field(std::stod(after("const:")), d);
  if (id == "x1") {
    std::vector<double> a(std::size_t(d - 1), 0.0);
    a[0] = 1.0;
    return linear_horizontal(std::move(a), d);
  }
  if (id.rfind("linear:", 0) == 0) return linear_horizontal(parse_number_list(after("linear:")), d);
  if (id == "x1sq") return quadratic_horizontal(d);
  if (id == "sin2pi") return sine_horizontal(2.0 * std::numbers::pi, d);
  if (id.rfind("sin:", 0) == 0) return sine_horizontal(std::stod(after("sin:")), d);
  if (id.rfind("vertical:", 0) == 0) return vertical_linear(std::stod(after("vertical:")), d);
  return parse_expression(id, d);
}

FieldFunction vertical_scale(const FieldFunction& u, double factor) {
  return FieldFunction(std::make_shared<VerticalScaleImpl>(u, factor));
}

FieldFunction rescale_to_unit(const FieldFunction& u_eps, const ThinDomain& dom) {
  return vertical_scale(u_eps, dom.eps);
}

FieldFunction scale_field(const FieldFunction& u, double lambda) {
  return FieldFunction(std::make_shared<AffineOfFieldImpl>(u, lambda, 0.0));
}

FieldFunction offset_field(const FieldFunction& u, double c) {
  return FieldFunction(std::make_shared<AffineOfFieldImpl>(u, 1.0, c));
}

}  // namespace thinfilm
