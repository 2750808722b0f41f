#include "thinfilm/extension.hpp"

#include <cmath>

#include "field_impl.hpp"
#include "thinfilm/rng.hpp"

namespace thinfilm {

double fold_height(double t, double eps) {
  const double period = 2.0 * eps;
  double q = std::fmod(t, period);
  if (q < 0.0) q += period;
  return q <= eps ? q : period - q;
}

namespace {

class ReflectPeriodizeImpl final : public FieldImpl {
 public:
  ReflectPeriodizeImpl(FieldFunction base, double eps) : base_(std::move(base)), eps_(eps) {}

  int dim() const override { return base_.dim(); }
  double value(std::span<const double> x) const override {
    std::array<double, kMaxDim> y{};
    std::copy(x.begin(), x.end(), y.begin());
    y[x.size() - 1] = fold_height(y[x.size() - 1], eps_);
    return base_.value({y.data(), x.size()});
  }
  // The fold kinks the vertical derivative; only horizontal fields stay C^1.
  bool has_gradient() const override { return base_.horizontal_only() && base_.has_gradient(); }
  void gradient(std::span<const double> x, std::span<double> g) const override {
    if (!has_gradient()) throw Error(Errc::gradient_unavailable, "extension is not differentiable");
    std::array<double, kMaxDim> y{};
    std::copy(x.begin(), x.end(), y.begin());
    y[x.size() - 1] = fold_height(y[x.size() - 1], eps_);
    base_.gradient({y.data(), x.size()}, g);
    g[x.size() - 1] = 0.0;
  }
  bool horizontal_only() const override { return base_.horizontal_only(); }
  SmoothnessBounds bounds(const Box& box) const override {
    Box folded = box;
    const int v = dim() - 1;
    folded.lo[v] = 0.0;
    folded.hi[v] = eps_;
    SmoothnessBounds sb = base_.bounds(folded);
    if (!base_.horizontal_only()) {
      // Lipschitz survives the 1-Lipschitz fold; curvature bounds do not.
      sb.hess.reset();
      sb.third.reset();
    }
    return sb;
  }
  std::string describe() const override {
    return "reflect2eps(" + base_.describe() + "," + format_double(eps_) + ")";
  }

 private:
  FieldFunction base_;
  double eps_;
};

}  // namespace

FieldFunction reflect_periodize(const FieldFunction& u, const ThinDomain& dom) {
  return FieldFunction(std::make_shared<ReflectPeriodizeImpl>(u, dom.eps));
}

double reduction_distance(const FieldFunction& u_eps, const ThinDomain& dom,
                          const FieldFunction& u_limit, const Box& omega_inner, int grid_n) {
  if (!u_limit.horizontal_only())
    throw Error(Errc::not_horizontal, "the reduction limit must be horizontal");
  const int d = dom.d;
  if (omega_inner.dim() != d - 1)
    throw Error(Errc::invalid_config, "omega_inner must have dimension d-1");
  const FieldFunction ext = reflect_periodize(u_eps, dom);

  Box region = omega_inner;
  region.lo.push_back(0.0);
  region.hi.push_back(1.0);
  std::array<double, kMaxDim> h{};
  for (int a = 0; a < d; ++a) h[std::size_t(a)] = region.extent(a) / grid_n;
  std::int64_t cells = 1;
  for (int a = 0; a < d; ++a) cells *= grid_n;
  const double cell = region.volume() / double(cells);
  double total = 0.0;
  std::array<double, kMaxDim> x{};
  for (std::int64_t flat = 0; flat < cells; ++flat) {
    std::int64_t rem = flat;
    for (int a = 0; a < d; ++a) {
      x[std::size_t(a)] = region.lo[a] + (double(rem % grid_n) + 0.5) * h[std::size_t(a)];
      rem /= grid_n;
    }
    total += std::abs(ext.value({x.data(), std::size_t(d)}) - u_limit.value({x.data(), std::size_t(d)}));
  }
  return total * cell;
}

std::vector<std::pair<double, double>> thick_film_sequence(const FieldFunction& u, const Box& omega,
                                                           const ParamPath& path, double M,
                                                           const SplitConfig& cfg,
                                                           std::uint64_t seed) {
  if (!(M > 0.0)) throw Error(Errc::invalid_config, "M must be positive");
  const int d = u.dim();
  if (omega.dim() != d - 1) throw Error(Errc::invalid_config, "omega must have dimension d-1");
  for (const PathPoint& p : path.points) {
    if (p.eps * M < std::sqrt(1.0 - p.s) - 1e-12)
      throw Error(Errc::path_violates_thickness,
                  "path point (eps=" + format_double(p.eps) + ", s=" + format_double(p.s) +
                      ") violates eps >= sqrt(1-s)/M");
  }
  ThinDomain unit;
  unit.d = d;
  unit.omega = omega;
  unit.eps = 1.0;
  std::vector<std::pair<double, double>> out;
  out.reserve(path.points.size());
  for (std::size_t i = 0; i < path.points.size(); ++i) {
    const PathPoint& p = path.points[i];
    ThinDomain film;
    film.d = d;
    film.omega = omega;
    film.eps = p.eps;
    const FieldFunction ext = reflect_periodize(u, film);
    const EnergyEstimate est = gagliardo_sq(ext, unit, p.s, cfg, mix64(seed ^ (0xBEE5 + i)));
    out.emplace_back(p.eps, (1.0 - p.s) * est.value);
  }
  return out;
}

}  // namespace thinfilm
