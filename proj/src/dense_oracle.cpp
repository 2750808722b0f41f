// Deterministic cell-pair quadrature for the squared Gagliardo seminorm.
//
// The domain is split into a uniform grid of cells. For a cell pair the
// difference xi = x - y ranges over a box around the center offset Delta with
// the triangular overlap weight O(xi) = prod_k (h_k - |xi_k - Delta_k|)_+.
// Pairs near the diagonal are integrated with a product rule: the smooth part
// |u(x)-u(y)|^2 is replaced by <grad u(M), xi>^2 at the pair midpoint M and
// the singular moments int O(xi) xi_a xi_b |xi|^{-d-2s} dxi are computed once
// per offset class in polar coordinates with an analytic radial integral
// (piecewise polynomial times t^{1-2s}). The rule is exact for affine u; for
// curved u the replacement error is bracketed via midpoint Taylor remainders
//   |u(x)-u(y) - <grad u(z), xi>| <= H3 |xi|^3 / 24,   z = x - xi/2,
// and z is uniform on a box centered at M, so the Hessian term averages out
// and only second-order moments of |z-M| enter. The bracket half-width is
// reported as std_error. Pairs beyond the near window use subsampled midpoint
// products; their kernel is smooth at that separation.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "thinfilm/rng.hpp"
#include "thinfilm/seminorm.hpp"

namespace thinfilm {
namespace detail {

namespace {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(std::size_t(n), 0.0);
  w.assign(std::size_t(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[std::size_t(i)] = t;
    w[std::size_t(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

struct RadialAccum {
  double p2 = 0.0, p4 = 0.0, p6 = 0.0;
};

// Integrates t^{p} * prod_k(A_k + B_k t) over the support intersected with
// t > 0, accumulating the three kernel powers at once.
void radial_integral(int d, double s, std::span<const double> h, std::span<const double> delta,
                     std::span<const double> theta, RadialAccum& out) {
  double t_lo = 0.0, t_hi = std::numeric_limits<double>::infinity();
  std::array<double, kMaxDim> kinks{};
  int n_kinks = 0;
  for (int k = 0; k < d; ++k) {
    if (std::abs(theta[k]) < 1e-14) {
      if (std::abs(delta[k]) >= h[k]) return;  // empty support along this ray
      continue;
    }
    double a = (delta[k] - h[k]) / theta[k];
    double b = (delta[k] + h[k]) / theta[k];
    if (a > b) std::swap(a, b);
    t_lo = std::max(t_lo, a);
    t_hi = std::min(t_hi, b);
    kinks[std::size_t(n_kinks++)] = delta[k] / theta[k];
  }
  if (!(t_hi > t_lo)) return;

  std::array<double, kMaxDim + 2> pts{};
  int np = 0;
  pts[std::size_t(np++)] = t_lo;
  for (int i = 0; i < n_kinks; ++i)
    if (kinks[std::size_t(i)] > t_lo && kinks[std::size_t(i)] < t_hi) pts[std::size_t(np++)] = kinks[std::size_t(i)];
  pts[std::size_t(np++)] = t_hi;
  std::sort(pts.begin(), pts.begin() + np);

  const double p_base = 1.0 - 2.0 * s;
  for (int seg = 0; seg + 1 < np; ++seg) {
    const double a = pts[std::size_t(seg)], b = pts[std::size_t(seg + 1)];
    if (!(b > a)) continue;
    const double tm = 0.5 * (a + b);
    // multiply the d linear factors
    std::array<double, kMaxDim + 1> c{};
    c[0] = 1.0;
    int deg = 0;
    for (int k = 0; k < d; ++k) {
      double A, B;
      if (std::abs(theta[k]) < 1e-14) {
        A = h[k] - std::abs(delta[k]);
        B = 0.0;
      } else {
        const double sgn = (tm * theta[k] - delta[k]) >= 0.0 ? 1.0 : -1.0;
        A = h[k] + sgn * delta[k];
        B = -sgn * theta[k];
      }
      for (int m = deg + 1; m >= 1; --m) c[std::size_t(m)] = c[std::size_t(m)] * A + c[std::size_t(m - 1)] * B;
      c[0] *= A;
      ++deg;
    }
    auto accum = [&](double p, double& dst) {
      for (int m = 0; m <= deg; ++m) {
        const double q = p + m + 1.0;
        dst += c[std::size_t(m)] * (std::pow(b, q) - std::pow(a, q)) / q;
      }
    };
    accum(p_base, out.p2);
    accum(p_base + 2.0, out.p4);
    accum(p_base + 4.0, out.p6);
  }
}

}  // namespace

ClassMoments compute_class_moments(std::span<const double> h, std::span<const double> delta,
                                   double s, int d, int angular_n) {
  ClassMoments cm;
  std::array<double, kMaxDim> theta{};
  auto add_direction = [&](double weight) {
    RadialAccum ra;
    radial_integral(d, s, h, delta, {theta.data(), std::size_t(d)}, ra);
    if (ra.p2 == 0.0 && ra.p4 == 0.0 && ra.p6 == 0.0) return;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        cm.m[std::size_t(a) * kMaxDim + std::size_t(b)] += weight * theta[std::size_t(a)] * theta[std::size_t(b)] * ra.p2;
    cm.s4 += weight * ra.p4;
    cm.s6 += weight * ra.p6;
  };

  if (d == 2) {
    const double w = 2.0 * std::numbers::pi / angular_n;
    for (int i = 0; i < angular_n; ++i) {
      const double ang = (i + 0.5) * 2.0 * std::numbers::pi / angular_n;
      theta[0] = std::cos(ang);
      theta[1] = std::sin(ang);
      add_direction(w);
    }
  } else if (d == 3) {
    const int nz = std::max(16, angular_n / 32);
    const int nphi = 2 * nz;
    std::vector<double> zx, zw;
    gauss_legendre(nz, zx, zw);
    for (int i = 0; i < nz; ++i) {
      const double z = zx[std::size_t(i)];
      const double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
      for (int j = 0; j < nphi; ++j) {
        const double phi = (j + 0.5) * 2.0 * std::numbers::pi / nphi;
        theta[0] = rxy * std::cos(phi);
        theta[1] = rxy * std::sin(phi);
        theta[2] = z;
        add_direction(zw[std::size_t(i)] * 2.0 * std::numbers::pi / nphi);
      }
    }
  } else {
    throw Error(Errc::invalid_dimension, "dense oracle supports d = 2 or 3");
  }
  for (int a = 0; a < d; ++a) cm.s2 += cm.m[std::size_t(a) * kMaxDim + std::size_t(a)];
  return cm;
}

}  // namespace detail

namespace {

struct OffsetTable {
  std::vector<int> K;             // per-axis max offset
  std::vector<detail::ClassMoments> moments;
  std::vector<std::uint8_t> present;

  std::size_t index(std::span<const int> delta) const {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < K.size(); ++a)
      idx = idx * std::size_t(2 * K[a] + 1) + std::size_t(delta[a] + K[a]);
    return idx;
  }
};

}  // namespace

EnergyEstimate dense_seminorm_sq(const FieldFunction& u, const ThinDomain& dom, double s,
                                 int grid_n, Exec exec) {
  if (!(s > 0.0 && s < 1.0)) throw Error(Errc::invalid_s, "s must lie in (0,1)");
  if (grid_n < 2) throw Error(Errc::invalid_config, "grid_n must be at least 2");
  const int d = dom.d;
  const Box box = dom.film_box();

  double cells_d = 1.0;
  for (int a = 0; a < d; ++a) cells_d *= grid_n;
  if (cells_d * cells_d > 1e8) throw Error(Errc::budget_exceeded, "cell pair budget of 1e8 exceeded");
  const std::int64_t n_cells = std::int64_t(cells_d);

  std::array<double, kMaxDim> h{};
  double diam2 = 0.0, cell_vol = 1.0;
  for (int a = 0; a < d; ++a) {
    h[a] = box.extent(a) / grid_n;
    diam2 += h[a] * h[a];
    cell_vol *= h[a];
  }
  const double near_radius = 4.5 * std::sqrt(diam2);

  const SmoothnessBounds sb = u.bounds(box);
  if (!sb.lip) throw Error(Errc::gradient_unavailable, "dense oracle needs a Lipschitz bound");
  const double L = *sb.lip;
  const bool moment_path = u.has_gradient() && sb.hess.has_value() && sb.third.has_value();

  // Moment tables for every offset class in the near window.
  OffsetTable table;
  table.K.resize(std::size_t(d));
  std::size_t table_size = 1;
  for (int a = 0; a < d; ++a) {
    table.K[std::size_t(a)] = std::min(grid_n - 1, int(std::ceil(near_radius / h[a])));
    table_size *= std::size_t(2 * table.K[std::size_t(a)] + 1);
  }
  table.moments.resize(table_size);
  table.present.assign(table_size, 0);
  {
    std::vector<std::array<int, kMaxDim>> todo;
    std::array<int, kMaxDim> delta{};
    // enumerate the offset rectangle
    std::int64_t combos = 1;
    for (int a = 0; a < d; ++a) combos *= (2 * table.K[std::size_t(a)] + 1);
    for (std::int64_t flat = 0; flat < combos; ++flat) {
      std::int64_t rem = flat;
      double norm2 = 0.0;
      for (int a = 0; a < d; ++a) {
        const int span = 2 * table.K[std::size_t(a)] + 1;
        delta[std::size_t(a)] = int(rem % span) - table.K[std::size_t(a)];
        rem /= span;
        const double da = delta[std::size_t(a)] * h[a];
        norm2 += da * da;
      }
      if (norm2 > near_radius * near_radius) continue;
      // canonical representative: first nonzero component positive
      bool canonical = true;
      for (int a = 0; a < d; ++a) {
        if (delta[std::size_t(a)] != 0) {
          canonical = delta[std::size_t(a)] > 0;
          break;
        }
      }
      if (!canonical) continue;
      todo.push_back(delta);
    }
    std::vector<detail::ClassMoments> results(todo.size());
    for_batches(std::int64_t(todo.size()), exec, [&](std::int64_t i) {
      std::array<double, kMaxDim> dphys{};
      for (int a = 0; a < d; ++a) dphys[std::size_t(a)] = todo[std::size_t(i)][std::size_t(a)] * h[a];
      results[std::size_t(i)] = detail::compute_class_moments({h.data(), std::size_t(d)},
                                                              {dphys.data(), std::size_t(d)}, s, d);
    });
    for (std::size_t i = 0; i < todo.size(); ++i) {
      std::array<int, kMaxDim> pos = todo[i], neg = todo[i];
      for (int a = 0; a < d; ++a) neg[std::size_t(a)] = -neg[std::size_t(a)];
      for (const auto& z : {pos, neg}) {
        const std::size_t idx = table.index({z.data(), std::size_t(d)});
        table.moments[idx] = results[i];
        table.present[idx] = 1;
      }
    }
  }

  // Bracket coefficients (see header comment).
  double qbar = 0.0, qmax = 0.0;
  for (int a = 0; a < d; ++a) {
    qbar += h[a] * h[a] / 12.0;
    qmax += 0.25 * h[a] * h[a];
  }
  const double H = sb.hess.value_or(0.0);
  const double H3 = sb.third.value_or(0.0);
  const double coef_s2 = L * H3 * qbar + 2.0 * H * H * qbar + 0.5 * H3 * H3 * qmax * qbar;
  const double coef_s4 = L * H3 / 12.0;
  const double coef_s6 = H3 * H3 / 576.0;

  // Precompute values on the 2x subgrid (far pairs) and gradients on the
  // half-step grid of pair midpoints (near pairs).
  std::vector<int> stride(std::size_t(d), 1);
  for (int a = d - 2; a >= 0; --a) stride[std::size_t(a)] = stride[std::size_t(a + 1)] * grid_n;
  const int sub_n = 2 * grid_n;
  std::int64_t sub_cells = 1;
  for (int a = 0; a < d; ++a) sub_cells *= sub_n;
  std::vector<double> sub_vals(static_cast<std::size_t>(sub_cells));
  {
    const std::int64_t inner = sub_cells / sub_n;
    for_batches(sub_n, exec, [&](std::int64_t i0) {
      std::array<double, kMaxDim> x{};
      x[0] = box.lo[0] + (double(i0) + 0.5) * 0.5 * h[0];
      for (std::int64_t f = 0; f < inner; ++f) {
        std::int64_t rem = f;
        for (int a = d - 1; a >= 1; --a) {
          x[std::size_t(a)] = box.lo[a] + (double(rem % sub_n) + 0.5) * 0.5 * h[a];
          rem /= sub_n;
        }
        sub_vals[std::size_t(i0 * inner + f)] = u.value({x.data(), std::size_t(d)});
      }
    });
  }
  const int half_n = 2 * grid_n - 1;
  std::int64_t half_cells = 1;
  for (int a = 0; a < d; ++a) half_cells *= half_n;
  std::vector<double> half_grad;
  if (moment_path) {
    half_grad.resize(std::size_t(half_cells) * std::size_t(d));
    const std::int64_t inner = half_cells / half_n;
    for_batches(half_n, exec, [&](std::int64_t i0) {
      std::array<double, kMaxDim> x{}, g{};
      x[0] = box.lo[0] + (double(i0) + 1.0) * 0.5 * h[0];
      for (std::int64_t f = 0; f < inner; ++f) {
        std::int64_t rem = f;
        for (int a = d - 1; a >= 1; --a) {
          x[std::size_t(a)] = box.lo[a] + (double(rem % half_n) + 1.0) * 0.5 * h[a];
          rem /= half_n;
        }
        u.gradient({x.data(), std::size_t(d)}, {g.data(), std::size_t(d)});
        for (int a = 0; a < d; ++a) half_grad[std::size_t((i0 * inner + f) * d + a)] = g[a];
      }
    });
  }

  const double kern_exp = -0.5 * (d + 2.0 * s);
  const double sub_vol = cell_vol / double(1 << d);
  const std::int64_t n_subs = std::int64_t(1) << d;

  struct CellAccum {
    double value = 0.0;
    double bracket = 0.0;
  };
  std::vector<CellAccum> per_cell(static_cast<std::size_t>(n_cells));

  for_batches(n_cells, exec, [&](std::int64_t ci) {
    std::array<int, kMaxDim> zi{}, zj{}, delta{};
    {
      std::int64_t rem = ci;
      for (int a = 0; a < d; ++a) {
        zi[std::size_t(a)] = int(rem / stride[std::size_t(a)]);
        rem %= stride[std::size_t(a)];
      }
    }
    CellAccum acc;

    auto near_pair = [&](std::span<const int> dz, std::span<const int> zother, double mult) {
      const std::size_t t_idx = table.index(dz);
      const detail::ClassMoments& cm = table.moments[t_idx];
      double tval = 0.0;
      if (moment_path) {
        // gradient at the pair midpoint, half-step grid index zi + zother
        std::int64_t gi = 0;
        for (int a = 0; a < d; ++a) gi = gi * half_n + (zi[std::size_t(a)] + zother[std::size_t(a)]);
        const double* g = &half_grad[std::size_t(gi) * std::size_t(d)];
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b)
            tval += g[a] * g[b] * cm.m[std::size_t(a) * kMaxDim + std::size_t(b)];
        acc.value += mult * tval;
        acc.bracket += mult * (coef_s2 * cm.s2 + coef_s4 * cm.s4 + coef_s6 * cm.s6);
      } else {
        // no curvature bounds: the whole pair mass is bracketed by L^2 * s2
        const double half = 0.5 * L * L * cm.s2;
        acc.value += mult * half;
        acc.bracket += mult * half;
      }
    };

    // diagonal
    const std::array<int, kMaxDim> zero{};
    near_pair({zero.data(), std::size_t(d)}, {zi.data(), std::size_t(d)}, 1.0);

    for (std::int64_t cj = ci + 1; cj < n_cells; ++cj) {
      std::int64_t rem = cj;
      bool near = true;
      double norm2 = 0.0;
      for (int a = 0; a < d; ++a) {
        zj[std::size_t(a)] = int(rem / stride[std::size_t(a)]);
        rem %= stride[std::size_t(a)];
        const int dz = zj[std::size_t(a)] - zi[std::size_t(a)];
        delta[std::size_t(a)] = dz;
        if (std::abs(dz) > table.K[std::size_t(a)]) near = false;
        const double dp = dz * h[a];
        norm2 += dp * dp;
      }
      if (near && norm2 <= near_radius * near_radius) {
        near_pair({delta.data(), std::size_t(d)}, {zj.data(), std::size_t(d)}, 2.0);
        continue;
      }
      // far: 2^d x 2^d subsampled midpoint product
      double sum = 0.0;
      for (std::int64_t sa = 0; sa < n_subs; ++sa) {
        std::int64_t ia = 0;
        std::array<double, kMaxDim> pa{};
        for (int a = 0; a < d; ++a) {
          const int bit = int((sa >> a) & 1);
          const int c = 2 * zi[std::size_t(a)] + bit;
          ia = ia * sub_n + c;
          pa[std::size_t(a)] = box.lo[a] + (c + 0.5) * 0.5 * h[a];
        }
        const double ua = sub_vals[std::size_t(ia)];
        for (std::int64_t sbi = 0; sbi < n_subs; ++sbi) {
          std::int64_t ib = 0;
          double dist2 = 0.0;
          for (int a = 0; a < d; ++a) {
            const int bit = int((sbi >> a) & 1);
            const int c = 2 * zj[std::size_t(a)] + bit;
            ib = ib * sub_n + c;
            const double diff = pa[std::size_t(a)] - (box.lo[a] + (c + 0.5) * 0.5 * h[a]);
            dist2 += diff * diff;
          }
          const double du = ua - sub_vals[std::size_t(ib)];
          sum += du * du * std::pow(dist2, kern_exp);
        }
      }
      acc.value += 2.0 * sum * sub_vol * sub_vol;
    }
    per_cell[std::size_t(ci)] = acc;
  });

  double value = 0.0, bracket = 0.0;
  for (const CellAccum& a : per_cell) {
    value += a.value;
    bracket += a.bracket;
  }

  EnergyEstimate est;
  est.value = value;
  est.std_error = bracket;
  est.n_samples = n_cells * n_cells;
  est.method = Method::dense_grid;
  return est;
}

}  // namespace thinfilm
