#include "thinfilm/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include <json.hpp>

#include "field_impl.hpp"
#include "thinfilm/rng.hpp"
#include "thinfilm/scaling.hpp"

namespace thinfilm {

namespace {

using Vec = std::array<double, kMaxDim>;
using IVec = std::array<int, kMaxDim>;

std::uint64_t substream(std::uint64_t seed, std::uint64_t tag) { return mix64(seed ^ mix64(tag)); }

}  // namespace

Frame random_frame(int d, std::uint64_t seed) {
  if (d < 2 || d > kMaxDim) throw Error(Errc::invalid_dimension, "frame dimension out of range");
  Frame f;
  f.d = d;
  f.nu.assign(std::size_t(d) * d, 0.0);
  const CounterRng rng = CounterRng::make(seed, 7);
  for (std::uint64_t salt = 0;; ++salt) {
    std::vector<double> g(std::size_t(d) * d);
    for (int i = 0; i < d * d; i += 2) {
      double a, b;
      rng.gaussian_pair(salt, std::uint32_t(i), a, b);
      g[std::size_t(i)] = a;
      if (i + 1 < d * d) g[std::size_t(i + 1)] = b;
    }
    // modified Gram-Schmidt, positive normalization (Haar-invariant convention)
    bool ok = true;
    for (int j = 0; j < d && ok; ++j) {
      double* col = &g[std::size_t(j) * d];
      for (int k = 0; k < j; ++k) {
        const double* prev = &f.nu[std::size_t(k) * d];
        double dot = 0.0;
        for (int a = 0; a < d; ++a) dot += col[a] * prev[a];
        for (int a = 0; a < d; ++a) col[a] -= dot * prev[a];
      }
      double n2 = 0.0;
      for (int a = 0; a < d; ++a) n2 += col[a] * col[a];
      if (n2 < 1e-24) {
        ok = false;
        break;
      }
      const double inv = 1.0 / std::sqrt(n2);
      for (int a = 0; a < d; ++a) f.nu[std::size_t(j) * d + a] = col[a] * inv;
    }
    if (ok) return f;
  }
}

double frame_det(const Frame& f) {
  const int d = f.d;
  std::vector<double> m = f.nu;
  double det = 1.0;
  for (int c = 0; c < d; ++c) {
    int piv = c;
    for (int r = c + 1; r < d; ++r)
      if (std::abs(m[std::size_t(c) * d + r]) > std::abs(m[std::size_t(c) * d + piv])) piv = r;
    if (piv != c) {
      for (int j = 0; j < d; ++j) std::swap(m[std::size_t(j) * d + c], m[std::size_t(j) * d + piv]);
      det = -det;
    }
    const double p = m[std::size_t(c) * d + c];
    if (p == 0.0) return 0.0;
    det *= p;
    for (int r = c + 1; r < d; ++r) {
      const double fac = m[std::size_t(c) * d + r] / p;
      for (int j = c; j < d; ++j) m[std::size_t(j) * d + r] -= fac * m[std::size_t(j) * d + c];
    }
  }
  return det;
}

bool frame_orthonormal(const Frame& f, double tol) {
  const int d = f.d;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      double dot = 0.0;
      for (int a = 0; a < d; ++a) dot += f.col(i, a) * f.col(j, a);
      const double want = i == j ? 1.0 : 0.0;
      if (std::abs(dot - want) > tol) return false;
    }
  return true;
}

void LatticeGeometry::to_frame(std::span<const double> x, std::span<double> w) const {
  const int d = frame.d;
  const double inv = 1.0 / frame.spacing();
  for (int j = 0; j < d; ++j) {
    double dot = 0.0;
    for (int a = 0; a < d; ++a) dot += frame.col(j, a) * (x[a] - domain.lo[a]);
    w[j] = dot * inv;
  }
}

void LatticeGeometry::node_position(std::span<const int> z, std::span<double> x) const {
  const int d = frame.d;
  const double sp = frame.spacing();
  for (int a = 0; a < d; ++a) {
    double v = domain.lo[a];
    for (int j = 0; j < d; ++j) v += sp * frame.col(j, a) * z[j];
    x[a] = v;
  }
}

bool LatticeGeometry::cube_inside(std::span<const int> z, int extent) const {
  const int d = frame.d;
  const double sp = frame.spacing();
  Vec base{};
  node_position(z, {base.data(), std::size_t(d)});
  // the cube spans sp * nu * [0, extent]^d from the node
  for (int corner = 0; corner < (1 << d); ++corner) {
    Vec x = base;
    for (int j = 0; j < d; ++j)
      if (corner & (1 << j))
        for (int a = 0; a < d; ++a) x[std::size_t(a)] += sp * extent * frame.col(j, a);
    for (int a = 0; a < d; ++a)
      if (!(x[std::size_t(a)] > domain.lo[a] && x[std::size_t(a)] < domain.hi[a])) return false;
  }
  return true;
}

namespace {

// Below this spacing the interpolant is u to within O(spacing); evaluating the
// lattice directly would both overflow cell indices and hit fp cancellation in
// the finite differences, so the continuum limit is substituted instead.
bool continuum_limit(const LatticeGeometry& geo) {
  double min_extent = geo.domain.extent(0);
  for (int a = 1; a < geo.frame.d; ++a) min_extent = std::min(min_extent, geo.domain.extent(a));
  return geo.frame.spacing() < 1e-5 * min_extent;
}

// Reach of the double cube around a point of its cell, per axis: the cube
// spans spacing * nu * [-1, 2]^d relative to the point.
double interior_reach(const LatticeGeometry& geo, int axis) {
  double sum = 0.0;
  for (int j = 0; j < geo.frame.d; ++j) sum += std::abs(geo.frame.col(j, axis));
  return 2.000001 * geo.frame.spacing() * sum;
}

bool inside_with_reach(const LatticeGeometry& geo, std::span<const double> x) {
  for (int a = 0; a < geo.frame.d; ++a) {
    const double reach = interior_reach(geo, a);
    if (!(x[a] > geo.domain.lo[a] + reach && x[a] < geo.domain.hi[a] - reach)) return false;
  }
  return true;
}

}  // namespace

bool LatticeGeometry::point_in_interior_cell(std::span<const double> x) const {
  const int d = frame.d;
  if (continuum_limit(*this)) return inside_with_reach(*this, x);
  Vec w{};
  IVec z{};
  to_frame(x, {w.data(), std::size_t(d)});
  for (int a = 0; a < d; ++a) z[std::size_t(a)] = int(std::floor(w[std::size_t(a)]));
  return interior({z.data(), std::size_t(d)});
}

double LatticeGeometry::node_value(const FieldFunction& u, std::span<const int> z, int m) const {
  const int d = frame.d;
  const double sp = frame.spacing();
  Vec base{};
  node_position(z, {base.data(), std::size_t(d)});
  std::int64_t count = 1;
  for (int a = 0; a < d; ++a) count *= m;
  double sum = 0.0;
  for (std::int64_t flat = 0; flat < count; ++flat) {
    Vec x = base;
    std::int64_t rem = flat;
    for (int j = 0; j < d; ++j) {
      const double tj = (double(rem % m) + 0.5) / m;
      rem /= m;
      for (int a = 0; a < d; ++a) x[std::size_t(a)] += sp * tj * frame.col(j, a);
    }
    sum += u.value({x.data(), std::size_t(d)});
  }
  return sum / double(count);
}

namespace {

struct KuhnLocation {
  IVec z{};
  Vec frac{};
  std::array<int, kMaxDim> order{};  // axes sorted by descending frac
};

KuhnLocation locate(const LatticeGeometry& geo, std::span<const double> x) {
  const int d = geo.frame.d;
  KuhnLocation loc;
  Vec w{};
  geo.to_frame(x, {w.data(), std::size_t(d)});
  for (int a = 0; a < d; ++a) {
    loc.z[std::size_t(a)] = int(std::floor(w[std::size_t(a)]));
    loc.frac[std::size_t(a)] = w[std::size_t(a)] - loc.z[std::size_t(a)];
    loc.order[std::size_t(a)] = a;
  }
  std::stable_sort(loc.order.begin(), loc.order.begin() + d, [&](int a, int b) {
    return loc.frac[std::size_t(a)] > loc.frac[std::size_t(b)];
  });
  return loc;
}

// Simplex chain values V(v_0..v_d) through a node-value callback.
template <class NodeFn>
void chain_values(const KuhnLocation& loc, int d, NodeFn&& node, std::span<double> vals) {
  IVec v = loc.z;
  vals[0] = node({v.data(), std::size_t(d)});
  for (int k = 0; k < d; ++k) {
    v[std::size_t(loc.order[std::size_t(k)])] += 1;
    vals[std::size_t(k + 1)] = node({v.data(), std::size_t(d)});
  }
}

}  // namespace

double LatticeGeometry::kuhn_value(const FieldFunction& u, std::span<const double> x, int m) const {
  const int d = frame.d;
  if (continuum_limit(*this)) {
    if (!inside_with_reach(*this, x))
      throw Error(Errc::outside_interior, "point is not in an interior cell");
    return u.value(x);
  }
  const KuhnLocation loc = locate(*this, x);
  if (!interior({loc.z.data(), std::size_t(d)}))
    throw Error(Errc::outside_interior, "point is not in an interior cell");
  std::array<double, kMaxDim + 1> vals{};
  chain_values(loc, d, [&](std::span<const int> z) { return node_value(u, z, m); },
               {vals.data(), std::size_t(d + 1)});
  double out = vals[0] * (1.0 - loc.frac[std::size_t(loc.order[0])]);
  for (int k = 1; k < d; ++k)
    out += vals[std::size_t(k)] *
           (loc.frac[std::size_t(loc.order[std::size_t(k - 1)])] - loc.frac[std::size_t(loc.order[std::size_t(k)])]);
  out += vals[std::size_t(d)] * loc.frac[std::size_t(loc.order[std::size_t(d - 1)])];
  return out;
}

void LatticeGeometry::kuhn_gradient(const FieldFunction& u, std::span<const double> x,
                                    std::span<double> g, int m) const {
  const int d = frame.d;
  if (continuum_limit(*this)) {
    if (!inside_with_reach(*this, x))
      throw Error(Errc::outside_interior, "point is not in an interior cell");
    u.gradient(x, g);
    return;
  }
  const KuhnLocation loc = locate(*this, x);
  if (!interior({loc.z.data(), std::size_t(d)}))
    throw Error(Errc::outside_interior, "point is not in an interior cell");
  std::array<double, kMaxDim + 1> vals{};
  chain_values(loc, d, [&](std::span<const int> z) { return node_value(u, z, m); },
               {vals.data(), std::size_t(d + 1)});
  Vec gw{};
  for (int k = 0; k < d; ++k)
    gw[std::size_t(loc.order[std::size_t(k)])] = vals[std::size_t(k + 1)] - vals[std::size_t(k)];
  const double inv = 1.0 / frame.spacing();
  for (int a = 0; a < d; ++a) {
    double dot = 0.0;
    for (int j = 0; j < d; ++j) dot += frame.col(j, a) * gw[std::size_t(j)];
    g[a] = dot * inv;
  }
}

LatticeField::LatticeField(LatticeGeometry geo, const FieldFunction& u, int m) : geo_(std::move(geo)) {
  const int d = geo_.frame.d;
  if (continuum_limit(geo_))
    throw Error(Errc::budget_exceeded, "lattice too fine to materialize; grow r*rho");
  // z-range from the frame coordinates of the domain corners
  Vec wmin{}, wmax{};
  bool first = true;
  for (int corner = 0; corner < (1 << d); ++corner) {
    Vec x{};
    for (int a = 0; a < d; ++a)
      x[std::size_t(a)] = (corner & (1 << a)) ? geo_.domain.hi[a] : geo_.domain.lo[a];
    Vec w{};
    geo_.to_frame({x.data(), std::size_t(d)}, {w.data(), std::size_t(d)});
    for (int a = 0; a < d; ++a) {
      if (first || w[std::size_t(a)] < wmin[std::size_t(a)]) wmin[std::size_t(a)] = w[std::size_t(a)];
      if (first || w[std::size_t(a)] > wmax[std::size_t(a)]) wmax[std::size_t(a)] = w[std::size_t(a)];
    }
    first = false;
  }
  zlo_.resize(std::size_t(d));
  zn_.resize(std::size_t(d));
  std::int64_t total = 1;
  for (int a = 0; a < d; ++a) {
    zlo_[std::size_t(a)] = int(std::floor(wmin[std::size_t(a)])) - 1;
    const int zhi = int(std::floor(wmax[std::size_t(a)])) + 1;
    zn_[std::size_t(a)] = zhi - zlo_[std::size_t(a)] + 1;
    total *= zn_[std::size_t(a)];
  }
  if (total > 20'000'000)
    throw Error(Errc::budget_exceeded, "lattice too fine to materialize; reduce the domain or grow r*rho");
  values_.assign(std::size_t(total), 0.0);
  flags_.assign(std::size_t(total), 0);

  IVec z{};
  for (std::int64_t flat = 0; flat < total; ++flat) {
    std::int64_t rem = flat;
    for (int a = d - 1; a >= 0; --a) {
      z[std::size_t(a)] = zlo_[std::size_t(a)] + int(rem % zn_[std::size_t(a)]);
      rem /= zn_[std::size_t(a)];
    }
    if (!geo_.cube_inside({z.data(), std::size_t(d)}, 1)) continue;
    values_[std::size_t(flat)] = geo_.node_value(u, {z.data(), std::size_t(d)}, m);
    std::uint8_t fl = 1;
    if (geo_.interior({z.data(), std::size_t(d)})) {
      fl |= 2;
      ++n_interior_;
    }
    flags_[std::size_t(flat)] = fl;
  }
  if (n_interior_ == 0) throw Error(Errc::empty_interior, "no interior lattice cell fits the domain");
}

std::int64_t LatticeField::n_nodes() const {
  std::int64_t n = 0;
  for (auto f : flags_) n += (f & 1) ? 1 : 0;
  return n;
}

std::int64_t LatticeField::index_of(std::span<const int> z) const {
  const int d = geo_.frame.d;
  std::int64_t idx = 0;
  for (int a = 0; a < d; ++a) {
    const int rel = z[a] - zlo_[std::size_t(a)];
    if (rel < 0 || rel >= zn_[std::size_t(a)]) return -1;
    idx = idx * zn_[std::size_t(a)] + rel;
  }
  return idx;
}

bool LatticeField::has_node(std::span<const int> z) const {
  const std::int64_t i = index_of(z);
  return i >= 0 && (flags_[std::size_t(i)] & 1);
}

bool LatticeField::is_interior(std::span<const int> z) const {
  const std::int64_t i = index_of(z);
  return i >= 0 && (flags_[std::size_t(i)] & 2);
}

double LatticeField::node(std::span<const int> z) const {
  const std::int64_t i = index_of(z);
  if (i < 0 || !(flags_[std::size_t(i)] & 1))
    throw Error(Errc::outside_interior, "no value at this lattice index");
  return values_[std::size_t(i)];
}

double LatticeField::eval(std::span<const double> x) const {
  const int d = geo_.frame.d;
  const KuhnLocation loc = locate(geo_, x);
  if (!is_interior({loc.z.data(), std::size_t(d)}))
    throw Error(Errc::outside_interior, "point is not in an interior cell");
  std::array<double, kMaxDim + 1> vals{};
  chain_values(loc, d, [&](std::span<const int> z) { return node(z); },
               {vals.data(), std::size_t(d + 1)});
  double out = vals[0] * (1.0 - loc.frac[std::size_t(loc.order[0])]);
  for (int k = 1; k < d; ++k)
    out += vals[std::size_t(k)] *
           (loc.frac[std::size_t(loc.order[std::size_t(k - 1)])] - loc.frac[std::size_t(loc.order[std::size_t(k)])]);
  out += vals[std::size_t(d)] * loc.frac[std::size_t(loc.order[std::size_t(d - 1)])];
  return out;
}

void LatticeField::gradient(std::span<const double> x, std::span<double> g) const {
  const int d = geo_.frame.d;
  const KuhnLocation loc = locate(geo_, x);
  if (!is_interior({loc.z.data(), std::size_t(d)}))
    throw Error(Errc::outside_interior, "point is not in an interior cell");
  std::array<double, kMaxDim + 1> vals{};
  chain_values(loc, d, [&](std::span<const int> z) { return node(z); },
               {vals.data(), std::size_t(d + 1)});
  Vec gw{};
  for (int k = 0; k < d; ++k)
    gw[std::size_t(loc.order[std::size_t(k)])] = vals[std::size_t(k + 1)] - vals[std::size_t(k)];
  const double inv = 1.0 / geo_.frame.spacing();
  for (int a = 0; a < d; ++a) {
    double dot = 0.0;
    for (int j = 0; j < d; ++j) dot += geo_.frame.col(j, a) * gw[std::size_t(j)];
    g[a] = dot * inv;
  }
}

namespace {

// Area of a convex polygon clipped to an axis-aligned box (Sutherland-Hodgman).
double clipped_polygon_area(std::vector<std::array<double, 2>> poly, const Box& box) {
  for (int side = 0; side < 4; ++side) {
    const int axis = side / 2;
    const bool keep_below = side % 2 == 0;
    const double bound = keep_below ? box.hi[axis] : box.lo[axis];
    std::vector<std::array<double, 2>> out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = poly[i];
      const auto& b = poly[(i + 1) % n];
      const bool ina = keep_below ? a[std::size_t(axis)] <= bound : a[std::size_t(axis)] >= bound;
      const bool inb = keep_below ? b[std::size_t(axis)] <= bound : b[std::size_t(axis)] >= bound;
      if (ina) out.push_back(a);
      if (ina != inb) {
        const double t = (bound - a[std::size_t(axis)]) / (b[std::size_t(axis)] - a[std::size_t(axis)]);
        out.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
      }
    }
    poly = std::move(out);
    if (poly.empty()) return 0.0;
  }
  double area2 = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % poly.size()];
    area2 += a[0] * b[1] - b[0] * a[1];
  }
  return 0.5 * std::abs(area2);
}

}  // namespace

double LatticeField::gradient_energy(const Box& region) const {
  const int d = geo_.frame.d;
  if (region.dim() != d) throw Error(Errc::invalid_config, "region dimension mismatch");
  const double sp = geo_.frame.spacing();
  const double cell_vol = std::pow(sp, d);
  double fact = 1.0;
  for (int k = 2; k <= d; ++k) fact *= k;

  // permutations of the axes, fixed enumeration order
  std::vector<std::array<int, kMaxDim>> perms;
  {
    std::array<int, kMaxDim> p{};
    std::iota(p.begin(), p.begin() + d, 0);
    do {
      perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.begin() + d));
  }

  const int m = 16;  // stratified subsamples per axis for straddling cells (d >= 3)
  std::int64_t msub = 1;
  for (int a = 0; a < d; ++a) msub *= m;

  double total = 0.0;
  IVec z{};
  std::int64_t flats = 1;
  for (int a = 0; a < d; ++a) flats *= zn_[std::size_t(a)];
  for (std::int64_t flat = 0; flat < flats; ++flat) {
    std::int64_t rem = flat;
    for (int a = d - 1; a >= 0; --a) {
      z[std::size_t(a)] = zlo_[std::size_t(a)] + int(rem % zn_[std::size_t(a)]);
      rem /= zn_[std::size_t(a)];
    }
    // cell AABB from its corners
    Vec base{};
    geo_.node_position({z.data(), std::size_t(d)}, {base.data(), std::size_t(d)});
    Vec cmin = base, cmax = base;
    for (int corner = 1; corner < (1 << d); ++corner) {
      Vec x = base;
      for (int j = 0; j < d; ++j)
        if (corner & (1 << j))
          for (int a = 0; a < d; ++a) x[std::size_t(a)] += sp * geo_.frame.col(j, a);
      for (int a = 0; a < d; ++a) {
        cmin[std::size_t(a)] = std::min(cmin[std::size_t(a)], x[std::size_t(a)]);
        cmax[std::size_t(a)] = std::max(cmax[std::size_t(a)], x[std::size_t(a)]);
      }
    }
    bool disjoint = false, contained = true;
    for (int a = 0; a < d; ++a) {
      if (cmax[std::size_t(a)] <= region.lo[a] || cmin[std::size_t(a)] >= region.hi[a]) disjoint = true;
      if (cmin[std::size_t(a)] < region.lo[a] || cmax[std::size_t(a)] > region.hi[a]) contained = false;
    }
    if (disjoint) continue;
    if (!(flags_[std::size_t(index_of({z.data(), std::size_t(d)}))] & 2))
      throw Error(Errc::region_not_interior, "region touches a non-interior cell");

    // per-simplex squared gradients
    std::vector<double> g2(perms.size());
    for (std::size_t pi = 0; pi < perms.size(); ++pi) {
      IVec v = z;
      double prev = node({v.data(), std::size_t(d)});
      double acc = 0.0;
      for (int k = 0; k < d; ++k) {
        v[std::size_t(perms[pi][std::size_t(k)])] += 1;
        const double cur = node({v.data(), std::size_t(d)});
        const double diff = cur - prev;
        acc += diff * diff;
        prev = cur;
      }
      g2[pi] = acc / (sp * sp);
    }

    if (contained) {
      const double vol = cell_vol / fact;
      for (double v : g2) total += v * vol;
      continue;
    }
    if (d == 2) {
      // exact clipped areas keep affine fields exact on any region
      for (std::size_t pi = 0; pi < perms.size(); ++pi) {
        std::vector<std::array<double, 2>> tri;
        IVec v = z;
        Vec p{};
        geo_.node_position({v.data(), 2}, {p.data(), 2});
        tri.push_back({p[0], p[1]});
        for (int k = 0; k < 2; ++k) {
          v[std::size_t(perms[pi][std::size_t(k)])] += 1;
          geo_.node_position({v.data(), 2}, {p.data(), 2});
          tri.push_back({p[0], p[1]});
        }
        total += g2[pi] * clipped_polygon_area(std::move(tri), region);
      }
      continue;
    }
    // d >= 3: stratified counting per simplex
    std::vector<std::int64_t> counts(perms.size(), 0);
    for (std::int64_t sub = 0; sub < msub; ++sub) {
      Vec t{};
      std::int64_t r2 = sub;
      for (int a = 0; a < d; ++a) {
        t[std::size_t(a)] = (double(r2 % m) + 0.5) / m;
        r2 /= m;
      }
      Vec x = base;
      for (int j = 0; j < d; ++j)
        for (int a = 0; a < d; ++a) x[std::size_t(a)] += sp * t[std::size_t(j)] * geo_.frame.col(j, a);
      bool in = true;
      for (int a = 0; a < d; ++a)
        if (!(x[std::size_t(a)] > region.lo[a] && x[std::size_t(a)] < region.hi[a])) in = false;
      if (!in) continue;
      // simplex of t: axes sorted by descending coordinate
      std::array<int, kMaxDim> ord{};
      std::iota(ord.begin(), ord.begin() + d, 0);
      std::stable_sort(ord.begin(), ord.begin() + d,
                       [&](int a, int b) { return t[std::size_t(a)] > t[std::size_t(b)]; });
      for (std::size_t pi = 0; pi < perms.size(); ++pi) {
        if (std::equal(perms[pi].begin(), perms[pi].begin() + d, ord.begin())) {
          ++counts[pi];
          break;
        }
      }
    }
    for (std::size_t pi = 0; pi < perms.size(); ++pi)
      total += g2[pi] * cell_vol * double(counts[pi]) / double(msub);
  }
  return total;
}

std::string LatticeField::debug_json() const {
  nlohmann::ordered_json j;
  const int d = geo_.frame.d;
  j["d"] = d;
  j["r"] = geo_.frame.r;
  j["rho"] = geo_.frame.rho;
  nlohmann::ordered_json cols = nlohmann::ordered_json::array();
  for (int c = 0; c < d; ++c) {
    nlohmann::ordered_json col = nlohmann::ordered_json::array();
    for (int a = 0; a < d; ++a) col.push_back(geo_.frame.col(c, a));
    cols.push_back(col);
  }
  j["frame"] = cols;
  j["anchor"] = geo_.domain.lo;
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  IVec z{};
  std::int64_t flats = 1;
  for (int a = 0; a < d; ++a) flats *= zn_[std::size_t(a)];
  for (std::int64_t flat = 0; flat < flats; ++flat) {
    if (!(flags_[std::size_t(flat)] & 1)) continue;
    std::int64_t rem = flat;
    for (int a = d - 1; a >= 0; --a) {
      z[std::size_t(a)] = zlo_[std::size_t(a)] + int(rem % zn_[std::size_t(a)]);
      rem /= zn_[std::size_t(a)];
    }
    nlohmann::ordered_json node;
    node["z"] = std::vector<int>(z.begin(), z.begin() + d);
    node["value"] = values_[std::size_t(flat)];
    node["interior"] = bool(flags_[std::size_t(flat)] & 2);
    nodes.push_back(node);
  }
  j["nodes"] = nodes;
  return j.dump();
}

LatticeField discretize(const FieldFunction& u, const Box& domain, const Frame& frame, int m) {
  if (!(frame.rho > 0.0 && frame.rho <= 1.0)) throw Error(Errc::invalid_config, "rho must lie in (0,1]");
  if (!(frame.r > 0.0)) throw Error(Errc::invalid_config, "r must be positive");
  LatticeGeometry geo{frame, domain};
  return LatticeField(std::move(geo), u, m);
}

double kuhn_eval(const LatticeField& lf, std::span<const double> x) { return lf.eval(x); }

double discrete_gradient_energy(const LatticeField& lf, const Box& region) {
  return lf.gradient_energy(region);
}

namespace {

bool lattice_enumerable(const LatticeGeometry& geo) {
  double cells = 1.0;
  for (int a = 0; a < geo.frame.d; ++a) cells *= geo.domain.extent(a) / geo.frame.spacing();
  return cells <= 30000.0;
}

// Exact coverage check for one enumerable sample: every cell whose AABB meets
// the box must be interior. Returns the AABB of a violating cell if any.
std::optional<Box> find_uncovered_cell(const LatticeGeometry& geo, const Box& box) {
  const int d = geo.frame.d;
  const double sp = geo.frame.spacing();
  Vec wmin{}, wmax{};
  bool first = true;
  for (int corner = 0; corner < (1 << d); ++corner) {
    Vec x{};
    for (int a = 0; a < d; ++a) x[std::size_t(a)] = (corner & (1 << a)) ? box.hi[a] : box.lo[a];
    Vec w{};
    geo.to_frame({x.data(), std::size_t(d)}, {w.data(), std::size_t(d)});
    for (int a = 0; a < d; ++a) {
      if (first || w[std::size_t(a)] < wmin[std::size_t(a)]) wmin[std::size_t(a)] = w[std::size_t(a)];
      if (first || w[std::size_t(a)] > wmax[std::size_t(a)]) wmax[std::size_t(a)] = w[std::size_t(a)];
    }
    first = false;
  }
  IVec z{};
  std::array<int, kMaxDim> lo{}, n{};
  std::int64_t flats = 1;
  for (int a = 0; a < d; ++a) {
    lo[std::size_t(a)] = int(std::floor(wmin[std::size_t(a)])) - 1;
    n[std::size_t(a)] = int(std::floor(wmax[std::size_t(a)])) + 1 - lo[std::size_t(a)] + 1;
    flats *= n[std::size_t(a)];
  }
  for (std::int64_t flat = 0; flat < flats; ++flat) {
    std::int64_t rem = flat;
    for (int a = d - 1; a >= 0; --a) {
      z[std::size_t(a)] = lo[std::size_t(a)] + int(rem % n[std::size_t(a)]);
      rem /= n[std::size_t(a)];
    }
    Vec base{};
    geo.node_position({z.data(), std::size_t(d)}, {base.data(), std::size_t(d)});
    Vec cmin = base, cmax = base;
    for (int corner = 1; corner < (1 << d); ++corner) {
      Vec x = base;
      for (int j = 0; j < d; ++j)
        if (corner & (1 << j))
          for (int a = 0; a < d; ++a) x[std::size_t(a)] += sp * geo.frame.col(j, a);
      for (int a = 0; a < d; ++a) {
        cmin[std::size_t(a)] = std::min(cmin[std::size_t(a)], x[std::size_t(a)]);
        cmax[std::size_t(a)] = std::max(cmax[std::size_t(a)], x[std::size_t(a)]);
      }
    }
    bool overlaps = true;
    for (int a = 0; a < d; ++a)
      if (cmax[std::size_t(a)] <= box.lo[a] || cmin[std::size_t(a)] >= box.hi[a]) overlaps = false;
    if (overlaps && !geo.interior({z.data(), std::size_t(d)})) {
      Box bad;
      bad.lo.assign(cmin.begin(), cmin.begin() + d);
      bad.hi.assign(cmax.begin(), cmax.begin() + d);
      return bad;
    }
  }
  return std::nullopt;
}

}  // namespace

Box common_interior_box(const std::vector<LatticeGeometry>& samples, const Box& domain,
                        std::optional<std::pair<double, double>> vertical_window) {
  if (samples.empty()) throw Error(Errc::empty_interior, "no lattice samples");
  const int d = domain.dim();
  const int v = d - 1;
  double vlo = domain.lo[v], vhi = domain.hi[v];
  if (vertical_window) {
    vlo = std::max(vlo, vertical_window->first);
    vhi = std::min(vhi, vertical_window->second);
    if (!(vlo < vhi)) throw Error(Errc::empty_interior, "vertical window is empty");
  }

  if (d == 2) {
    // Fine lattices cannot be enumerated cell by cell; their coverage is a
    // plain margin, folded into the search region up front.
    double alo0 = domain.lo[0], ahi0 = domain.hi[0], alo1 = vlo, ahi1 = vhi;
    std::vector<const LatticeGeometry*> enumerable;
    for (const LatticeGeometry& geo : samples) {
      if (lattice_enumerable(geo)) {
        enumerable.push_back(&geo);
        continue;
      }
      const double sp = geo.frame.spacing();
      for (int a = 0; a < 2; ++a) {
        double reach = 0.0;
        for (int j = 0; j < 2; ++j) reach += std::abs(geo.frame.col(j, a));
        reach *= 2.000001 * sp;
        if (a == 0) {
          alo0 = std::max(alo0, domain.lo[0] + reach);
          ahi0 = std::min(ahi0, domain.hi[0] - reach);
        } else {
          alo1 = std::max(alo1, domain.lo[1] + reach);
          ahi1 = std::min(ahi1, domain.hi[1] - reach);
        }
      }
    }
    if (!(alo0 < ahi0 && alo1 < ahi1))
      throw Error(Errc::empty_interior, "interior margins exhaust the domain");

    const int nx = 192, nv = 96;
    const double hx = (ahi0 - alo0) / nx;
    const double hv = (ahi1 - alo1) / nv;
    std::vector<std::uint8_t> cov(std::size_t(nx) * nv, 1);
    for (const LatticeGeometry& geo : samples) {
      for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nv; ++j) {
          std::uint8_t& c = cov[std::size_t(i) * nv + std::size_t(j)];
          if (!c) continue;
          const double x[2] = {alo0 + (i + 0.5) * hx, alo1 + (j + 0.5) * hv};
          if (!geo.point_in_interior_cell({x, 2})) c = 0;
        }
      }
    }

    auto max_rectangle = [&](int& bi0, int& bi1, int& bj0, int& bj1) {
      std::vector<int> height(std::size_t(nx), 0);
      int best_area = 0;
      for (int j = 0; j < nv; ++j) {
        for (int i = 0; i < nx; ++i)
          height[std::size_t(i)] = cov[std::size_t(i) * nv + std::size_t(j)] ? height[std::size_t(i)] + 1 : 0;
        std::vector<std::pair<int, int>> stack;  // (start index, height)
        for (int i = 0; i <= nx; ++i) {
          const int hcur = i < nx ? height[std::size_t(i)] : 0;
          int start = i;
          while (!stack.empty() && stack.back().second >= hcur) {
            const auto [s0, h0] = stack.back();
            stack.pop_back();
            const int area = h0 * (i - s0);
            if (area > best_area) {
              best_area = area;
              bi0 = s0;
              bi1 = i - 1;
              bj0 = j - h0 + 1;
              bj1 = j;
            }
            start = s0;
          }
          if (hcur > 0) stack.emplace_back(start, hcur);
        }
      }
      return best_area;
    };

    // Grid samples can miss sub-grid slivers of non-interior cells, so the
    // candidate rectangle is verified exactly; a violating cell knocks its
    // footprint out of the coverage and the search repeats.
    for (int iter = 0; iter < 512; ++iter) {
      int bi0 = 0, bi1 = -1, bj0 = 0, bj1 = -1;
      if (max_rectangle(bi0, bi1, bj0, bj1) <= 0)
        throw Error(Errc::empty_interior, "interior unions have empty intersection");
      const Box box = Box::make({alo0 + bi0 * hx, alo1 + bj0 * hv},
                                {alo0 + (bi1 + 1) * hx, alo1 + (bj1 + 1) * hv});
      std::optional<Box> bad;
      for (const LatticeGeometry* geo : enumerable) {
        bad = find_uncovered_cell(*geo, box);
        if (bad) break;
      }
      if (!bad) return box;
      // erase every grid cell touching the violating cell's AABB
      const int i0 = std::max(0, int(std::floor((bad->lo[0] - alo0) / hx)));
      const int i1 = std::min(nx - 1, int(std::floor((bad->hi[0] - alo0) / hx)));
      const int j0 = std::max(0, int(std::floor((bad->lo[1] - alo1) / hv)));
      const int j1 = std::min(nv - 1, int(std::floor((bad->hi[1] - alo1) / hv)));
      bool erased = false;
      for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j) {
          std::uint8_t& c = cov[std::size_t(i) * nv + std::size_t(j)];
          erased = erased || c != 0;
          c = 0;
        }
      if (!erased)
        throw Error(Errc::empty_interior, "could not verify a common interior box");
    }
    throw Error(Errc::empty_interior, "could not verify a common interior box");
  }

  // d != 2: conservative margins only
  Box box = domain;
  box.lo[v] = vlo;
  box.hi[v] = vhi;
  for (const LatticeGeometry& geo : samples) {
    const double sp = geo.frame.spacing();
    for (int a = 0; a < d; ++a) {
      double reach = 0.0;
      for (int j = 0; j < d; ++j) reach += std::abs(geo.frame.col(j, a));
      reach *= 2.0 * sp;
      box.lo[a] = std::max(box.lo[a], domain.lo[a] + reach * 1.01);
      box.hi[a] = std::min(box.hi[a], domain.hi[a] - reach * 1.01);
    }
  }
  for (int a = 0; a < d; ++a)
    if (!(box.lo[a] < box.hi[a]))
      throw Error(Errc::empty_interior, "interior margins exhaust the domain");
  return box;
}

bool BoundCheck::holds(double n_sigma) const {
  const double slack = n_sigma * std::hypot(lhs.std_error, rhs.std_error);
  return lhs.value >= rhs.value - slack;
}

BoundCheck check_lattice_lower_bound(const FieldFunction& u, const ThinDomain& dom, double r,
                                     double s, int n_mu_samples, std::uint64_t seed,
                                     const SplitConfig& lhs_cfg, std::int64_t energy_points) {
  if (!(s > 0.0 && s < 1.0)) throw Error(Errc::invalid_s, "s must lie in (0,1)");
  if (!(r > 0.0)) throw Error(Errc::invalid_config, "r must be positive");
  if (n_mu_samples < 2) throw Error(Errc::invalid_config, "need at least 2 mu samples");
  const int d = dom.d;
  const Box film = dom.film_box();
  const double two_minus_2s = 2.0 - 2.0 * s;

  const CounterRng rho_rng = CounterRng::make(seed, 3);
  std::vector<LatticeGeometry> geos;
  geos.reserve(std::size_t(n_mu_samples));
  for (int i = 0; i < n_mu_samples; ++i) {
    Frame f = random_frame(d, substream(seed, 0x5EED0 + std::uint64_t(i)));
    f.rho = std::pow(rho_rng.uniform(std::uint64_t(i), 0), 1.0 / two_minus_2s);
    f.r = r;
    geos.push_back(LatticeGeometry{std::move(f), film});
  }
  const Box inner = common_interior_box(geos, film);
  const double inner_vol = inner.volume();

  const double coef = std::pow(r, two_minus_2s) * sphere_area(d) / (double(d) * two_minus_2s);

  std::vector<double> per_sample(std::size_t(n_mu_samples), 0.0);
  for_batches(n_mu_samples, Exec::parallel, [&](std::int64_t i) {
    const CounterRng pt_rng = CounterRng::make(seed, 100 + std::uint64_t(i));
    const LatticeGeometry& geo = geos[std::size_t(i)];
    Vec x{}, g{};
    double sum = 0.0;
    for (std::int64_t k = 0; k < energy_points; ++k) {
      for (int a = 0; a < d; ++a)
        x[std::size_t(a)] = inner.lo[a] + pt_rng.uniform(std::uint64_t(k), std::uint32_t(a)) * inner.extent(a);
      geo.kuhn_gradient(u, {x.data(), std::size_t(d)}, {g.data(), std::size_t(d)});
      double n2 = 0.0;
      for (int a = 0; a < d; ++a) n2 += g[std::size_t(a)] * g[std::size_t(a)];
      sum += n2;
    }
    per_sample[std::size_t(i)] = coef * inner_vol * sum / double(energy_points);
  });

  double mean = 0.0;
  for (double v : per_sample) mean += v;
  mean /= double(n_mu_samples);
  double var = 0.0;
  for (double v : per_sample) var += (v - mean) * (v - mean);
  var /= double(n_mu_samples - 1);

  BoundCheck out;
  out.rhs.value = mean;
  out.rhs.std_error = std::sqrt(var / double(n_mu_samples));
  out.rhs.n_samples = std::int64_t(n_mu_samples) * energy_points;
  out.rhs.method = Method::monte_carlo_pairs;
  out.rhs.seed = seed;
  out.lhs = gagliardo_sq(u, dom, s, lhs_cfg, substream(seed, 0x1115));
  out.inner_region = inner;
  return out;
}

namespace {

class SmoothedFieldImpl final : public FieldImpl {
 public:
  SmoothedFieldImpl(std::vector<LatticeGeometry> geos, FieldFunction u, int d)
      : geos_(std::move(geos)), u_(std::move(u)), d_(d) {}

  int dim() const override { return d_; }
  double value(std::span<const double> x) const override {
    double sum = 0.0;
    for (const LatticeGeometry& g : geos_) sum += g.kuhn_value(u_, x);
    return sum / double(geos_.size());
  }
  bool has_gradient() const override { return true; }
  void gradient(std::span<const double> x, std::span<double> out) const override {
    Vec acc{}, g{};
    for (const LatticeGeometry& geo : geos_) {
      geo.kuhn_gradient(u_, x, {g.data(), std::size_t(d_)});
      for (int a = 0; a < d_; ++a) acc[std::size_t(a)] += g[std::size_t(a)];
    }
    for (int a = 0; a < d_; ++a) out[a] = acc[std::size_t(a)] / double(geos_.size());
  }
  std::string describe() const override { return "smoothed(" + u_.describe() + ")"; }

 private:
  std::vector<LatticeGeometry> geos_;
  FieldFunction u_;
  int d_;
};

}  // namespace

SmoothedField lattice_smoothed_field(const FieldFunction& u, const ThinDomain& dom, double s,
                                     double sigma, int n_mu_samples, std::uint64_t seed) {
  if (!(sigma > 0.0 && sigma < 0.5)) throw Error(Errc::invalid_sigma, "sigma must lie in (0, 1/2)");
  if (!(s > 0.0 && s < 1.0)) throw Error(Errc::invalid_s, "s must lie in (0,1)");
  const int d = dom.d;
  const Box film = dom.film_box();
  const double two_minus_2s = 2.0 - 2.0 * s;
  const CounterRng rho_rng = CounterRng::make(seed, 13);
  std::vector<LatticeGeometry> geos;
  geos.reserve(std::size_t(n_mu_samples));
  for (int i = 0; i < n_mu_samples; ++i) {
    Frame f = random_frame(d, substream(seed, 0xA17E + std::uint64_t(i)));
    f.rho = std::pow(rho_rng.uniform(std::uint64_t(i), 0), 1.0 / two_minus_2s);
    f.r = sigma * dom.eps;
    geos.push_back(LatticeGeometry{std::move(f), film});
  }
  SmoothedField out;
  out.region = common_interior_box(geos, film);
  out.samples = geos;
  out.field = FieldFunction(std::make_shared<SmoothedFieldImpl>(std::move(geos), u, d));
  return out;
}

bool SmoothingCheck::holds(double n_sigma) const {
  return lhs <= rhs.value + n_sigma * rhs.std_error;
}

SmoothingCheck check_smoothing_bound(const FieldFunction& u, const ThinDomain& dom, double s,
                                     double sigma, const SplitConfig& cfg, std::uint64_t seed,
                                     int n_mu_samples, int grid_n) {
  SmoothedField sf = lattice_smoothed_field(u, dom, s, sigma, n_mu_samples, seed);
  const Box film = dom.film_box();
  const Box inner = common_interior_box(
      sf.samples, film, std::make_pair(sigma * dom.eps, (1.0 - sigma) * dom.eps));

  const double energy = dirichlet_energy(sf.field, inner, grid_n);
  SmoothingCheck out;
  out.inner_region = inner;
  out.lhs = bbm_constant(dom.d) * std::pow(sigma, 2.0 - 2.0 * s) * energy / dom.eps;
  EnergyEstimate rhs = film_energy(u, dom, s, cfg, substream(seed, 0x9E11));
  const double lam = native_scaling(dom.eps, s);
  rhs.value *= lam;
  rhs.std_error *= lam;
  rhs.near_value *= lam;
  rhs.far_value *= lam;
  out.rhs = rhs;
  out.volume_fraction = inner.volume() / film.volume();
  out.ratio_normalized = (out.lhs / out.volume_fraction) / out.rhs.value;
  return out;
}

}  // namespace thinfilm
