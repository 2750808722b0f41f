#include <doctest.h>

#include <cmath>
#include <numbers>

#include "thinfilm/extension.hpp"

using namespace thinfilm;

TEST_CASE("height folding") {
  CHECK(fold_height(1.5, 1.0) == doctest::Approx(0.5));
  CHECK(fold_height(2.25, 1.0) == doctest::Approx(0.25));
  CHECK(fold_height(-0.3, 1.0) == doctest::Approx(0.3));
  CHECK(fold_height(0.7, 1.0) == doctest::Approx(0.7));
}

TEST_CASE("reflection and periodicity of the extension") {
  const ThinDomain dom = make_thin_film(2, {0.0}, {1.0}, 1.0);
  const FieldFunction ext = reflect_periodize(vertical_linear(1.0, 2), dom);
  const double a[2] = {0.4, 1.5};
  CHECK(ext.value({a, 2}) == doctest::Approx(0.5));
  const double b[2] = {0.4, 2.25};
  CHECK(ext.value({b, 2}) == doctest::Approx(0.25));

  // sampled invariants: even in x_d and 2 eps periodic
  const ThinDomain dm = make_thin_film(2, {0.0}, {1.0}, 0.3);
  const FieldFunction e2 = reflect_periodize(parse_expression("x1 + sin(3*x2)", 2), dm);
  for (int i = 0; i < 50; ++i) {
    const double x1 = (i + 0.5) / 50.0, t = 2.1 * (i + 0.3) / 50.0;
    const double p[2] = {x1, t}, q[2] = {x1, -t}, r[2] = {x1, t + 0.6};
    CHECK(e2.value({p, 2}) == doctest::Approx(e2.value({q, 2})).epsilon(1e-12));
    CHECK(e2.value({p, 2}) == doctest::Approx(e2.value({r, 2})).epsilon(1e-12));
  }

  // horizontal fields pass through at every height
  const FieldFunction h = reflect_periodize(make_field("x1sq", 2), dm);
  const double c[2] = {0.7, 17.3};
  CHECK(h.value({c, 2}) == doctest::Approx(0.49));
  CHECK(h.horizontal_only());
}

TEST_CASE("reduction distance") {
  const ThinDomain dom = make_thin_film(2, {0.0}, {1.0}, 0.1);
  const Box inner = Box::make({0.1}, {0.9});
  const FieldFunction limit = make_field("x1", 2);

  SUBCASE("matching horizontal field gives zero") {
    CHECK(reduction_distance(limit, dom, limit, inner, 128) == doctest::Approx(0.0));
  }
  SUBCASE("bounded vertical wiggle obeys the amplitude bound") {
    const FieldFunction wiggly = parse_expression("x1 + 0.1*sin(62.831853071795865*x2)", 2);
    const double dist = reduction_distance(wiggly, dom, limit, inner, 512);
    CHECK(dist <= 0.1 * inner.volume() * 1.0 + 1e-9);
  }
  SUBCASE("mean |sin| limit") {
    // u = x1 + 0.5 sin(2 pi x_d / eps): distance -> vol * 0.5 * 2/pi
    const FieldFunction osc = parse_expression("x1 + 0.5*sin(62.831853071795865*x2)", 2);
    const double expect = inner.volume() * 1.0 * 0.5 * 2.0 / std::numbers::pi;
    CHECK(reduction_distance(osc, dom, limit, inner, 600) == doctest::Approx(expect).epsilon(0.01));
  }
  SUBCASE("non-horizontal limit rejected") {
    CHECK_THROWS_AS(reduction_distance(limit, dom, vertical_linear(1.0, 2), inner, 64), Error);
  }
}

TEST_CASE("both reduction metrics co-vanish") {
  // families converging to x1 at rates the two metrics must agree on
  const Box inner = Box::make({0.2}, {0.8});
  const FieldFunction limit = make_field("x1", 2);
  for (int family = 0; family < 3; ++family) {
    double prev_ext = 1e300;
    for (double eps : {0.2, 0.1, 0.05}) {
      const ThinDomain dom = make_thin_film(2, {0.0}, {1.0}, eps);
      const double freq = 2.0 * std::numbers::pi / eps;
      FieldFunction u_eps =
          family == 0 ? parse_expression("x1 + " + format_double(eps) + "*sin(" + format_double(freq) + "*x2)", 2)
          : family == 1 ? parse_expression("x1 + x2", 2)
                        : parse_expression("x1 + " + format_double(std::sqrt(eps)) + "*sin(" +
                                               format_double(freq) + "*x2)",
                                           2);
      // metric a: extension-based distance on omega' x (0,1)
      const double da = reduction_distance(u_eps, dom, limit, inner, 720);
      // metric b: rescaled comparison on the same region
      const FieldFunction v = rescale_to_unit(u_eps, dom);
      const int n = 720;
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double x[2] = {inner.lo[0] + (i + 0.5) * inner.extent(0) / n, (j + 0.5) / n};
          acc += std::abs(v.value({x, 2}) - limit.value({x, 2}));
        }
      const double db = acc * inner.extent(0) / (double(n) * n);
      CHECK(da == doctest::Approx(db).epsilon(0.1));
      CHECK(da <= prev_ext + 1e-12);
      prev_ext = da;
    }
  }
}

TEST_CASE("thick film sequence") {
  const Box omega = Box::make({0.0}, {1.0});
  const SplitConfig cfg{0.25, 150000, 150000};
  SUBCASE("constant family is identically zero") {
    std::vector<PathPoint> pts;
    for (double eps : {0.3, 0.2, 0.1}) pts.push_back({eps, 1.0 - eps * eps});
    const auto seq = thick_film_sequence(constant_field(1.0, 2), omega, ParamPath::custom(pts), 1.0, cfg, 3);
    for (const auto& [eps, v] : seq) CHECK(v == 0.0);
  }
  SUBCASE("x1 stays bounded along the admissible path") {
    std::vector<PathPoint> pts;
    for (double eps : {0.3, 0.2, 0.1}) pts.push_back({eps, 1.0 - eps * eps});
    const auto seq = thick_film_sequence(make_field("x1", 2), omega, ParamPath::custom(pts), 1.0, cfg, 4);
    double lo = seq[0].second, hi = seq[0].second;
    for (const auto& [eps, v] : seq) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(hi < 2.0 * lo);
    // the scale factor of the thickness condition tends to one
    const PathPoint& last = pts.back();
    CHECK(std::pow(last.eps, 2.0 * (1.0 - last.s)) >= 0.9);
  }
  SUBCASE("violating path is rejected") {
    // eps = 1 - s eventually violates eps >= sqrt(1-s)
    const ParamPath bad = ParamPath::custom({{0.1, 0.9}, {0.05, 0.95}});
    CHECK_THROWS_AS(thick_film_sequence(make_field("x1", 2), omega, bad, 1.0, cfg, 5), Error);
    try {
      thick_film_sequence(make_field("x1", 2), omega, bad, 1.0, cfg, 5);
      FAIL("unreachable");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::path_violates_thickness);
    }
  }
}

TEST_CASE("horizontal extension leaves the energy unchanged") {
  const ThinDomain unit = make_thin_film(2, {0.0}, {1.0}, 1.0);
  const ThinDomain film = make_thin_film(2, {0.0}, {1.0}, 0.25);
  const FieldFunction u = make_field("x1", 2);
  const FieldFunction ext = reflect_periodize(u, film);
  const SplitConfig cfg{0.25, 200000, 200000};
  const EnergyEstimate a = film_energy(u, unit, 0.8, cfg, 6);
  const EnergyEstimate b = film_energy(ext, unit, 0.8, cfg, 7);
  CHECK(std::abs(a.value - b.value) <= 3.0 * std::hypot(a.std_error, b.std_error));
}
