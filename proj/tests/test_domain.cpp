#include <doctest.h>

#include <array>
#include <cmath>

#include "thinfilm/domain.hpp"
#include "thinfilm/rng.hpp"

using namespace thinfilm;

namespace {

double val(const FieldFunction& u, std::initializer_list<double> x) {
  return u.value(std::span<const double>(x.begin(), x.size()));
}

}  // namespace

TEST_CASE("thin film construction and volume") {
  const ThinDomain a = make_thin_film(2, {0.0}, {1.0}, 0.1);
  CHECK(a.film_box().dim() == 2);
  CHECK(a.film_box().hi[1] == doctest::Approx(0.1));
  CHECK(a.volume() == doctest::Approx(0.1));

  const ThinDomain b = make_thin_film(3, {0.0, 0.0}, {1.0, 2.0}, 0.05);
  CHECK(b.volume() == doctest::Approx(0.1));

  CHECK_THROWS_AS(make_thin_film(1, {}, {}, 0.1), Error);
  CHECK_THROWS_AS(make_thin_film(2, {0.0}, {0.0}, 0.1), Error);
  CHECK_THROWS_AS(make_thin_film(2, {0.0}, {1.0}, 0.0), Error);
  try {
    make_thin_film(2, {0.0}, {0.0}, 0.1);
    FAIL("unreachable");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_box);
  }
  try {
    make_thin_film(2, {0.0}, {1.0}, -1.0);
    FAIL("unreachable");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::nonpositive_thickness);
  }
}

TEST_CASE("expression parsing basics") {
  const FieldFunction id = parse_expression("x1", 2);
  CHECK(id.horizontal_only());
  CHECK(val(id, {0.3, 0.9}) == doctest::Approx(0.3));

  const FieldFunction mix = parse_expression("sin(3.0*x1) + x2", 2);
  CHECK_FALSE(mix.horizontal_only());
  CHECK(val(mix, {0.2, 0.5}) == doctest::Approx(std::sin(0.6) + 0.5));

  try {
    parse_expression("x1 +", 2);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parse_error);
    CHECK(e.position() == 4);
  }
  try {
    parse_expression("x3", 2);
    FAIL("expected UnknownVariable");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_variable);
  }

  // precedence and functions
  const FieldFunction p = parse_expression("2*x1^2 - x1/2 + exp(0*x1)", 2);
  CHECK(val(p, {0.5, 0.0}) == doctest::Approx(2 * 0.25 - 0.25 + 1.0));
  // deterministic parse: identical trees evaluate bit-identically
  const FieldFunction q = parse_expression("2*x1^2 - x1/2 + exp(0*x1)", 2);
  CHECK(val(p, {0.377, 0.1}) == val(q, {0.377, 0.1}));
}

TEST_CASE("catalog gradients match finite differences") {
  const Box box = Box::make({0.05, 0.05}, {0.95, 0.95});
  const CounterRng rng = CounterRng::make(31337, 0);
  const std::array<FieldFunction, 6> fns = {
      constant_field(2.5, 2),
      linear_horizontal({1.5}, 2),
      quadratic_horizontal(2),
      sine_horizontal(2 * 3.14159265358979, 2),
      vertical_linear(0.7, 2),
      parse_expression("sin(2*x1)*x2 + x1^3", 2)};
  for (const FieldFunction& u : fns) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      std::array<double, 2> x{}, g{};
      for (int a = 0; a < 2; ++a)
        x[std::size_t(a)] = box.lo[a] + rng.uniform(std::uint64_t(i), std::uint32_t(a)) * box.extent(a);
      u.gradient({x.data(), 2}, {g.data(), 2});
      const double gmax = std::max(std::abs(g[0]), std::abs(g[1]));
      for (int a = 0; a < 2; ++a) {
        const double h = 1e-5;
        std::array<double, 2> xp = x, xm = x;
        xp[std::size_t(a)] += h;
        xm[std::size_t(a)] -= h;
        const double fd = (u.value({xp.data(), 2}) - u.value({xm.data(), 2})) / (2 * h);
        worst = std::max(worst, std::abs(fd - g[std::size_t(a)]) / (1.0 + gmax));
      }
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("vertical rescale") {
  const ThinDomain dom = make_thin_film(2, {0.0}, {1.0}, 0.1);
  const FieldFunction height = vertical_linear(1.0, 2);
  const FieldFunction v = rescale_to_unit(height, dom);
  CHECK(val(v, {0.2, 1.0}) == doctest::Approx(0.1));

  const FieldFunction u1 = linear_horizontal({1.0}, 2);
  const FieldFunction v1 = rescale_to_unit(u1, dom);
  CHECK(val(v1, {0.37, 0.9}) == doctest::Approx(0.37));
  CHECK(v1.horizontal_only());

  // u(x) = sin(x_d / eps), eps = 0.25: v(x', t) = u(x', eps t) = sin(t)
  const ThinDomain dq = make_thin_film(2, {0.0}, {1.0}, 0.25);
  const FieldFunction osc = parse_expression("sin(x2/0.25)", 2);
  const FieldFunction vo = rescale_to_unit(osc, dq);
  const FieldFunction ref = parse_expression("sin(x2)", 2);
  const CounterRng rng = CounterRng::make(5, 0);
  for (int i = 0; i < 100; ++i) {
    const double x[2] = {rng.uniform(std::uint64_t(i), 0), rng.uniform(std::uint64_t(i), 1)};
    CHECK(vo.value({x, 2}) == doctest::Approx(ref.value({x, 2})).epsilon(1e-12));
  }

  // round trip: rescale then un-rescale is the identity to 1e-14
  const FieldFunction back = vertical_scale(vo, 1.0 / dq.eps);
  for (int i = 0; i < 100; ++i) {
    const double x[2] = {rng.uniform(std::uint64_t(i), 2), 0.25 * rng.uniform(std::uint64_t(i), 3)};
    CHECK(back.value({x, 2}) == doctest::Approx(osc.value({x, 2})).epsilon(1e-14));
  }
}

TEST_CASE("horizontal flag consistent with sampled x_d independence") {
  const CounterRng rng = CounterRng::make(17, 0);
  for (const char* id : {"x1", "const:3", "x1sq", "sin2pi", "vertical:1", "sin(3.0*x1)+x2"}) {
    const FieldFunction u = make_field(id, 2);
    bool depends = false;
    for (int i = 0; i < 200 && !depends; ++i) {
      const double x1 = rng.uniform(std::uint64_t(i), 0);
      const double t1 = rng.uniform(std::uint64_t(i), 1), t2 = rng.uniform(std::uint64_t(i), 2);
      const double a[2] = {x1, t1}, b[2] = {x1, t2};
      if (std::abs(u.value({a, 2}) - u.value({b, 2})) > 1e-13) depends = true;
    }
    CHECK(u.horizontal_only() == !depends);
  }
}

TEST_CASE("lipschitz bounds") {
  const Box box = Box::make({0.0, 0.0}, {1.0, 1.0});
  CHECK(*constant_field(9.0, 2).bounds(box).lip == 0.0);
  CHECK(*linear_horizontal({3.0}, 2).bounds(box).lip == doctest::Approx(3.0));
  CHECK(*quadratic_horizontal(2).bounds(box).lip == doctest::Approx(2.0));
  CHECK_FALSE(quadratic_horizontal(2).bounds(box).estimated);

  const SmoothnessBounds est = parse_expression("sin(2*x1)", 2).bounds(box);
  CHECK(est.estimated);
  CHECK(*est.lip >= 2.0);        // true sup |grad| is 2
  CHECK(*est.lip <= 2.0 * 1.6);  // 1.5 safety factor plus sampling slack
}
