#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tbem/geometry.hpp"

using namespace tbem;

namespace {

double sum(const std::vector<double> &v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return s;
}

double perimeter(const std::function<double(double)> &speed)
{
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(speed, 0.0, kTwoPi, 15, 1e-15);
}

// r(t) = 1 + 0.1 cos 3t in polar form about the origin
ShapeMap wobble(const ParametricCurve &base)
{
    return ShapeMap(
        base, [](double t) { return 0.1 * std::cos(3 * t) * Vec2{std::cos(t), std::sin(t)}; },
        [](double t) {
            return Vec2{-0.3 * std::sin(3 * t) * std::cos(t) - 0.1 * std::cos(3 * t) * std::sin(t),
                        -0.3 * std::sin(3 * t) * std::sin(t) + 0.1 * std::cos(3 * t) * std::cos(t)};
        });
}

}  // namespace

TEST_CASE("unit circle with four nodes")
{
    const DiscreteBoundary b = discretize(ParametricCurve::circle(1.0), 4);
    const Vec2 expected[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(norm(b.nodes[j] - expected[j]) <= 1e-15);
        CHECK(norm(b.normals[j] - expected[j]) <= 1e-15);
        CHECK(b.weights[j] == doctest::Approx(M_PI / 2).epsilon(1e-15));
    }
}

TEST_CASE("circle weights sum to the perimeter")
{
    const DiscreteBoundary b = discretize(ParametricCurve::circle(2.0), 8);
    CHECK(std::abs(sum(b.weights) - 4 * M_PI) <= 1e-14);
    for (double k : b.curvature)
        CHECK(k == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("ellipse weights integrate the perimeter")
{
    // 4 a E(e) with e^2 = 1 - b^2/a^2
    const double exact = 8.0 * std::comp_ellint_2(std::sqrt(0.75));
    CHECK(exact == doctest::Approx(9.688448220547645).epsilon(1e-15));
    const double gk = perimeter([](double t) { return std::hypot(2 * std::sin(t), std::cos(t)); });
    CHECK(std::abs(gk - exact) <= 1e-13);

    const DiscreteBoundary b = discretize(ParametricCurve::ellipse(2.0, 1.0), 64);
    CHECK(std::abs(sum(b.weights) - exact) <= 1e-12);
}

TEST_CASE("shifting the parameter origin permutes the nodes")
{
    const std::size_t n = 32;
    const double c = kTwoPi * 5 / n;
    const ParametricCurve e = ParametricCurve::ellipse(2.0, 1.0);
    const ParametricCurve shifted([&](double t) { return e.position(t + c); },
                                  [&](double t) { return e.velocity(t + c); });
    const DiscreteBoundary a = discretize(e, n), b = discretize(shifted, n);
    for (std::size_t j = 0; j < n; ++j) {
        CHECK(norm(b.nodes[j] - a.nodes[(j + 5) % n]) <= 1e-14);
        CHECK(std::abs(b.weights[j] - a.weights[(j + 5) % n]) <= 1e-14);
    }
}

TEST_CASE("discretize rejects bad input")
{
    CHECK_THROWS_AS(discretize(ParametricCurve::circle(1.0), 7), GeometryError);
    const ParametricCurve stalled([](double t) { return Vec2{std::cos(t), std::sin(t)}; },
                                  [](double t) { return (1 - std::cos(t)) * Vec2{-std::sin(t), std::cos(t)}; });
    try {
        discretize(stalled, 16);
        FAIL("no error");
    } catch (const GeometryError &e) {
        CHECK(e.index() == 0);
    }
}

TEST_CASE("orientation is normalized")
{
    const ParametricCurve cw = ParametricCurve::circle(1.0).reversed();
    CHECK(signed_area(cw) < 0);
    std::string warning;
    const ParametricCurve ccw = orient_counterclockwise(cw, &warning);
    CHECK(signed_area(ccw) > 0);
    CHECK_FALSE(warning.empty());
    const DiscreteBoundary b = discretize(ccw, 16);
    for (std::size_t j = 0; j < b.size(); ++j)
        CHECK(dot(b.normals[j], b.nodes[j]) == doctest::Approx(1.0));
}

TEST_CASE("polygon queries")
{
    const DiscreteBoundary b = discretize(ParametricCurve::circle(1.0), 64);
    CHECK(inside_polygon(b, {0.2, 0.3}));
    CHECK_FALSE(inside_polygon(b, {1.2, 0.0}));
    CHECK(distance_to_polygon(b, {0.0, 0.0}) == doctest::Approx(std::cos(M_PI / 64)).epsilon(1e-14));
}

TEST_CASE("sigma tilde")
{
    const ParametricCurve unit = ParametricCurve::circle(1.0);
    for (double v : sigma_tilde(ShapeMap::identity(unit), 32))
        CHECK(v == 1.0);

    // |d/dt (2 gamma)| / |gamma'|
    for (double v : sigma_tilde(ShapeMap::dilation(unit, 2.0), 32))
        CHECK(v == doctest::Approx(2.0).epsilon(1e-15));

    const std::size_t n = 64;
    const std::vector<double> sig = sigma_tilde(wobble(unit), n);
    const DiscreteBoundary b = discretize(unit, n);
    double integral = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        integral += sig[j] * b.weights[j];
    const double oracle = perimeter([](double t) {
        return std::hypot(1 + 0.1 * std::cos(3 * t), 0.3 * std::sin(3 * t));
    });
    CHECK(std::abs(integral - oracle) <= 1e-10);

    const ShapeMap collapse(unit, [](double t) { return -1.0 * Vec2{std::cos(t), std::sin(t)}; },
                            [](double t) { return -1.0 * Vec2{-std::sin(t), std::cos(t)}; });
    CHECK_THROWS_AS(sigma_tilde(collapse, 16), GeometryError);
}

TEST_CASE("validate shape")
{
    const ParametricCurve unit = ParametricCurve::circle(1.0);
    const DiscreteBoundary outer = discretize(ParametricCurve::circle(2.0), 64);

    const ShapeReport id = validate_shape(ShapeMap::identity(unit), outer, 64);
    CHECK(id.valid);
    CHECK(id.containment_margin == doctest::Approx(1.0).epsilon(1e-14));

    const ShapeReport big = validate_shape(ShapeMap::dilation(unit, 3.0), outer, 64);
    CHECK_FALSE(big.valid);
    CHECK_FALSE(big.contained);

    // lemniscate of Gerono: t = 0 and t = pi land on the origin
    const ShapeMap eight(
        unit, [](double t) { return Vec2{0.5 * std::sin(t) - std::cos(t), 0.25 * std::sin(2 * t) - std::sin(t)}; },
        [](double t) { return Vec2{0.5 * std::cos(t) + std::sin(t), 0.5 * std::cos(2 * t) - std::cos(t)}; });
    const ShapeReport fig = validate_shape(eight, outer, 64);
    CHECK_FALSE(fig.valid);
    CHECK_FALSE(fig.injective);
    CHECK(fig.injectivity_margin < 1e-12);

    const ShapeReport flip = validate_shape(
        ShapeMap(unit, [](double t) { return Vec2{0.0, -2 * std::sin(t)}; },
                 [](double t) { return Vec2{0.0, -2 * std::cos(t)}; }),
        outer, 64);
    CHECK_FALSE(flip.orientation_preserved);
    CHECK_FALSE(flip.valid);
}
