#include "tbem/geometry.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace tbem {

ParametricCurve::ParametricCurve(PointFn position, PointFn velocity, std::string label)
    : position_(std::move(position)), velocity_(std::move(velocity)), label_(std::move(label))
{
    if (!position_ || !velocity_)
        throw GeometryError("curve requires both position and velocity maps");
}

ParametricCurve ParametricCurve::circle(double radius, Vec2 center)
{
    if (!(radius > 0.0))
        throw GeometryError("circle radius must be positive");
    return ParametricCurve(
        [=](double t) { return Vec2{center.x + radius * std::cos(t), center.y + radius * std::sin(t)}; },
        [=](double t) { return Vec2{-radius * std::sin(t), radius * std::cos(t)}; },
        "circle");
}

ParametricCurve ParametricCurve::ellipse(double semi_x, double semi_y, Vec2 center)
{
    if (!(semi_x > 0.0) || !(semi_y > 0.0))
        throw GeometryError("ellipse semi-axes must be positive");
    return ParametricCurve(
        [=](double t) { return Vec2{center.x + semi_x * std::cos(t), center.y + semi_y * std::sin(t)}; },
        [=](double t) { return Vec2{-semi_x * std::sin(t), semi_y * std::cos(t)}; },
        "ellipse");
}

ParametricCurve ParametricCurve::star(double radius, double amplitude, int frequency, Vec2 center)
{
    if (!(radius > 0.0) || std::abs(amplitude) >= 1.0)
        throw GeometryError("star needs radius > 0 and |amplitude| < 1");
    const double k = frequency;
    return ParametricCurve(
        [=](double t) {
            const double r = radius * (1.0 + amplitude * std::cos(k * t));
            return Vec2{center.x + r * std::cos(t), center.y + r * std::sin(t)};
        },
        [=](double t) {
            const double r = radius * (1.0 + amplitude * std::cos(k * t));
            const double dr = -radius * amplitude * k * std::sin(k * t);
            return Vec2{dr * std::cos(t) - r * std::sin(t), dr * std::sin(t) + r * std::cos(t)};
        },
        "star");
}

Vec2 ParametricCurve::acceleration(double t) const
{
    // eighth-order centered first-derivative stencil applied to the velocity
    constexpr double h = 1e-3;
    constexpr double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    Vec2 acc{};
    for (int m = 0; m < 4; ++m) {
        const double dt = (m + 1) * h;
        acc += c[m] * (velocity_(t + dt) - velocity_(t - dt));
    }
    return (1.0 / h) * acc;
}

ParametricCurve ParametricCurve::reversed() const
{
    auto pos = position_;
    auto vel = velocity_;
    return ParametricCurve(
        [pos](double t) { return pos(-t); },
        [vel](double t) { return -1.0 * vel(-t); },
        label_ + " (reversed)");
}

double signed_area(const ParametricCurve &curve, std::size_t n)
{
    double area = 0.0;
    Vec2 prev = curve.position(0.0);
    for (std::size_t j = 1; j <= n; ++j) {
        const Vec2 cur = curve.position(kTwoPi * static_cast<double>(j % n) / static_cast<double>(n));
        area += cross(prev, cur);
        prev = cur;
    }
    return 0.5 * area;
}

ParametricCurve orient_counterclockwise(const ParametricCurve &curve, std::string *warning)
{
    if (signed_area(curve) >= 0.0)
        return curve;
    if (warning)
        *warning = "curve '" + curve.label() + "' is clockwise; reversed to counterclockwise";
    return curve.reversed();
}

double DiscreteBoundary::length() const
{
    double sum = 0.0;
    for (double w : weights)
        sum += w;
    return sum;
}

double DiscreteBoundary::mesh_width() const
{
    double h = 0.0;
    const std::size_t n = nodes.size();
    for (std::size_t j = 0; j < n; ++j)
        h = std::max(h, norm(nodes[(j + 1) % n] - nodes[j]));
    return h;
}

DiscreteBoundary discretize(const ParametricCurve &curve, std::size_t n)
{
    if (n < 4 || n % 2 != 0)
        throw GeometryError("node count must be even and at least 4, got " + std::to_string(n));

    DiscreteBoundary b;
    b.curve = std::make_shared<const ParametricCurve>(curve);
    b.params.resize(n);
    b.nodes.resize(n);
    b.velocities.resize(n);
    b.speeds.resize(n);
    b.normals.resize(n);
    b.weights.resize(n);
    b.curvature.resize(n);

    const double dt = kTwoPi / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = dt * static_cast<double>(j);
        const Vec2 v = curve.velocity(t);
        const double speed = norm(v);
        if (!(speed > 0.0) || !std::isfinite(speed))
            throw GeometryError("non-regular parametrization: zero velocity at node " + std::to_string(j),
                                static_cast<std::ptrdiff_t>(j));
        const Vec2 a = curve.acceleration(t);
        b.params[j] = t;
        b.nodes[j] = curve.position(t);
        b.velocities[j] = v;
        b.speeds[j] = speed;
        b.normals[j] = Vec2{v.y / speed, -v.x / speed};
        b.weights[j] = dt * speed;
        b.curvature[j] = cross(v, a) / (speed * speed * speed);
    }
    return b;
}

bool inside_polygon(const DiscreteBoundary &boundary, const Vec2 &p)
{
    int winding = 0;
    const std::size_t n = boundary.size();
    for (std::size_t j = 0; j < n; ++j) {
        const Vec2 &a = boundary.nodes[j];
        const Vec2 &b = boundary.nodes[(j + 1) % n];
        const double side = cross(b - a, p - a);
        if (a.y <= p.y) {
            if (b.y > p.y && side > 0.0)
                ++winding;
        } else if (b.y <= p.y && side < 0.0) {
            --winding;
        }
    }
    return winding != 0;
}

double distance_to_polygon(const DiscreteBoundary &boundary, const Vec2 &p)
{
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = boundary.size();
    for (std::size_t j = 0; j < n; ++j) {
        const Vec2 &a = boundary.nodes[j];
        const Vec2 seg = boundary.nodes[(j + 1) % n] - a;
        const double len2 = dot(seg, seg);
        double s = len2 > 0.0 ? dot(p - a, seg) / len2 : 0.0;
        s = std::clamp(s, 0.0, 1.0);
        best = std::min(best, norm(p - (a + s * seg)));
    }
    return best;
}

ShapeMap::ShapeMap(ParametricCurve base, VectorFn displacement, VectorFn displacement_rate)
    : base_(std::move(base)), displacement_(std::move(displacement)),
      displacement_rate_(std::move(displacement_rate))
{
}

ShapeMap ShapeMap::identity(const ParametricCurve &base)
{
    return ShapeMap(base, [](double) { return Vec2{}; }, [](double) { return Vec2{}; });
}

ShapeMap ShapeMap::dilation(const ParametricCurve &base, double factor)
{
    const double s = factor - 1.0;
    return ShapeMap(
        base, [base, s](double t) { return s * base.position(t); },
        [base, s](double t) { return s * base.velocity(t); });
}

ParametricCurve ShapeMap::image() const
{
    const ParametricCurve base = base_;
    const VectorFn disp = displacement_;
    const VectorFn rate = displacement_rate_;
    return ParametricCurve(
        [base, disp](double t) { return base.position(t) + disp(t); },
        [base, rate](double t) { return base.velocity(t) + rate(t); },
        base_.label() + " (perturbed)");
}

std::vector<double> sigma_tilde(const ShapeMap &phi, std::size_t n)
{
    std::vector<double> ratio(n);
    const double dt = kTwoPi / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = dt * static_cast<double>(j);
        const Vec2 base_velocity = phi.base().velocity(t);
        const double image_speed = norm(base_velocity + phi.displacement_rate(t));
        if (!(image_speed > 0.0) || !std::isfinite(image_speed))
            throw GeometryError("degenerate image speed at node " + std::to_string(j),
                                static_cast<std::ptrdiff_t>(j));
        ratio[j] = image_speed / norm(base_velocity);
    }
    return ratio;
}

std::string ShapeReport::summary() const
{
    std::ostringstream os;
    os << "injective=" << injective << " (margin " << injectivity_margin << "), immersed=" << immersed
       << " (margin " << immersion_margin << "), contained=" << contained << " (margin "
       << containment_margin << "), orientation_preserved=" << orientation_preserved;
    return os.str();
}

ShapeReport validate_shape(const ShapeMap &phi, const DiscreteBoundary &outer, std::size_t n)
{
    ShapeReport report;
    const ParametricCurve image = phi.image();
    const double dt = kTwoPi / static_cast<double>(n);

    std::vector<Vec2> pts(n);
    double length = 0.0;
    report.immersion_margin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        const double t = dt * static_cast<double>(j);
        pts[j] = image.position(t);
        const double speed = norm(image.velocity(t));
        report.immersion_margin = std::min(report.immersion_margin, std::isfinite(speed) ? speed : 0.0);
        length += dt * (std::isfinite(speed) ? speed : 0.0);
    }
    report.immersed = report.immersion_margin > 1e-10;

    double min_pair = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            min_pair = std::min(min_pair, norm(pts[i] - pts[j]));
    report.injectivity_margin = length > 0.0 ? min_pair / length : 0.0;
    report.injective = report.injectivity_margin > 1e-10;

    bool all_inside = true;
    double margin = std::numeric_limits<double>::infinity();
    for (const Vec2 &p : pts) {
        all_inside = all_inside && inside_polygon(outer, p);
        for (const Vec2 &q : outer.nodes)
            margin = std::min(margin, norm(p - q));
    }
    report.containment_margin = all_inside ? margin : -margin;
    report.contained = all_inside && margin > 0.0;

    // shoelace over the image nodes
    double area = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        area += cross(pts[j], pts[(j + 1) % n]);
    report.orientation_preserved = area > 0.0;

    report.valid = report.injective && report.immersed && report.contained && report.orientation_preserved;
    return report;
}

}  // namespace tbem
