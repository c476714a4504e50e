#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace tbem {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 &operator+=(const Vec2 &o) { x += o.x; y += o.y; return *this; }
    Vec2 &operator-=(const Vec2 &o) { x -= o.x; y -= o.y; return *this; }
};

inline Vec2 operator+(Vec2 a, const Vec2 &b) { return a += b; }
inline Vec2 operator-(Vec2 a, const Vec2 &b) { return a -= b; }
inline Vec2 operator*(double s, const Vec2 &a) { return {s * a.x, s * a.y}; }
inline double dot(const Vec2 &a, const Vec2 &b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2 &a, const Vec2 &b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2 &a) { return std::hypot(a.x, a.y); }

constexpr double kTwoPi = 6.283185307179586476925286766559;

class GeometryError : public std::runtime_error {
public:
    GeometryError(const std::string &what, std::ptrdiff_t index = -1)
        : std::runtime_error(what), index_(index) {}
    /// Offending node index, or -1 when not node-specific.
    std::ptrdiff_t index() const { return index_; }

private:
    std::ptrdiff_t index_;
};

/// Smooth closed 2*pi-periodic planar curve given by position and velocity maps.
class ParametricCurve {
public:
    using PointFn = std::function<Vec2(double)>;

    ParametricCurve(PointFn position, PointFn velocity, std::string label = "curve");

    static ParametricCurve circle(double radius, Vec2 center = {});
    static ParametricCurve ellipse(double semi_x, double semi_y, Vec2 center = {});
    /// Star r(t) = radius * (1 + amplitude * cos(frequency * t)).
    static ParametricCurve star(double radius, double amplitude, int frequency, Vec2 center = {});

    Vec2 position(double t) const { return position_(t); }
    Vec2 velocity(double t) const { return velocity_(t); }
    /// Second derivative by an eighth-order centered difference of the velocity.
    Vec2 acceleration(double t) const;

    /// Same point set traversed backwards: t -> -t.
    ParametricCurve reversed() const;

    const std::string &label() const { return label_; }

private:
    PointFn position_;
    PointFn velocity_;
    std::string label_;
};

/// Signed area of the polygon through `n` equispaced samples (positive for counterclockwise).
double signed_area(const ParametricCurve &curve, std::size_t n = 256);

/// Returns the curve oriented counterclockwise; sets `warning` when it had to be reversed.
ParametricCurve orient_counterclockwise(const ParametricCurve &curve, std::string *warning = nullptr);

/// Nodes, outward normals and arclength trapezoid weights of a curve at t_j = 2*pi*j/N.
struct DiscreteBoundary {
    std::shared_ptr<const ParametricCurve> curve;
    std::vector<double> params;
    std::vector<Vec2> nodes;
    std::vector<Vec2> velocities;
    std::vector<double> speeds;
    std::vector<Vec2> normals;
    std::vector<double> weights;
    std::vector<double> curvature;

    std::size_t size() const { return nodes.size(); }
    double length() const;
    /// Largest distance between consecutive nodes.
    double mesh_width() const;
};

DiscreteBoundary discretize(const ParametricCurve &curve, std::size_t n);

/// Winding-number test against the polygon through the boundary nodes.
bool inside_polygon(const DiscreteBoundary &boundary, const Vec2 &p);

/// Distance from p to the polygon through the boundary nodes.
double distance_to_polygon(const DiscreteBoundary &boundary, const Vec2 &p);

/// Shape map phi(gamma(t)) = gamma(t) + displacement(t) of the reference inner curve.
class ShapeMap {
public:
    using VectorFn = std::function<Vec2(double)>;

    ShapeMap(ParametricCurve base, VectorFn displacement, VectorFn displacement_rate);

    static ShapeMap identity(const ParametricCurve &base);
    /// phi = factor * id about the origin.
    static ShapeMap dilation(const ParametricCurve &base, double factor);

    const ParametricCurve &base() const { return base_; }
    Vec2 displacement(double t) const { return displacement_(t); }
    Vec2 displacement_rate(double t) const { return displacement_rate_(t); }

    /// The perturbed curve t -> phi(gamma(t)).
    ParametricCurve image() const;

private:
    ParametricCurve base_;
    VectorFn displacement_;
    VectorFn displacement_rate_;
};

/// Ratio of image speed to base speed at the N reference nodes.
std::vector<double> sigma_tilde(const ShapeMap &phi, std::size_t n);

struct ShapeReport {
    bool injective = false;
    double injectivity_margin = 0.0;   ///< min pairwise image distance / image length
    bool immersed = false;
    double immersion_margin = 0.0;     ///< min image speed
    bool contained = false;
    double containment_margin = 0.0;   ///< min distance from image nodes to outer nodes
    bool orientation_preserved = false;
    bool valid = false;

    std::string summary() const;
};

ShapeReport validate_shape(const ShapeMap &phi, const DiscreteBoundary &outer, std::size_t n);

}  // namespace tbem
