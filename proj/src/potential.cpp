#include "tbem/potential.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace tbem {

namespace {

constexpr double kPi = std::numbers::pi;

// Weights of the periodic quadrature for int log(4 sin^2((t - s)/2)) f(s) ds on 2n
// equispaced nodes, indexed by the node offset d = |i - j|.
std::vector<double> log_weights(std::size_t n_nodes)
{
    const std::size_t n = n_nodes / 2;
    const double dt = kTwoPi / static_cast<double>(n_nodes);
    std::vector<double> r(n_nodes);
    for (std::size_t d = 0; d < n_nodes; ++d) {
        double sum = 0.0;
        for (std::size_t m = 1; m < n; ++m)
            sum += std::cos(static_cast<double>(m * d) * dt) / static_cast<double>(m);
        const double nyquist = (d % 2 == 0) ? 1.0 : -1.0;
        r[d] = -(4.0 * kPi / static_cast<double>(n_nodes)) * sum
               - (4.0 * kPi / static_cast<double>(n_nodes * n_nodes)) * nyquist;
    }
    return r;
}

// Smooth remainder log(|x_i - x_j|^2 / (4 sin^2((t_i - t_j)/2))) / (4 pi).
double log_remainder(const DiscreteBoundary &b, std::size_t i, std::size_t j)
{
    if (i == j)
        return std::log(b.speeds[i] * b.speeds[i]) / (4.0 * kPi);
    const Vec2 d = b.nodes[i] - b.nodes[j];
    const double s = std::sin(0.5 * (b.params[i] - b.params[j]));
    return std::log(dot(d, d) / (4.0 * s * s)) / (4.0 * kPi);
}

double wstar_entry(const DiscreteBoundary &b, std::size_t i, std::size_t j)
{
    if (i == j)
        return b.curvature[i] / (4.0 * kPi) * b.weights[i];
    const Vec2 d = b.nodes[i] - b.nodes[j];
    return dot(b.normals[i], d) / (kTwoPi * dot(d, d)) * b.weights[j];
}

struct NearCheck {
    bool near = false;
    double min_distance = 0.0;
};

NearCheck check_near(const DiscreteBoundary &b, const Vec2 &x)
{
    double dmin = std::numeric_limits<double>::infinity();
    for (const Vec2 &y : b.nodes)
        dmin = std::min(dmin, norm(x - y));
    return {dmin <= 3.0 * b.mesh_width(), dmin};
}

double sum_single_layer(const DiscreteBoundary &b, const Vector &mu, const Vec2 &x)
{
    double v = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
        const Vec2 d = x - b.nodes[j];
        v += std::log(dot(d, d)) * mu[static_cast<Eigen::Index>(j)] * b.weights[j];
    }
    return v / (4.0 * kPi);
}

Vec2 sum_grad_single_layer(const DiscreteBoundary &b, const Vector &mu, const Vec2 &x)
{
    Vec2 g{};
    for (std::size_t j = 0; j < b.size(); ++j) {
        const Vec2 d = x - b.nodes[j];
        g += (mu[static_cast<Eigen::Index>(j)] * b.weights[j] / dot(d, d)) * d;
    }
    return (1.0 / kTwoPi) * g;
}

void check_size(const DiscreteBoundary &b, const Vector &mu)
{
    if (static_cast<std::size_t>(mu.size()) != b.size())
        throw std::invalid_argument("density size " + std::to_string(mu.size())
                                    + " does not match boundary node count " + std::to_string(b.size()));
}

}  // namespace

double fundamental_solution(std::span<const double> x)
{
    const std::size_t n = x.size();
    if (n < 2)
        throw std::domain_error("fundamental solution needs dimension >= 2");
    double r2 = 0.0;
    for (double c : x)
        r2 += c * c;
    if (r2 == 0.0)
        throw std::domain_error("fundamental solution is singular at the origin");
    if (n == 2)
        return std::log(r2) / (4.0 * kPi);
    // measure of the unit sphere in R^n: 2 pi^(n/2) / Gamma(n/2)
    const double half = 0.5 * static_cast<double>(n);
    const double sphere = 2.0 * std::pow(kPi, half) / std::tgamma(half);
    const double r = std::sqrt(r2);
    return std::pow(r, 2.0 - static_cast<double>(n)) / ((2.0 - static_cast<double>(n)) * sphere);
}

double weighted_integral(const DiscreteBoundary &b, const Vector &values)
{
    check_size(b, values);
    double sum = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j)
        sum += b.weights[j] * values[static_cast<Eigen::Index>(j)];
    return sum;
}

bool is_mean_zero(const DiscreteBoundary &b, const Vector &values, double tol)
{
    const double scale = b.length() * (values.size() ? values.cwiseAbs().maxCoeff() : 0.0);
    return std::abs(weighted_integral(b, values)) <= tol * scale;
}

FieldValue eval_single_layer(const DiscreteBoundary &b, const Vector &mu, const Vec2 &x, NearEvaluation mode)
{
    check_size(b, mu);
    const NearCheck near = check_near(b, x);
    if (mode == NearEvaluation::Upsample && near.min_distance <= 6.0 * b.mesh_width() && b.curve) {
        const DiscreteBoundary fine = discretize(*b.curve, 4 * b.size());
        return {sum_single_layer(fine, trig_interpolate(mu, fine.size()), x), near.near};
    }
    return {sum_single_layer(b, mu, x), near.near};
}

FieldGradient grad_single_layer(const DiscreteBoundary &b, const Vector &mu, const Vec2 &x, NearEvaluation mode)
{
    check_size(b, mu);
    const NearCheck near = check_near(b, x);
    if (mode == NearEvaluation::Upsample && near.min_distance <= 6.0 * b.mesh_width() && b.curve) {
        const DiscreteBoundary fine = discretize(*b.curve, 4 * b.size());
        return {sum_grad_single_layer(fine, trig_interpolate(mu, fine.size()), x), near.near};
    }
    return {sum_grad_single_layer(b, mu, x), near.near};
}

Vector trace_V(const DiscreteBoundary &b, const Vector &mu)
{
    check_size(b, mu);
    const std::size_t n = b.size();
    const std::vector<double> r = log_weights(n);
    const double dt = kTwoPi / static_cast<double>(n);
    Vector out(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t d = i > j ? i - j : j - i;
            acc += (r[d] / (4.0 * kPi) + dt * log_remainder(b, i, j)) * b.speeds[j]
                   * mu[static_cast<Eigen::Index>(j)];
        }
        out[static_cast<Eigen::Index>(i)] = acc;
    }
    return out;
}

Vector apply_Wstar(const DiscreteBoundary &b, const Vector &mu)
{
    check_size(b, mu);
    const std::size_t n = b.size();
    Vector out(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            acc += wstar_entry(b, i, j) * mu[static_cast<Eigen::Index>(j)];
        out[static_cast<Eigen::Index>(i)] = acc;
    }
    return out;
}

Vector normal_derivative(Side side, const DiscreteBoundary &b, const Vector &mu)
{
    const double jump = side == Side::Interior ? -0.5 : 0.5;
    return jump * mu + apply_Wstar(b, mu);
}

Matrix single_layer_matrix(const DiscreteBoundary &b)
{
    const std::size_t n = b.size();
    const std::vector<double> r = log_weights(n);
    const double dt = kTwoPi / static_cast<double>(n);
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t d = i > j ? i - j : j - i;
            m(i, j) = (r[d] / (4.0 * kPi) + dt * log_remainder(b, i, j)) * b.speeds[j];
        }
    return m;
}

Matrix adjoint_double_layer_matrix(const DiscreteBoundary &b)
{
    const std::size_t n = b.size();
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m(i, j) = wstar_entry(b, i, j);
    return m;
}

Matrix cross_single_layer_matrix(const DiscreteBoundary &target, const DiscreteBoundary &source)
{
    Matrix m(target.size(), source.size());
    for (std::size_t i = 0; i < target.size(); ++i)
        for (std::size_t j = 0; j < source.size(); ++j) {
            const Vec2 d = target.nodes[i] - source.nodes[j];
            m(i, j) = std::log(dot(d, d)) / (4.0 * kPi) * source.weights[j];
        }
    return m;
}

Matrix cross_normal_derivative_matrix(const DiscreteBoundary &target, const DiscreteBoundary &source)
{
    Matrix m(target.size(), source.size());
    for (std::size_t i = 0; i < target.size(); ++i)
        for (std::size_t j = 0; j < source.size(); ++j) {
            const Vec2 d = target.nodes[i] - source.nodes[j];
            m(i, j) = dot(target.normals[i], d) / (kTwoPi * dot(d, d)) * source.weights[j];
        }
    return m;
}

Vector trig_interpolate(const Vector &values, std::size_t m)
{
    const std::size_t n = static_cast<std::size_t>(values.size());
    if (n == 0 || n % 2 != 0 || m < n)
        throw std::invalid_argument("trig_interpolate needs an even, non-empty input and m >= n");
    const std::size_t half = n / 2;
    const double dt = kTwoPi / static_cast<double>(n);

    std::vector<double> a(half + 1, 0.0), b(half + 1, 0.0);
    for (std::size_t k = 0; k <= half; ++k)
        for (std::size_t j = 0; j < n; ++j) {
            const double arg = static_cast<double>(k * j) * dt;
            a[k] += values[static_cast<Eigen::Index>(j)] * std::cos(arg);
            b[k] += values[static_cast<Eigen::Index>(j)] * std::sin(arg);
        }
    for (std::size_t k = 0; k <= half; ++k) {
        a[k] *= 2.0 / static_cast<double>(n);
        b[k] *= 2.0 / static_cast<double>(n);
    }

    Vector out(static_cast<Eigen::Index>(m));
    const double ds = kTwoPi / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double t = ds * static_cast<double>(i);
        double v = 0.5 * a[0] + 0.5 * a[half] * std::cos(static_cast<double>(half) * t);
        for (std::size_t k = 1; k < half; ++k)
            v += a[k] * std::cos(static_cast<double>(k) * t) + b[k] * std::sin(static_cast<double>(k) * t);
        out[static_cast<Eigen::Index>(i)] = v;
    }
    return out;
}

}  // namespace tbem
