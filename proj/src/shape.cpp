#include "tbem/shape.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace tbem {

namespace {

std::array<double, 6> shape_args(const ParametricCurve &base, double t, double s)
{
    const Vec2 x = base.position(t);
    const Vec2 v = base.velocity(t);
    return {t, s, x.x, x.y, v.x, v.y};
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// second-order central difference of order k at centre i with stride `step` grid cells
std::optional<double> central_difference(const std::vector<double> &f, std::size_t i, int k, std::size_t step,
                                         double h)
{
    const std::size_t reach = (k <= 2 ? 1 : 2) * step;
    if (i < reach || i + reach >= f.size())
        return std::nullopt;
    const auto sh = [&](int m) {
        return m >= 0 ? f[i + static_cast<std::size_t>(m) * step] : f[i - static_cast<std::size_t>(-m) * step];
    };
    const double H = h * static_cast<double>(step);
    switch (k) {
    case 1: return (sh(1) - sh(-1)) / (2.0 * H);
    case 2: return (sh(1) - 2.0 * sh(0) + sh(-1)) / (H * H);
    case 3: return (sh(2) - 2.0 * sh(1) + 2.0 * sh(-1) - sh(-2)) / (2.0 * H * H * H);
    case 4: return (sh(2) - 4.0 * sh(1) + 6.0 * sh(0) - 4.0 * sh(-1) + sh(-2)) / (H * H * H * H);
    default: return std::nullopt;
    }
}

}  // namespace

ShapeFamily::ShapeFamily(ParametricCurve base, Expression dx, Expression dy, Expression dx_dt, Expression dy_dt)
    : base_(std::move(base)), dx_(std::move(dx)), dy_(std::move(dy)), dx_dt_(std::move(dx_dt)),
      dy_dt_(std::move(dy_dt))
{
    for (int j = 0; j < 16; ++j) {
        const auto a = shape_args(base_, kTwoPi * j / 16.0, 0.0);
        const double worst = std::max({std::abs(dx_.evaluate(a)), std::abs(dy_.evaluate(a)),
                                       std::abs(dx_dt_.evaluate(a)), std::abs(dy_dt_.evaluate(a))});
        if (!(worst <= 1e-14))
            throw InvalidShapeError("shape family does not reduce to the identity at s = 0");
    }
}

ShapeFamily ShapeFamily::parse(ParametricCurve base, const std::string &dx, const std::string &dy,
                               const std::string &dx_dt, const std::string &dy_dt)
{
    return ShapeFamily(std::move(base), Expression::parse(dx, kShapeVariables),
                       Expression::parse(dy, kShapeVariables), Expression::parse(dx_dt, kShapeVariables),
                       Expression::parse(dy_dt, kShapeVariables));
}

ShapeFamily ShapeFamily::dilation(ParametricCurve base)
{
    return parse(std::move(base), "s*x1", "s*x2", "s*v1", "s*v2");
}

ShapeFamily ShapeFamily::trefoil(ParametricCurve base)
{
    return parse(std::move(base), "s*cos(3*t)*cos(t)", "s*cos(3*t)*sin(t)",
                 "-s*(3*sin(3*t)*cos(t) + cos(3*t)*sin(t))", "s*(cos(3*t)*cos(t) - 3*sin(3*t)*sin(t))");
}

ShapeMap ShapeFamily::at(double s) const
{
    const ParametricCurve base = base_;
    const Expression dx = dx_, dy = dy_, dxt = dx_dt_, dyt = dy_dt_;
    return ShapeMap(
        base_,
        [base, dx, dy, s](double t) {
            const auto a = shape_args(base, t, s);
            return Vec2{dx.evaluate(a), dy.evaluate(a)};
        },
        [base, dxt, dyt, s](double t) {
            const auto a = shape_args(base, t, s);
            return Vec2{dxt.evaluate(a), dyt.evaluate(a)};
        });
}

std::vector<Vec2> reference_points(const ParametricCurve &base, std::size_t n)
{
    std::vector<Vec2> pts(n);
    for (std::size_t j = 0; j < n; ++j)
        pts[j] = base.position(kTwoPi * static_cast<double>(j) / static_cast<double>(n));
    return pts;
}

TransmissionSystem perturbed_system(const ShapeMap &phi, const DiscreteBoundary &outer, std::size_t n,
                                    const TransmissionData &data)
{
    const ShapeReport report = validate_shape(phi, outer, n);
    if (!report.valid)
        throw InvalidShapeError("invalid shape: " + report.summary());
    return TransmissionSystem(outer, discretize(phi.image(), n), reference_points(phi.base(), n), data);
}

BoundaryTriple residual_M(const ShapeMap &phi, const DiscreteBoundary &outer, const DensitySet &x,
                          const TransmissionData &data)
{
    return perturbed_system(phi, outer, x.n_inner(), data).residual(x);
}

SolveResult solve_at_shape(const ShapeMap &phi, const DiscreteBoundary &outer, const DensitySet &guess,
                           const TransmissionData &data, double tol, int max_iter)
{
    const TransmissionSystem system = perturbed_system(phi, outer, guess.n_inner(), data);
    SolverOptions opts;
    opts.method = SolveMethod::Newton;
    opts.tol = tol;
    opts.max_iter = max_iter;
    return solve_system(system, guess, opts);
}

bool probes_contained(const ProbeSet &probes, const DiscreteBoundary &outer, const DiscreteBoundary &inner)
{
    const double band = std::max(outer.mesh_width(), inner.mesh_width());
    for (const Vec2 &p : probes.interior)
        if (!inside_polygon(inner, p) || distance_to_polygon(inner, p) < band)
            return false;
    for (const Vec2 &p : probes.exterior)
        if (!inside_polygon(outer, p) || inside_polygon(inner, p) || distance_to_polygon(inner, p) < band
            || distance_to_polygon(outer, p) < band)
            return false;
    return true;
}

std::vector<double> probe_values(const HarmonicPair &pair, const ProbeSet &probes)
{
    std::vector<double> out;
    out.reserve(probes.size());
    for (const Vec2 &p : probes.interior)
        out.push_back(pair.u_inner(p));
    for (const Vec2 &p : probes.exterior)
        out.push_back(pair.u_outer(p));
    return out;
}

Branch continue_branch(const ShapeFamily &family, const DiscreteBoundary &outer, std::size_t n,
                       const TransmissionData &data, const DensitySet &start, const ProbeSet &probes,
                       const BranchOptions &options)
{
    if (start.n_inner() != n || start.n_outer() != outer.size())
        throw std::invalid_argument("start densities do not match the discretization");
    Branch branch;

    // corrector at s from a predicted guess; fills `pt` or returns an error message
    const auto correct = [&](double s, const DensitySet &guess, BranchPoint &pt) -> std::optional<std::string> {
        try {
            const ShapeMap phi = family.at(s);
            const TransmissionSystem system = perturbed_system(phi, outer, n, data);
            if (!probes_contained(probes, outer, *system.blocks().inner))
                return std::string("probe points not contained at s = ") + std::to_string(s);
            SolverOptions opts;
            opts.method = SolveMethod::Newton;
            opts.tol = options.tol;
            opts.max_iter = options.max_newton;
            SolveResult r = solve_system(system, guess, opts);
            pt.s = s;
            pt.residual_norm = r.residual;
            pt.newton_steps = r.newton_steps;
            pt.probe_values = probe_values(HarmonicPair(r.densities, outer, *system.blocks().inner), probes);
            pt.densities = std::move(r.densities);
            return std::nullopt;
        } catch (const std::exception &e) {
            return std::string(e.what());
        }
    };

    const auto predict = [&](double fraction) {
        const auto &pts = branch.points;
        if (options.predictor_order < 1 || pts.size() < 2)
            return pts.back().densities;
        const Vector a = pts[pts.size() - 2].densities.pack();
        const Vector b = pts.back().densities.pack();
        return DensitySet::unpack(b + fraction * (b - a), outer.size(), n);
    };

    BranchPoint first;
    if (auto err = correct(0.0, start, first)) {
        branch.failed_s = 0.0;
        branch.error = *err;
        return branch;
    }
    branch.points.push_back(std::move(first));

    const double h = options.steps > 0 ? options.s_max / static_cast<double>(options.steps) : 0.0;
    for (std::size_t k = 1; k <= options.steps; ++k) {
        const double s = h * static_cast<double>(k);
        BranchPoint pt;
        auto err = correct(s, predict(1.0), pt);
        if (err) {
            // bisect once: half step, then the remaining half from there
            BranchPoint half;
            const double s_half = s - 0.5 * h;
            auto err_half = correct(s_half, predict(0.5), half);
            if (!err_half) {
                const Vector a = branch.points.back().densities.pack();
                const Vector b = half.densities.pack();
                err = correct(s, DensitySet::unpack(b + (b - a), outer.size(), n), pt);
            } else {
                err = err_half;
            }
        }
        if (err) {
            branch.failed_s = s;
            branch.error = *err;
            return branch;
        }
        branch.points.push_back(std::move(pt));
    }
    branch.complete = true;
    return branch;
}

SmoothnessReport smoothness_probe(const std::vector<double> &s, const std::vector<double> &values, int max_order,
                                  double stabilize_rel, double stabilize_floor)
{
    if (max_order < 1 || max_order > 4)
        throw std::invalid_argument("max_order must lie in 1..4");
    if (s.size() != values.size())
        throw std::invalid_argument("parameter and value series differ in length");
    if (values.size() < static_cast<std::size_t>(2 * max_order + 1))
        throw GridTooShortError("branch has " + std::to_string(values.size()) + " points, order "
                                + std::to_string(max_order) + " needs at least "
                                + std::to_string(2 * max_order + 1));
    const double h = s[1] - s[0];
    for (std::size_t i = 1; i < s.size(); ++i)
        if (std::abs((s[i] - s[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw std::invalid_argument("branch is not on a uniform grid");

    SmoothnessReport report;
    for (int k = 1; k <= max_order; ++k) {
        std::vector<double> ratios;
        bool stable = true;
        bool any = false;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const auto dh = central_difference(values, i, k, 1, h);
            const auto d2h = central_difference(values, i, k, 2, h);
            if (!dh || !d2h)
                continue;
            any = true;
            DerivativeEstimate e;
            e.order = k;
            e.index = i;
            e.s = s[i];
            e.d_h = *dh;
            e.d_2h = *d2h;
            e.d_4h = central_difference(values, i, k, 4, h);
            if (e.d_4h && e.d_h != e.d_2h) {
                e.richardson = (e.d_2h - *e.d_4h) / (e.d_h - e.d_2h);
                ratios.push_back(*e.richardson);
            }
            stable = stable && std::abs(e.d_h - e.d_2h) <= stabilize_rel * (std::abs(e.d_h) + stabilize_floor);
            report.estimates.push_back(e);
        }
        if (!any)
            throw GridTooShortError("no interior centre for derivative order " + std::to_string(k));
        report.median_ratio.push_back(ratios.empty() ? std::nullopt : std::optional<double>(median(ratios)));
        report.stabilized.push_back(stable);
    }
    return report;
}

SmoothnessReport smoothness_probe(const std::vector<BranchPoint> &branch, std::size_t probe_index, int max_order,
                                  double stabilize_rel, double stabilize_floor)
{
    std::vector<double> s, v;
    for (const BranchPoint &p : branch) {
        if (probe_index >= p.probe_values.size())
            throw std::out_of_range("probe index out of range");
        s.push_back(p.s);
        v.push_back(p.probe_values[probe_index]);
    }
    return smoothness_probe(s, v, max_order, stabilize_rel, stabilize_floor);
}

}  // namespace tbem
