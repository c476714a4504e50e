#include "tbem/nonlinear.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

namespace tbem {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

bool all_finite(const DensitySet &x) { return x.pack().allFinite(); }

}  // namespace

TransmissionData TransmissionData::parse(const std::string &f1, const std::string &f2, const std::string &df1_dz1,
                                         const std::string &df1_dz2, const std::string &df2_dz1,
                                         const std::string &df2_dz2, const std::string &f_o)
{
    TransmissionData d;
    d.F1 = Expression::parse(f1, kTransmissionVariables);
    d.F2 = Expression::parse(f2, kTransmissionVariables);
    d.dF1_dz1 = Expression::parse(df1_dz1, kTransmissionVariables);
    d.dF1_dz2 = Expression::parse(df1_dz2, kTransmissionVariables);
    d.dF2_dz1 = Expression::parse(df2_dz1, kTransmissionVariables);
    d.dF2_dz2 = Expression::parse(df2_dz2, kTransmissionVariables);
    d.f_o = Expression::parse(f_o, kDatumVariables);
    return d;
}

DerivativeCheck validate_derivatives(const TransmissionData &data, std::uint64_t seed, std::size_t samples,
                                     double tolerance)
{
    struct Entry {
        const Expression *parent;
        const Expression *derivative;
        std::size_t slot;
        const char *name;
    };
    const std::array<Entry, 4> entries{{{&data.F1, &data.dF1_dz1, 2, "dF1_dz1"},
                                        {&data.F1, &data.dF1_dz2, 3, "dF1_dz2"},
                                        {&data.F2, &data.dF2_dz1, 2, "dF2_dz1"},
                                        {&data.F2, &data.dF2_dz2, 3, "dF2_dz2"}}};

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    DerivativeCheck check;
    for (std::size_t s = 0; s < samples; ++s) {
        std::array<double, 4> p{dist(rng), dist(rng), dist(rng), dist(rng)};
        for (const Entry &e : entries) {
            const double d = e.derivative->evaluate(p);
            const double h = 1e-5 * (1.0 + std::abs(p[e.slot]));
            std::array<double, 4> lo = p, hi = p;
            lo[e.slot] -= h;
            hi[e.slot] += h;
            const double fd = (e.parent->evaluate(hi) - e.parent->evaluate(lo)) / (2.0 * h);
            // skip samples where the parent is not finite (outside its domain)
            if (!std::isfinite(fd))
                continue;
            double err = std::abs(d - fd) / (1.0 + std::abs(d));
            if (!std::isfinite(d))
                err = std::numeric_limits<double>::infinity();
            if (check.worst.empty() || err > check.worst_error) {
                check.worst_error = err;
                check.worst = e.name;
            }
        }
    }
    check.ok = check.worst_error <= tolerance;
    return check;
}

Vector nemytskii_apply(const Expression &F, std::span<const Vec2> points, const Vector &h1, const Vector &h2)
{
    const std::size_t n = points.size();
    if (static_cast<std::size_t>(h1.size()) != n || static_cast<std::size_t>(h2.size()) != n)
        throw std::invalid_argument("traces and evaluation points differ in length");
    Vector out(idx(n));
    for (std::size_t j = 0; j < n; ++j) {
        const std::array<double, 4> v{points[j].x, points[j].y, h1[idx(j)], h2[idx(j)]};
        out[idx(j)] = F.evaluate(v);
        if (!std::isfinite(out[idx(j)]))
            throw NonlinearError("'" + F.source() + "' is not finite at node " + std::to_string(j), idx(j));
    }
    return out;
}

MatrixField linearization_matrix(const TransmissionData &data, std::span<const Vec2> points, const Vector &alpha1,
                                 const Vector &alpha2)
{
    return {nemytskii_apply(data.dF1_dz1, points, alpha1, alpha2),
            nemytskii_apply(data.dF1_dz2, points, alpha1, alpha2),
            nemytskii_apply(data.dF2_dz1, points, alpha1, alpha2),
            nemytskii_apply(data.dF2_dz2, points, alpha1, alpha2)};
}

GrowthReport check_growth(const TransmissionData &data, const MatrixField &a, std::span<const Vec2> points,
                          double sample_radius)
{
    if (!(sample_radius > 0.0))
        throw std::invalid_argument("sample radius must be positive");
    if (a.size() != points.size())
        throw std::invalid_argument("matrix field and points differ in length");

    constexpr int shells = 40;
    constexpr int directions = 16;
    const double top = std::max(sample_radius, 1.0 + 1e-9);

    // envelope per shell: largest residual and its (1 + |z1| + |z2|)
    std::vector<double> xs, ys;
    GrowthReport report;
    for (int m = 0; m <= shells; ++m) {
        const double r = std::pow(top, static_cast<double>(m) / shells);
        double worst = 0.0;
        double at = 1.0 + r;
        for (int k = 0; k < directions; ++k) {
            const double th = kTwoPi * k / directions;
            const double z1 = r * std::cos(th), z2 = r * std::sin(th);
            for (std::size_t j = 0; j < points.size(); ++j) {
                const std::array<double, 4> v{points[j].x, points[j].y, z1, z2};
                const Eigen::Index jj = idx(j);
                const double r1 = data.F1.evaluate(v) - (a.a11[jj] * z1 + a.a12[jj] * z2);
                const double r2 = data.F2.evaluate(v) - (a.a21[jj] * z1 + a.a22[jj] * z2);
                const double res = std::hypot(r1, r2);
                if (!std::isfinite(res)) {
                    report.note = "heuristic evidence only; F not finite on the sample grid";
                    report.slope = std::numeric_limits<double>::infinity();
                    report.max_residual = std::numeric_limits<double>::infinity();
                    return report;
                }
                if (res > worst) {
                    worst = res;
                    at = 1.0 + std::abs(z1) + std::abs(z2);
                }
            }
        }
        report.max_residual = std::max(report.max_residual, worst);
        if (2 * m >= shells) {
            xs.push_back(std::log(at));
            ys.push_back(std::log(std::max(worst, 1e-300)));
        }
    }

    if (report.max_residual <= 1e-13) {
        report.slope = 0.0;
        report.intercept = 0.0;
        report.passes = true;
        return report;
    }

    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double den = n * sxx - sx * sx;
    report.slope = den > 0 ? (n * sxy - sx * sy) / den : 0.0;
    report.intercept = std::exp((sy - report.slope * sx) / n);
    report.passes = report.slope < 1.0 - 0.05;
    return report;
}

TransmissionSystem::TransmissionSystem(const DiscreteBoundary &outer, const DiscreteBoundary &inner,
                                       std::vector<Vec2> reference_points, TransmissionData data)
    : blocks_(SystemBlocks::build(outer, inner)), reference_points_(std::move(reference_points)),
      data_(std::move(data))
{
    if (reference_points_.size() != inner.size())
        throw std::invalid_argument("reference points do not match the inner nodes");
    outer_datum_.resize(idx(outer.size()));
    for (std::size_t j = 0; j < outer.size(); ++j) {
        outer_datum_[idx(j)] = data_.f_o({outer.nodes[j].x, outer.nodes[j].y});
        if (!std::isfinite(outer_datum_[idx(j)]))
            throw NonlinearError("outer datum is not finite at node " + std::to_string(j), idx(j));
    }
}

BoundaryTriple TransmissionSystem::residual(const DensitySet &x) const
{
    BoundaryTriple r = blocks_.apply_linear(x);
    const auto [a1, a2] = blocks_.traces(x);
    r.outer -= outer_datum_;
    r.first -= nemytskii_apply(data_.F1, reference_points_, a1, a2);
    r.second -= nemytskii_apply(data_.F2, reference_points_, a1, a2);
    return r;
}

MatrixField TransmissionSystem::linearization(const DensitySet &x) const
{
    const auto [a1, a2] = blocks_.traces(x);
    return linearization_matrix(data_, reference_points_, a1, a2);
}

BlockOperator TransmissionSystem::jacobian(const DensitySet &x) const
{
    return assemble_JA(blocks_, linearization(x));
}

PicardOperator::PicardOperator(const TransmissionSystem &system, MatrixField a)
    : system_(&system), a_(std::move(a)), op_(assemble_JA(system.blocks(), a_)), lu_(op_)
{
}

DensitySet PicardOperator::apply(const DensitySet &x) const
{
    const auto [a1, a2] = system_->blocks().traces(x);
    const auto points = system_->reference_points();
    const TransmissionData &d = system_->data();
    BoundaryTriple rhs;
    rhs.outer = system_->outer_datum();
    rhs.first = nemytskii_apply(d.F1, points, a1, a2) - (a_.a11.cwiseProduct(a1) + a_.a12.cwiseProduct(a2));
    rhs.second = nemytskii_apply(d.F2, points, a1, a2) - (a_.a21.cwiseProduct(a1) + a_.a22.cwiseProduct(a2));
    return lu_.solve(rhs);
}

DensitySet picard_step(const DensitySet &state, const PicardOperator &picard, double damping)
{
    DensitySet next = picard.apply(state);
    if (damping == 1.0)
        return next;
    const Vector mixed = (1.0 - damping) * state.pack() + damping * next.pack();
    return DensitySet::unpack(mixed, state.n_outer(), state.n_inner());
}

MatrixField default_picard_matrix(const TransmissionSystem &system)
{
    const std::size_t n = system.n_inner();
    const DiscreteBoundary &inner = *system.blocks().inner;
    std::vector<MatrixField> candidates;
    try {
        candidates.push_back(system.linearization(DensitySet::zeros(system.n_outer(), n)));
    } catch (const NonlinearError &) {
    }
    candidates.push_back(MatrixField::constant(n, 1.0, 0.0, 0.0, -1.0));

    // first admissible candidate with sublinear F - A z, else the first admissible one
    std::optional<MatrixField> fallback;
    for (const MatrixField &a : candidates) {
        if (!check_A_conditions(a, inner).admissible())
            continue;
        if (check_growth(system.data(), a, system.reference_points(), 1e3).passes)
            return a;
        if (!fallback)
            fallback = a;
    }
    return fallback ? *fallback : candidates.back();
}

SolveResult solve_system(const TransmissionSystem &system, const DensitySet &guess, const SolverOptions &options)
{
    if (!(options.damping > 0.0 && options.damping <= 1.0))
        throw std::invalid_argument("damping must lie in (0, 1]");

    SolveResult out;
    DensitySet x = guess;
    std::vector<IterationRecord> &trace = out.trace;

    const auto fail = [&](const std::string &why) -> NonConvergenceError {
        return NonConvergenceError(why, trace, x);
    };

    try {
        double res = system.residual(x).max_abs();
        trace.push_back({0, "start", res, 0.0});
        if (res <= options.tol) {
            out.densities = x;
            out.residual = res;
            return out;
        }

        bool newton = options.method == SolveMethod::Newton;
        std::optional<PicardOperator> picard;
        if (!newton)
            picard.emplace(system, options.picard_matrix ? *options.picard_matrix : default_picard_matrix(system));

        for (int it = 1; it <= options.max_iter; ++it) {
            DensitySet next;
            if (newton) {
                const BoundaryTriple m = system.residual(x);
                const auto [c_o, c_i] = system.blocks().constraints(x);
                std::optional<FactorizedOperator> lu;
                try {
                    lu.emplace(system.jacobian(x));
                } catch (const SingularSystemError &e) {
                    throw SingularJacobianError(std::string("singular Newton Jacobian: ") + e.what(), trace, x);
                }
                BoundaryTriple rhs{-m.outer, -m.first, -m.second};
                const DensitySet delta = lu->solve(rhs, -c_o, -c_i);
                next = DensitySet::unpack(x.pack() + delta.pack(), x.n_outer(), x.n_inner());
                ++out.newton_steps;
            } else {
                next = picard_step(x, *picard, options.damping);
                ++out.picard_steps;
            }
            const double step = max_abs_diff(next, x);
            x = std::move(next);
            if (!all_finite(x))
                throw fail("iterate became non-finite at iteration " + std::to_string(it));
            res = system.residual(x).max_abs();
            trace.push_back({it, newton ? "newton" : "picard", res, step});
            if (!std::isfinite(res))
                throw fail("residual became non-finite at iteration " + std::to_string(it));
            if (res <= options.tol) {
                out.densities = x;
                out.residual = res;
                return out;
            }
            if (!newton && options.method == SolveMethod::Hybrid && step < options.switch_tol)
                newton = true;
        }
    } catch (const NonlinearError &e) {
        throw fail(std::string("evaluation failed: ") + e.what());
    }
    throw fail("no convergence within " + std::to_string(options.max_iter) + " iterations (residual "
               + std::to_string(trace.back().residual) + ")");
}

SolveResult solve_unperturbed(const TransmissionData &data, const DiscreteBoundary &outer,
                              const DiscreteBoundary &inner, const SolverOptions &options)
{
    const TransmissionSystem system(outer, inner, inner.nodes, data);
    return solve_system(system, DensitySet::zeros(outer.size(), inner.size()), options);
}

HarmonicPair::HarmonicPair(DensitySet densities, const DiscreteBoundary &outer, const DiscreteBoundary &inner)
    : densities_(std::move(densities)), outer_(std::make_shared<const DiscreteBoundary>(outer)),
      inner_(std::make_shared<const DiscreteBoundary>(inner))
{
    if (densities_.n_outer() != outer.size() || densities_.n_inner() != inner.size())
        throw std::invalid_argument("densities do not match the boundaries");
}

Region HarmonicPair::region(const Vec2 &x) const
{
    if (!inside_polygon(*outer_, x))
        return Region::Outside;
    return inside_polygon(*inner_, x) ? Region::Inner : Region::Outer;
}

double HarmonicPair::u_outer(const Vec2 &x) const
{
    const Region r = region(x);
    if (r != Region::Outer)
        throw DomainError(r == Region::Inner ? "point lies in the inclusion, not the outer region"
                                             : "point lies outside the outer boundary");
    return eval_single_layer(*outer_, densities_.mu_o, x, NearEvaluation::Upsample).value
           + eval_single_layer(*inner_, densities_.mu_i, x, NearEvaluation::Upsample).value + densities_.rho_o;
}

double HarmonicPair::u_inner(const Vec2 &x) const
{
    const Region r = region(x);
    if (r != Region::Inner)
        throw DomainError(r == Region::Outer ? "point lies in the outer region, not the inclusion"
                                             : "point lies outside the outer boundary");
    return eval_single_layer(*inner_, densities_.eta_i, x, NearEvaluation::Upsample).value + densities_.rho_i;
}

double HarmonicPair::value(const Vec2 &x) const
{
    switch (region(x)) {
    case Region::Outer: return u_outer(x);
    case Region::Inner: return u_inner(x);
    case Region::Outside: break;
    }
    throw DomainError("point lies outside the outer boundary");
}

HarmonicPair reconstruct_solution(const DensitySet &densities, const DiscreteBoundary &outer,
                                  const DiscreteBoundary &inner)
{
    return HarmonicPair(densities, outer, inner);
}

}  // namespace tbem
