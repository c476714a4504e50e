#include "tbem/operators.hpp"

#include <algorithm>
#include <limits>

namespace tbem {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

Vector weights_vector(const DiscreteBoundary &b)
{
    return Eigen::Map<const Vector>(b.weights.data(), idx(b.size()));
}

}  // namespace

DensitySet DensitySet::zeros(std::size_t n_outer, std::size_t n_inner)
{
    return {Vector::Zero(idx(n_outer)), Vector::Zero(idx(n_inner)), Vector::Zero(idx(n_inner)), 0.0, 0.0};
}

Vector DensitySet::pack() const
{
    Vector x(mu_o.size() + mu_i.size() + eta_i.size() + 2);
    x << mu_o, mu_i, eta_i, rho_o, rho_i;
    return x;
}

DensitySet DensitySet::unpack(const Vector &x, std::size_t n_outer, std::size_t n_inner)
{
    if (static_cast<std::size_t>(x.size()) != n_outer + 2 * n_inner + 2)
        throw std::invalid_argument("packed density vector has wrong length");
    DensitySet d;
    d.mu_o = x.segment(0, idx(n_outer));
    d.mu_i = x.segment(idx(n_outer), idx(n_inner));
    d.eta_i = x.segment(idx(n_outer + n_inner), idx(n_inner));
    d.rho_o = x[idx(n_outer + 2 * n_inner)];
    d.rho_i = x[idx(n_outer + 2 * n_inner + 1)];
    return d;
}

double DensitySet::max_abs() const
{
    return pack().cwiseAbs().maxCoeff();
}

double max_abs_diff(const DensitySet &a, const DensitySet &b)
{
    return (a.pack() - b.pack()).cwiseAbs().maxCoeff();
}

Vector BoundaryTriple::pack() const
{
    Vector x(outer.size() + first.size() + second.size());
    x << outer, first, second;
    return x;
}

BoundaryTriple BoundaryTriple::unpack(const Vector &x, std::size_t n_outer, std::size_t n_inner)
{
    if (static_cast<std::size_t>(x.size()) < n_outer + 2 * n_inner)
        throw std::invalid_argument("packed boundary vector is too short");
    return {x.segment(0, idx(n_outer)), x.segment(idx(n_outer), idx(n_inner)),
            x.segment(idx(n_outer + n_inner), idx(n_inner))};
}

double BoundaryTriple::max_abs() const
{
    return pack().cwiseAbs().maxCoeff();
}

MatrixField MatrixField::constant(std::size_t n, double a11, double a12, double a21, double a22)
{
    return {Vector::Constant(idx(n), a11), Vector::Constant(idx(n), a12), Vector::Constant(idx(n), a21),
            Vector::Constant(idx(n), a22)};
}

AdmissibilityReport check_A_conditions(const MatrixField &a, const DiscreteBoundary &inner)
{
    AdmissibilityReport report;
    const std::size_t n = a.size();
    if (n != inner.size() || a.a12.size() != a.a11.size() || a.a21.size() != a.a11.size()
        || a.a22.size() != a.a11.size())
        throw std::invalid_argument("matrix field is not sampled on the inner nodes");

    report.finite = a.a11.allFinite() && a.a12.allFinite() && a.a21.allFinite() && a.a22.allFinite();
    if (!report.finite)
        return report;

    // symmetric part of A~ = ((a11, a12), (-a21, -a22))
    double min_eig = std::numeric_limits<double>::infinity();
    Matrix stacked(2 * idx(n), 2);
    for (std::size_t j = 0; j < n; ++j) {
        const double p = a.a11[idx(j)];
        const double q = -a.a22[idx(j)];
        const double off = 0.5 * (a.a12[idx(j)] - a.a21[idx(j)]);
        const double mean = 0.5 * (p + q);
        const double rad = std::hypot(0.5 * (p - q), off);
        min_eig = std::min(min_eig, mean - rad);
        stacked.row(2 * idx(j)) << a.a11[idx(j)], a.a12[idx(j)];
        stacked.row(2 * idx(j) + 1) << a.a21[idx(j)], a.a22[idx(j)];
    }
    report.min_eigenvalue = min_eig;
    report.semidefinite = min_eig >= -1e-12;

    Eigen::JacobiSVD<Matrix> svd(stacked);
    report.min_singular_value = svd.singularValues().minCoeff();
    report.nondegenerate = report.min_singular_value > 1e-10;
    return report;
}

SystemBlocks SystemBlocks::build(const DiscreteBoundary &outer, const DiscreteBoundary &inner)
{
    double gap = std::numeric_limits<double>::infinity();
    for (const Vec2 &p : inner.nodes)
        for (const Vec2 &q : outer.nodes)
            gap = std::min(gap, norm(p - q));
    bool inside = true;
    for (const Vec2 &p : inner.nodes)
        inside = inside && inside_polygon(outer, p);
    if (!inside || !(gap > 1e-10 * outer.length()))
        throw AssemblyError("inner boundary touches or leaves the outer boundary (node gap "
                            + std::to_string(gap) + ")");

    SystemBlocks blocks;
    blocks.outer = std::make_shared<const DiscreteBoundary>(outer);
    blocks.inner = std::make_shared<const DiscreteBoundary>(inner);
    blocks.wstar_outer = adjoint_double_layer_matrix(outer);
    blocks.wstar_inner = adjoint_double_layer_matrix(inner);
    blocks.v_inner = single_layer_matrix(inner);
    blocks.outer_from_inner_dn = cross_normal_derivative_matrix(outer, inner);
    blocks.inner_from_outer_dn = cross_normal_derivative_matrix(inner, outer);
    blocks.inner_from_outer_v = cross_single_layer_matrix(inner, outer);
    blocks.near_interaction = gap <= 3.0 * std::max(outer.mesh_width(), inner.mesh_width());
    return blocks;
}

std::pair<Vector, Vector> SystemBlocks::traces(const DensitySet &x) const
{
    Vector alpha1 = inner_from_outer_v * x.mu_o + v_inner * x.mu_i;
    alpha1.array() += x.rho_o;
    Vector alpha2 = v_inner * x.eta_i;
    alpha2.array() += x.rho_i;
    return {std::move(alpha1), std::move(alpha2)};
}

BoundaryTriple SystemBlocks::apply_linear(const DensitySet &x) const
{
    BoundaryTriple out;
    out.outer = -0.5 * x.mu_o + wstar_outer * x.mu_o + outer_from_inner_dn * x.mu_i;
    out.first = 0.5 * x.mu_i + wstar_inner * x.mu_i + inner_from_outer_dn * x.mu_o;
    out.second = -0.5 * x.eta_i + wstar_inner * x.eta_i;
    return out;
}

std::pair<double, double> SystemBlocks::constraints(const DensitySet &x) const
{
    return {weighted_integral(*outer, x.mu_o), weighted_integral(*inner, x.eta_i)};
}

BlockOperator assemble_JA(const SystemBlocks &blocks, const MatrixField &a)
{
    const std::size_t no = blocks.n_outer();
    const std::size_t ni = blocks.n_inner();
    if (a.size() != ni)
        throw AssemblyError("matrix field has " + std::to_string(a.size()) + " samples, inner boundary has "
                            + std::to_string(ni) + " nodes");

    BlockOperator op;
    op.n_outer = no;
    op.n_inner = ni;
    op.near_interaction = blocks.near_interaction;
    op.matrix = Matrix::Zero(idx(blocks.dim()), idx(blocks.dim()));
    Matrix &m = op.matrix;

    const Eigen::Index o = 0, r2 = idx(no), r3 = idx(no + ni), rc = idx(no + 2 * ni);
    const Eigen::Index c_mo = 0, c_mi = idx(no), c_eta = idx(no + ni), c_ro = rc, c_ri = rc + 1;
    const Eigen::Index eno = idx(no), eni = idx(ni);

    // row 1: (-1/2 + W*_o) mu_o + nu_o . grad v_i[mu_i]
    m.block(o, c_mo, eno, eno) = blocks.wstar_outer - 0.5 * Matrix::Identity(eno, eno);
    m.block(o, c_mi, eno, eni) = blocks.outer_from_inner_dn;

    // rows 2, 3: jump terms minus A times the traces
    m.block(r2, c_mi, eni, eni) = blocks.wstar_inner + 0.5 * Matrix::Identity(eni, eni);
    m.block(r2, c_mo, eni, eno) = blocks.inner_from_outer_dn;
    m.block(r3, c_eta, eni, eni) = blocks.wstar_inner - 0.5 * Matrix::Identity(eni, eni);

    const auto couple = [&](Eigen::Index row, const Vector &first, const Vector &second) {
        m.block(row, c_mo, eni, eno) -= first.asDiagonal() * blocks.inner_from_outer_v;
        m.block(row, c_mi, eni, eni) -= first.asDiagonal() * blocks.v_inner;
        m.block(row, c_ro, eni, 1) -= first;
        m.block(row, c_eta, eni, eni) -= second.asDiagonal() * blocks.v_inner;
        m.block(row, c_ri, eni, 1) -= second;
    };
    couple(r2, a.a11, a.a12);
    couple(r3, a.a21, a.a22);

    // mean-zero constraints
    m.block(rc, c_mo, 1, eno) = weights_vector(*blocks.outer).transpose();
    m.block(rc + 1, c_eta, 1, eni) = weights_vector(*blocks.inner).transpose();
    return op;
}

BlockOperator assemble_JA(const DiscreteBoundary &outer, const DiscreteBoundary &inner, const MatrixField &a)
{
    return assemble_JA(SystemBlocks::build(outer, inner), a);
}

BoundaryTriple apply_JA(const BlockOperator &op, const DensitySet &x)
{
    const Vector y = op.matrix.topRows(idx(op.equation_rows())) * x.pack();
    return BoundaryTriple::unpack(y, op.n_outer, op.n_inner);
}

double smallest_singular_value(const BlockOperator &op)
{
    Eigen::BDCSVD<Matrix> svd(op.matrix);
    return svd.singularValues().minCoeff();
}

FactorizedOperator::FactorizedOperator(const BlockOperator &op, double max_condition)
    : lu_(op.matrix), n_outer_(op.n_outer), n_inner_(op.n_inner)
{
    const double rcond = lu_.rcond();
    const auto pivots = lu_.matrixLU().diagonal().cwiseAbs();
    const bool broken = !pivots.allFinite() || pivots.minCoeff() == 0.0;
    condition_ = rcond > 0.0 && !broken ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(condition_ <= max_condition))
        throw SingularSystemError("numerically singular system (condition estimate "
                                  + std::to_string(condition_) + ")",
                                  condition_);
}

DensitySet FactorizedOperator::solve(const BoundaryTriple &rhs) const
{
    return solve(rhs, 0.0, 0.0);
}

DensitySet FactorizedOperator::solve(const BoundaryTriple &rhs, double outer_mean, double inner_mean) const
{
    if (static_cast<std::size_t>(rhs.outer.size()) != n_outer_
        || static_cast<std::size_t>(rhs.first.size()) != n_inner_
        || static_cast<std::size_t>(rhs.second.size()) != n_inner_)
        throw std::invalid_argument("right-hand side does not match the operator layout");
    Vector b(idx(n_outer_ + 2 * n_inner_ + 2));
    b << rhs.outer, rhs.first, rhs.second, outer_mean, inner_mean;
    return DensitySet::unpack(lu_.solve(b), n_outer_, n_inner_);
}

DensitySet solve_JA(const BlockOperator &op, const BoundaryTriple &rhs)
{
    return FactorizedOperator(op).solve(rhs);
}

}  // namespace tbem
