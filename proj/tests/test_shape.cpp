#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "tbem/oracle.hpp"

using namespace tbem;
using tbem::test::max_abs;

namespace {

const ParametricCurve &unit()
{
    static const ParametricCurve c = ParametricCurve::circle(1.0);
    return c;
}

const DiscreteBoundary &outer64()
{
    static const DiscreteBoundary b = discretize(ParametricCurve::circle(2.0), 64);
    return b;
}

const SolveResult &canonical_start()
{
    static const SolveResult r =
        solve_unperturbed(test::canonical_data(), outer64(), discretize(unit(), 64), {});
    return r;
}

}  // namespace

TEST_CASE("families vanish at s = 0")
{
    const ShapeFamily tre = ShapeFamily::trefoil(unit());
    for (double t : {0.0, 0.7, 2.9}) {
        CHECK(norm(tre.at(0.0).displacement(t)) == 0.0);
        CHECK(norm(tre.at(0.1).displacement(t) - 0.1 * std::cos(3 * t) * Vec2{std::cos(t), std::sin(t)}) <= 1e-16);
    }
    const ShapeFamily dil = ShapeFamily::dilation(unit());
    CHECK(norm(dil.at(0.2).image().position(0.5) - 1.2 * unit().position(0.5)) <= 1e-15);
    CHECK_THROWS_AS(ShapeFamily::parse(unit(), "1 + s", "0", "0", "0"), InvalidShapeError);
    CHECK_THROWS_AS(ShapeFamily::parse(unit(), "s*q", "0", "0", "0"), ParseError);
}

TEST_CASE("residual at the identity shape")
{
    const DensitySet &x = canonical_start().densities;
    const ShapeMap id = ShapeMap::identity(unit());
    CHECK(residual_M(id, outer64(), x, test::canonical_data()).max_abs() <= 1e-10);

    // zero densities, zero nonlinearities: only the outer datum remains
    const TransmissionData datum_only = TransmissionData::parse("0", "0", "0", "0", "0", "0", "x1/2");
    const BoundaryTriple m = residual_M(id, outer64(), DensitySet::zeros(64, 64), datum_only);
    Vector f(64);
    for (std::size_t j = 0; j < 64; ++j)
        f[static_cast<Eigen::Index>(j)] = outer64().nodes[j].x / 2;
    CHECK(max_abs(m.outer + f) == 0.0);
    CHECK(max_abs(m.first) == 0.0);
    CHECK(max_abs(m.second) == 0.0);

    const ShapeFamily dil = ShapeFamily::dilation(unit());
    CHECK(residual_M(dil.at(0.15), outer64(), DensitySet::zeros(64, 64), test::zero_data()).max_abs() == 0.0);
}

TEST_CASE("solve at a shape")
{
    const DensitySet &x0 = canonical_start().densities;
    const SolveResult same = solve_at_shape(ShapeMap::identity(unit()), outer64(), x0, test::canonical_data());
    CHECK(same.newton_steps == 0);
    CHECK(max_abs_diff(same.densities, x0) == 0.0);

    const SolveResult r =
        solve_at_shape(ShapeFamily::trefoil(unit()).at(0.02), outer64(), x0, test::canonical_data());
    CHECK(r.residual <= 1e-10);
    CHECK(r.newton_steps <= 5);

    CHECK_THROWS_AS(solve_at_shape(ShapeMap::dilation(unit(), 3.0), outer64(), x0, test::canonical_data()),
                    InvalidShapeError);
}

TEST_CASE("Jacobian matches differences of the residual")
{
    std::mt19937_64 rng(8);
    const TransmissionData data = test::canonical_data();
    for (double s : {0.0, 0.05}) {
        const ShapeMap phi = ShapeFamily::trefoil(unit()).at(s);
        const TransmissionSystem sys = perturbed_system(phi, outer64(), 64, data);
        const DensitySet x = DensitySet::unpack(test::random_vector(rng, 194, 0.2), 64, 64);
        const BlockOperator j = sys.jacobian(x);
        const double h = 1e-6;
        for (int k = 0; k < 20; ++k) {
            const Vector d = test::random_vector(rng, 194);
            const Vector fd = (residual_M(phi, outer64(), DensitySet::unpack(x.pack() + h * d, 64, 64), data).pack()
                               - residual_M(phi, outer64(), DensitySet::unpack(x.pack() - h * d, 64, 64), data).pack())
                              / (2 * h);
            const Vector jd = j.matrix.topRows(static_cast<Eigen::Index>(j.equation_rows())) * d;
            CHECK(max_abs(fd - jd) / max_abs(jd) <= 1e-6);
        }
    }
}

TEST_CASE("probe containment")
{
    const DiscreteBoundary inner = discretize(unit(), 64);
    CHECK(probes_contained(test::canonical_probes(), outer64(), inner));
    CHECK_FALSE(probes_contained({{{1.5, 0.0}}, {}}, outer64(), inner));
    CHECK_FALSE(probes_contained({{}, {{0.99, 0.0}}}, outer64(), inner));
}

TEST_CASE("empty branch is the start point")
{
    BranchOptions opts;
    opts.steps = 0;
    const Branch b = continue_branch(ShapeFamily::trefoil(unit()), outer64(), 64, test::canonical_data(),
                                     canonical_start().densities, test::canonical_probes(), opts);
    REQUIRE(b.points.size() == 1);
    CHECK(b.complete);
    CHECK(max_abs_diff(b.points[0].densities, canonical_start().densities) <= 1e-12);
}

TEST_CASE("zero data along the dilation family")
{
    BranchOptions opts;
    opts.s_max = 0.2;
    const SolveResult start = solve_unperturbed(test::zero_data(), outer64(), discretize(unit(), 64), {});
    const Branch b = continue_branch(ShapeFamily::dilation(unit()), outer64(), 64, test::zero_data(),
                                     start.densities, {{{0.3, 0.1}}, {{1.6, 0.0}}}, opts);
    REQUIRE(b.complete);
    for (const BranchPoint &p : b.points) {
        CHECK(p.densities.max_abs() == 0.0);
        CHECK(p.probe_values == b.points[0].probe_values);
    }
    const SmoothnessReport rep = smoothness_probe(b.points, 0, 3);
    for (const DerivativeEstimate &e : rep.estimates) {
        CHECK(e.d_h == 0.0);
        CHECK(e.d_2h == 0.0);
    }
}

TEST_CASE("canonical trefoil branch")
{
    const Branch b = continue_branch(ShapeFamily::trefoil(unit()), outer64(), 64, test::canonical_data(),
                                     canonical_start().densities, test::canonical_probes(), {});
    REQUIRE(b.complete);
    REQUIRE(b.points.size() == 21);
    CHECK(b.points.back().s == doctest::Approx(0.1));
    for (const BranchPoint &p : b.points)
        CHECK(p.residual_norm <= 1e-10);
    CHECK(max_abs_diff(b.points[0].densities, canonical_start().densities) <= 1e-12);

    // the origin probe moves continuously
    for (std::size_t k = 1; k + 1 < b.points.size(); ++k) {
        const double jump = std::abs(b.points[k + 1].probe_values[0] - b.points[k].probe_values[0]);
        const double secant = std::abs(b.points[k + 1].probe_values[0] - b.points[k - 1].probe_values[0]) / 2;
        CHECK(jump <= 10 * secant + 1e-14);
    }

    for (std::size_t probe = 0; probe < 4; ++probe) {
        const SmoothnessReport rep = smoothness_probe(b.points, probe, 3);
        for (int order = 0; order < 3; ++order)
            CHECK(rep.stabilized[static_cast<std::size_t>(order)]);
        for (int order = 0; order < 2; ++order) {
            REQUIRE(rep.median_ratio[static_cast<std::size_t>(order)]);
            CHECK(*rep.median_ratio[static_cast<std::size_t>(order)] >= 3.0);
            CHECK(*rep.median_ratio[static_cast<std::size_t>(order)] <= 5.0);
        }
    }

    // negative control: one value replaced by noise
    std::vector<double> s, v;
    for (const BranchPoint &p : b.points) {
        s.push_back(p.s);
        v.push_back(p.probe_values[0]);
    }
    const std::size_t bad = 10;
    v[bad] += 1e-3;
    const SmoothnessReport rep = smoothness_probe(s, v, 3);
    bool flagged = false;
    for (const DerivativeEstimate &e : rep.estimates)
        if (e.order == 2 && e.index == bad && e.richardson)
            flagged = *e.richardson < 2.0 || *e.richardson > 8.0;
    CHECK(flagged);
    CHECK_FALSE(rep.stabilized[0]);
}

TEST_CASE("smoothness of polynomial series")
{
    std::vector<double> s, v;
    for (int k = 0; k <= 20; ++k) {
        s.push_back(0.01 * k);
        v.push_back(std::exp(s.back()));
    }
    const SmoothnessReport rep = smoothness_probe(s, v, 3);
    for (int order = 0; order < 3; ++order) {
        CHECK(rep.stabilized[static_cast<std::size_t>(order)]);
        CHECK(*rep.median_ratio[static_cast<std::size_t>(order)] == doctest::Approx(4.0).epsilon(0.05));
    }
    for (const DerivativeEstimate &e : rep.estimates)
        if (e.order == 1)
            CHECK(e.d_h == doctest::Approx(std::exp(e.s)).epsilon(1e-4));

    CHECK_THROWS_AS(smoothness_probe({0.0, 0.1}, {1.0, 2.0}, 1), GridTooShortError);
}

TEST_CASE("escaping family stops with a partial branch")
{
    BranchOptions opts;
    opts.s_max = 1.5;
    opts.steps = 10;
    const SolveResult start = solve_unperturbed(test::zero_data(), outer64(), discretize(unit(), 64), {});
    const Branch b = continue_branch(ShapeFamily::dilation(unit()), outer64(), 64, test::zero_data(),
                                     start.densities, {{}, {{1.7, 0.0}}}, opts);
    CHECK_FALSE(b.complete);
    REQUIRE(b.failed_s);
    CHECK(*b.failed_s > 0.0);
    CHECK(*b.failed_s <= 1.5);
    CHECK_FALSE(b.error.empty());
}

TEST_CASE("dilation branch agrees with fresh solves on concentric circles")
{
    const TransmissionData data = TransmissionData::parse("z1", "-z2", "1", "0", "0", "-1", "x1/2");
    const ShapeFamily fam = ShapeFamily::dilation(unit());
    const ProbeSet probes{{{0.3, 0.1}}, {{1.6, 0.0}}};
    BranchOptions opts;
    opts.s_max = 0.2;
    const SolveResult start = solve_unperturbed(data, outer64(), discretize(unit(), 64), {});
    const Branch b = continue_branch(fam, outer64(), 64, data, start.densities, probes, opts);
    REQUIRE(b.complete);

    const Eigen::Matrix2d a{{1, 0}, {0, -1}};
    for (std::size_t k = 0; k < b.points.size(); k += 5) {
        const BranchPoint &p = b.points[k];
        const ShapeMap phi = fam.at(p.s);
        const ConcentricSolution oracle = concentric_linear_solve(1 + p.s, 2.0, a, TrigSeries::cosine(1, 1.0));
        const SolveResult fresh = solve_at_shape(phi, outer64(), oracle.sample(64, 64), data);
        const HarmonicPair pair(fresh.densities, outer64(), discretize(phi.image(), 64));
        const std::vector<double> v = probe_values(pair, probes);
        for (std::size_t i = 0; i < v.size(); ++i)
            CHECK(std::abs(v[i] - p.probe_values[i]) <= 1e-8);
        CHECK(std::abs(p.probe_values[1] - oracle.u_outer({1.6, 0.0})) <= 1e-8);
    }
}

TEST_CASE("branch points pass the guards and keep consistent Jacobians")
{
    const TransmissionData data = test::canonical_data();
    const ShapeFamily fam = ShapeFamily::trefoil(unit());
    const Branch b = continue_branch(fam, outer64(), 64, data, canonical_start().densities, test::canonical_probes(), {});
    REQUIRE(b.complete);
    std::mt19937_64 rng(14);
    for (std::size_t k = 0; k < b.points.size(); ++k) {
        const ShapeMap phi = fam.at(b.points[k].s);
        CHECK(validate_shape(phi, outer64(), 64).valid);
        CHECK(probes_contained(test::canonical_probes(), outer64(), discretize(phi.image(), 64)));
        if (k % 10 != 0)
            continue;
        const DensitySet &x = b.points[k].densities;
        const BlockOperator j = perturbed_system(phi, outer64(), 64, data).jacobian(x);
        for (int r = 0; r < 5; ++r) {
            const Vector d = test::random_vector(rng, 194);
            const double h = 1e-6;
            const Vector fd = (residual_M(phi, outer64(), DensitySet::unpack(x.pack() + h * d, 64, 64), data).pack()
                               - residual_M(phi, outer64(), DensitySet::unpack(x.pack() - h * d, 64, 64), data).pack())
                              / (2 * h);
            const Vector jd = j.matrix.topRows(static_cast<Eigen::Index>(j.equation_rows())) * d;
            CHECK(max_abs(fd - jd) / max_abs(jd) <= 1e-6);
        }
    }
}
