#include "tbem/oracle.hpp"

#include <charconv>
#include <cmath>

namespace tbem {

namespace {

std::string shortest(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// "lead + coef*x1" with the sign folded in
std::string affine(const std::string &lead, double coef)
{
    if (coef == 0.0)
        return lead;
    return lead + (coef < 0 ? " - " : " + ") + shortest(std::abs(coef)) + "*x1";
}

}  // namespace

double fourier_V_eigenvalue(double R, int k)
{
    if (!(R > 0.0))
        throw std::invalid_argument("radius must be positive");
    return k == 0 ? R * std::log(R) : -R / (2.0 * std::abs(k));
}

double fourier_Wstar_eigenvalue(double R, int k)
{
    if (!(R > 0.0))
        throw std::invalid_argument("radius must be positive");
    return k == 0 ? 0.5 : 0.0;
}

TrigSeries TrigSeries::cosine(int k, double coefficient)
{
    TrigSeries t;
    t.c.assign(static_cast<std::size_t>(k) + 1, 0.0);
    t.s.assign(static_cast<std::size_t>(k) + 1, 0.0);
    t.c[static_cast<std::size_t>(k)] = coefficient;
    return t;
}

TrigSeries TrigSeries::sine(int k, double coefficient)
{
    TrigSeries t;
    t.c.assign(static_cast<std::size_t>(k) + 1, 0.0);
    t.s.assign(static_cast<std::size_t>(k) + 1, 0.0);
    t.s[static_cast<std::size_t>(k)] = coefficient;
    return t;
}

int TrigSeries::max_mode() const
{
    return static_cast<int>(std::max(c.size(), s.size())) - 1;
}

double TrigSeries::cos_coef(int k) const
{
    return static_cast<std::size_t>(k) < c.size() ? c[static_cast<std::size_t>(k)] : 0.0;
}

double TrigSeries::sin_coef(int k) const
{
    return k > 0 && static_cast<std::size_t>(k) < s.size() ? s[static_cast<std::size_t>(k)] : 0.0;
}

double TrigSeries::operator()(double theta) const
{
    double v = cos_coef(0);
    for (int k = 1; k <= max_mode(); ++k)
        v += cos_coef(k) * std::cos(k * theta) + sin_coef(k) * std::sin(k * theta);
    return v;
}

FourierModeSystem FourierModeSystem::build(int k, double ri, double ro, const Eigen::Matrix2d &a)
{
    if (!(ri > 0.0 && ri < ro))
        throw std::invalid_argument("need 0 < r_inner < r_outer");
    FourierModeSystem sys;
    sys.k = k;
    sys.r_inner = ri;
    sys.r_outer = ro;
    const double q = ri / ro;
    if (k == 0) {
        // alpha1 = ro log ro a0 + ri log ri b0 + rho_o, alpha2 = ri log ri c0 + rho_i
        Eigen::RowVectorXd alpha1(5), alpha2(5);
        alpha1 << ro * std::log(ro), ri * std::log(ri), 0.0, 1.0, 0.0;
        alpha2 << 0.0, 0.0, ri * std::log(ri), 0.0, 1.0;
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(5, 5);
        m(0, 1) = q;
        m.row(1) = -a(0, 0) * alpha1 - a(0, 1) * alpha2;
        m(1, 1) += 1.0;
        m.row(2) = -a(1, 0) * alpha1 - a(1, 1) * alpha2;
        m(3, 0) = 1.0;
        m(4, 2) = 1.0;
        sys.matrix = m;
        return sys;
    }
    const double kk = std::abs(k);
    Eigen::RowVector3d alpha1(-(ro / (2 * kk)) * std::pow(q, kk), -ri / (2 * kk), 0.0);
    Eigen::RowVector3d alpha2(0.0, 0.0, -ri / (2 * kk));
    Eigen::MatrixXd m(3, 3);
    m.row(0) << -0.5, 0.5 * std::pow(q, kk + 1), 0.0;
    m.row(1) = Eigen::RowVector3d(-0.5 * std::pow(q, kk - 1), 0.5, 0.0) - a(0, 0) * alpha1 - a(0, 1) * alpha2;
    m.row(2) = Eigen::RowVector3d(0.0, 0.0, -0.5) - a(1, 0) * alpha1 - a(1, 1) * alpha2;
    sys.matrix = m;
    return sys;
}

ConcentricSolution concentric_linear_solve(double ri, double ro, const Eigen::Matrix2d &a, const TrigSeries &f_o,
                                           const TrigSeries &g1, const TrigSeries &g2)
{
    ConcentricSolution sol;
    sol.r_inner = ri;
    sol.r_outer = ro;
    const int kmax = std::max({f_o.max_mode(), g1.max_mode(), g2.max_mode(), 0});
    for (TrigSeries *t : {&sol.mu_o, &sol.mu_i, &sol.eta}) {
        t->c.assign(static_cast<std::size_t>(kmax) + 1, 0.0);
        t->s.assign(static_cast<std::size_t>(kmax) + 1, 0.0);
    }
    sol.flux = kTwoPi * ro * f_o.cos_coef(0);

    const auto solve = [](const FourierModeSystem &sys, const Eigen::VectorXd &rhs) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.matrix);
        if (lu.rank() < sys.matrix.rows() || lu.rcond() < 1e-14)
            throw OracleError("singular Fourier system at mode " + std::to_string(sys.k), sys.k);
        return Eigen::VectorXd(lu.solve(rhs));
    };

    {
        const FourierModeSystem sys = FourierModeSystem::build(0, ri, ro, a);
        Eigen::VectorXd rhs(5);
        rhs << f_o.cos_coef(0), g1.cos_coef(0), g2.cos_coef(0), 0.0, 0.0;
        const Eigen::VectorXd x = solve(sys, rhs);
        sol.mu_o.c[0] = x[0];
        sol.mu_i.c[0] = x[1];
        sol.eta.c[0] = x[2];
        sol.rho_o = x[3];
        sol.rho_i = x[4];
    }
    for (int k = 1; k <= kmax; ++k) {
        const FourierModeSystem sys = FourierModeSystem::build(k, ri, ro, a);
        const std::size_t kk = static_cast<std::size_t>(k);
        const Eigen::VectorXd xc = solve(sys, Eigen::Vector3d(f_o.cos_coef(k), g1.cos_coef(k), g2.cos_coef(k)));
        const Eigen::VectorXd xs = solve(sys, Eigen::Vector3d(f_o.sin_coef(k), g1.sin_coef(k), g2.sin_coef(k)));
        sol.mu_o.c[kk] = xc[0];
        sol.mu_i.c[kk] = xc[1];
        sol.eta.c[kk] = xc[2];
        sol.mu_o.s[kk] = xs[0];
        sol.mu_i.s[kk] = xs[1];
        sol.eta.s[kk] = xs[2];
    }
    return sol;
}

DensitySet ConcentricSolution::sample(std::size_t n_outer, std::size_t n_inner) const
{
    DensitySet d = DensitySet::zeros(n_outer, n_inner);
    for (std::size_t j = 0; j < n_outer; ++j)
        d.mu_o[static_cast<Eigen::Index>(j)] = mu_o(kTwoPi * static_cast<double>(j) / static_cast<double>(n_outer));
    for (std::size_t j = 0; j < n_inner; ++j) {
        const double t = kTwoPi * static_cast<double>(j) / static_cast<double>(n_inner);
        d.mu_i[static_cast<Eigen::Index>(j)] = mu_i(t);
        d.eta_i[static_cast<Eigen::Index>(j)] = eta(t);
    }
    d.rho_o = rho_o;
    d.rho_i = rho_i;
    return d;
}

double ConcentricSolution::u_outer(const Vec2 &x) const
{
    const double r = std::hypot(x.x, x.y);
    if (!(r > r_inner && r < r_outer))
        throw DomainError("point is not in the annulus");
    const double th = std::atan2(x.y, x.x);
    double u = r_outer * std::log(r_outer) * mu_o.cos_coef(0) + r_inner * std::log(r) * mu_i.cos_coef(0) + rho_o;
    for (int k = 1; k <= std::max(mu_o.max_mode(), mu_i.max_mode()); ++k) {
        const double fo = -(r_outer / (2.0 * k)) * std::pow(r / r_outer, k);
        const double fi = -(r_inner / (2.0 * k)) * std::pow(r_inner / r, k);
        u += (fo * mu_o.cos_coef(k) + fi * mu_i.cos_coef(k)) * std::cos(k * th)
             + (fo * mu_o.sin_coef(k) + fi * mu_i.sin_coef(k)) * std::sin(k * th);
    }
    return u;
}

double ConcentricSolution::u_inner(const Vec2 &x) const
{
    const double r = std::hypot(x.x, x.y);
    if (!(r < r_inner))
        throw DomainError("point is not in the inner disk");
    const double th = std::atan2(x.y, x.x);
    double u = r_inner * std::log(r_inner) * eta.cos_coef(0) + rho_i;
    for (int k = 1; k <= eta.max_mode(); ++k) {
        const double fi = -(r_inner / (2.0 * k)) * std::pow(r / r_inner, k);
        u += fi * (eta.cos_coef(k) * std::cos(k * th) + eta.sin_coef(k) * std::sin(k * th));
    }
    return u;
}

ManufacturedCase manufactured_affine_case()
{
    ManufacturedCase mc;
    const double ri = mc.r_inner, ro = mc.r_outer, c = mc.c;

    // u_o = (r + 1/r) cos, u_i = c r cos: radial derivative and trace coefficients
    const double trace_o = ri + 1.0 / ri;
    const double normal_o = 1.0 - 1.0 / (ri * ri);
    const double trace_i = c * ri;
    const double normal_i = c;
    const double outer_normal = 1.0 - 1.0 / (ro * ro);

    // on the inner circle x1 = ri cos, so a cos-coefficient g becomes (g / ri) x1
    const double g1 = (normal_o - trace_o) / ri;
    const double g2 = (normal_i + trace_i) / ri;
    mc.data = TransmissionData::parse(affine("z1", g1), affine("-z2", g2), "1", "0", "0", "-1",
                                      shortest(outer_normal / ro) + "*x1");

    mc.u_outer = [ri, ro](const Vec2 &x) {
        const double r2 = x.x * x.x + x.y * x.y;
        if (!(r2 > ri * ri && r2 < ro * ro))
            throw DomainError("point is not in the annulus");
        return x.x + x.x / r2;
    };
    mc.u_inner = [ri, c](const Vec2 &x) {
        if (!(x.x * x.x + x.y * x.y < ri * ri))
            throw DomainError("point is not in the inner disk");
        return c * x.x;
    };

    Eigen::Matrix2d a;
    a << 1.0, 0.0, 0.0, -1.0;
    mc.densities = concentric_linear_solve(ri, ro, a, TrigSeries::cosine(1, outer_normal),
                                           TrigSeries::cosine(1, normal_o - trace_o),
                                           TrigSeries::cosine(1, normal_i + trace_i));
    return mc;
}

double mean_value_check(const std::function<double(const Vec2 &)> &field, const Vec2 &center, double radius,
                        std::size_t samples, const std::function<bool(const Vec2 &)> &valid)
{
    if (samples == 0 || !(radius > 0.0))
        throw std::invalid_argument("need a positive radius and at least one sample");
    if (valid && !valid(center))
        throw DomainError("disk centre lies outside the field's region");
    double sum = 0.0;
    for (std::size_t j = 0; j < samples; ++j) {
        const double th = kTwoPi * static_cast<double>(j) / static_cast<double>(samples);
        const Vec2 p{center.x + radius * std::cos(th), center.y + radius * std::sin(th)};
        if (valid && !valid(p))
            throw DomainError("disk leaves the field's region");
        sum += field(p);
    }
    return std::abs(sum / static_cast<double>(samples) - field(center));
}

}  // namespace tbem
