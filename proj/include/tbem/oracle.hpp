#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "tbem/nonlinear.hpp"

namespace tbem {

// Closed-form references on concentric circles. Nothing here calls the quadrature code.

/// Eigenvalue of V on the radius-R circle for the mode e^{ik theta}.
double fourier_V_eigenvalue(double R, int k);

/// Eigenvalue of W* on the radius-R circle: 1/2 for k = 0, 0 otherwise.
double fourier_Wstar_eigenvalue(double R, int k);

/// c[0] + sum_k c[k] cos(k theta) + s[k] sin(k theta); s[0] is ignored.
struct TrigSeries {
    std::vector<double> c;
    std::vector<double> s;

    static TrigSeries cosine(int k, double coefficient);
    static TrigSeries sine(int k, double coefficient);
    int max_mode() const;
    double cos_coef(int k) const;
    double sin_coef(int k) const;
    double operator()(double theta) const;
};

class OracleError : public std::runtime_error {
public:
    OracleError(const std::string &what, int mode) : std::runtime_error(what), mode_(mode) {}
    int mode() const { return mode_; }

private:
    int mode_;
};

/// Per-mode restriction of the bordered system. k = 0: unknowns (a0, b0, c0, rho_o, rho_i)
/// with the two mean-zero rows; k != 0: unknowns (a, b, c) of mu_o, mu_i, eta.
struct FourierModeSystem {
    int k = 0;
    double r_inner = 1.0;
    double r_outer = 2.0;
    Eigen::MatrixXd matrix;

    static FourierModeSystem build(int k, double r_inner, double r_outer, const Eigen::Matrix2d &a);
};

/// Fourier-coefficient solution of the linear problem with F(x, z) = A z + (g1, g2)(x).
struct ConcentricSolution {
    double r_inner = 1.0;
    double r_outer = 2.0;
    TrigSeries mu_o, mu_i, eta;
    double rho_o = 0.0;
    double rho_i = 0.0;
    double flux = 0.0;   ///< integral of f_o over the outer circle

    /// Nodal values at t_j = 2 pi j / N on both circles.
    DensitySet sample(std::size_t n_outer, std::size_t n_inner) const;
    /// Series evaluation of u_o (annulus) and u_i (disk); throw DomainError elsewhere.
    double u_outer(const Vec2 &x) const;
    double u_inner(const Vec2 &x) const;
};

ConcentricSolution concentric_linear_solve(double r_inner, double r_outer, const Eigen::Matrix2d &a,
                                           const TrigSeries &f_o, const TrigSeries &g1 = {},
                                           const TrigSeries &g2 = {});

struct ManufacturedCase {
    double r_inner = 1.0;
    double r_outer = 2.0;
    double c = 0.5;                         ///< u_i = c x1
    TransmissionData data;
    std::function<double(const Vec2 &)> u_outer;  ///< x1 + x1 / |x|^2
    std::function<double(const Vec2 &)> u_inner;
    ConcentricSolution densities;           ///< exact representation
};

/// Affine fixture on circles (1, 2) with A = diag(1, -1).
ManufacturedCase manufactured_affine_case();

/// |mean of field over `samples` circle points - field(center)|. When `valid` is given,
/// every point used must satisfy it (DomainError otherwise).
double mean_value_check(const std::function<double(const Vec2 &)> &field, const Vec2 &center, double radius,
                        std::size_t samples, const std::function<bool(const Vec2 &)> &valid = {});

}  // namespace tbem
