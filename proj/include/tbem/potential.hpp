#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tbem/geometry.hpp"

namespace tbem {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Fundamental solution of the Laplacian in R^n: log|x|/(2 pi) for n = 2,
/// |x|^(2-n) / ((2-n) s_n) for n > 2, s_n the measure of the unit sphere.
double fundamental_solution(std::span<const double> x);

/// Arclength-weighted integral of nodal values.
double weighted_integral(const DiscreteBoundary &b, const Vector &values);

/// True when |sum w_j v_j| <= tol * sum w_j * max|v|.
bool is_mean_zero(const DiscreteBoundary &b, const Vector &values, double tol = 1e-12);

struct FieldValue {
    double value = 0.0;
    bool near_boundary = false;
};

struct FieldGradient {
    Vec2 value{};
    bool near_boundary = false;
};

enum class NearEvaluation { Flag, Upsample };

/// Single layer potential v[mu](x) off the boundary by the trapezoid rule.
/// Points within three mesh widths are flagged. With NearEvaluation::Upsample, points
/// within six mesh widths use the density interpolated to 4N nodes.
FieldValue eval_single_layer(const DiscreteBoundary &b, const Vector &mu, const Vec2 &x,
                             NearEvaluation mode = NearEvaluation::Flag);

FieldGradient grad_single_layer(const DiscreteBoundary &b, const Vector &mu, const Vec2 &x,
                                NearEvaluation mode = NearEvaluation::Flag);

/// Boundary trace V[mu] with the periodic log-splitting (Kress) quadrature.
Vector trace_V(const DiscreteBoundary &b, const Vector &mu);

/// Adjoint double layer W*[mu]; diagonal from the curvature limit.
Vector apply_Wstar(const DiscreteBoundary &b, const Vector &mu);

enum class Side { Interior, Exterior };

/// Normal derivative of the single layer from the given side: (-+1/2 I + W*)[mu].
Vector normal_derivative(Side side, const DiscreteBoundary &b, const Vector &mu);

// Dense matrices for assembly. Rows index targets, columns index source nodes.

Matrix single_layer_matrix(const DiscreteBoundary &b);
Matrix adjoint_double_layer_matrix(const DiscreteBoundary &b);
/// v_source[mu] at target nodes (targets off the source curve).
Matrix cross_single_layer_matrix(const DiscreteBoundary &target, const DiscreteBoundary &source);
/// nu_target . grad v_source[mu] at target nodes (targets off the source curve).
Matrix cross_normal_derivative_matrix(const DiscreteBoundary &target, const DiscreteBoundary &source);

/// Trigonometric interpolation of N periodic samples onto M >= N equispaced samples.
Vector trig_interpolate(const Vector &values, std::size_t m);

}  // namespace tbem
