#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tbem/nonlinear.hpp"

namespace tbem {

/// Variables of displacement expressions: curve parameter, family parameter,
/// base point and base velocity.
inline const std::vector<std::string> kShapeVariables{"t", "s", "x1", "x2", "v1", "v2"};

class InvalidShapeError : public GeometryError {
public:
    using GeometryError::GeometryError;
};

/// One-parameter family of displacements of the reference inner curve.
class ShapeFamily {
public:
    /// dx, dy and their t-derivatives; throws when s = 0 is not the zero displacement.
    ShapeFamily(ParametricCurve base, Expression dx, Expression dy, Expression dx_dt, Expression dy_dt);

    static ShapeFamily parse(ParametricCurve base, const std::string &dx, const std::string &dy,
                             const std::string &dx_dt, const std::string &dy_dt);
    /// phi_s = (1 + s) id.
    static ShapeFamily dilation(ParametricCurve base);
    /// Displacement s cos(3t) (cos t, sin t).
    static ShapeFamily trefoil(ParametricCurve base);

    ShapeMap at(double s) const;
    const ParametricCurve &base() const { return base_; }

private:
    ParametricCurve base_;
    Expression dx_, dy_, dx_dt_, dy_dt_;
};

/// Reference inner nodes gamma(t_j) at which F is evaluated under perturbation.
std::vector<Vec2> reference_points(const ParametricCurve &base, std::size_t n);

/// Validates phi and builds the system on its image; throws InvalidShapeError first.
TransmissionSystem perturbed_system(const ShapeMap &phi, const DiscreteBoundary &outer, std::size_t n,
                                    const TransmissionData &data);

/// M[phi, x] on the outer nodes and the reference inner nodes.
BoundaryTriple residual_M(const ShapeMap &phi, const DiscreteBoundary &outer, const DensitySet &x,
                          const TransmissionData &data);

/// Newton on M[phi, .] from `guess`.
SolveResult solve_at_shape(const ShapeMap &phi, const DiscreteBoundary &outer, const DensitySet &guess,
                           const TransmissionData &data, double tol = 1e-10, int max_iter = 20);

struct ProbeSet {
    std::vector<Vec2> interior;  ///< values of u_i
    std::vector<Vec2> exterior;  ///< values of u_o
    std::size_t size() const { return interior.size() + exterior.size(); }
};

/// Interior probes inside the inclusion and exterior probes in the outer region,
/// all at least one mesh width from either polygon.
bool probes_contained(const ProbeSet &probes, const DiscreteBoundary &outer, const DiscreteBoundary &inner);

/// u_i at interior probes followed by u_o at exterior probes.
std::vector<double> probe_values(const HarmonicPair &pair, const ProbeSet &probes);

struct BranchPoint {
    double s = 0.0;
    DensitySet densities;
    double residual_norm = 0.0;
    std::vector<double> probe_values;
    int newton_steps = 0;
};

struct BranchOptions {
    std::size_t steps = 20;
    double s_max = 0.1;
    int predictor_order = 1;
    double tol = 1e-10;
    int max_newton = 20;
};

struct Branch {
    std::vector<BranchPoint> points;
    bool complete = false;
    std::optional<double> failed_s;
    std::string error;
};

/// Predictor-corrector continuation on the uniform grid s_k = k s_max / steps, starting
/// from the unperturbed solution `start`. A failed corrector step is bisected once.
Branch continue_branch(const ShapeFamily &family, const DiscreteBoundary &outer, std::size_t n,
                       const TransmissionData &data, const DensitySet &start, const ProbeSet &probes,
                       const BranchOptions &options);

/// Central difference estimates of d^k/ds^k of one probe value at spacing h, 2h, 4h.
struct DerivativeEstimate {
    int order = 0;
    std::size_t index = 0;   ///< grid index of the centre
    double s = 0.0;
    double d_h = 0.0;
    double d_2h = 0.0;
    std::optional<double> d_4h;
    /// (d_2h - d_4h) / (d_h - d_2h), near 4 for smooth data.
    std::optional<double> richardson;
};

struct SmoothnessReport {
    std::vector<DerivativeEstimate> estimates;
    /// Median Richardson ratio per order (index 0 is order 1); nullopt when undefined.
    std::vector<std::optional<double>> median_ratio;
    /// |d_h - d_2h| <= rel * (|d_h| + floor) at every centre, per order.
    std::vector<bool> stabilized;
};

class GridTooShortError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Smoothness evidence along a uniform branch for one probe (or a plain value series).
SmoothnessReport smoothness_probe(const std::vector<double> &s, const std::vector<double> &values, int max_order,
                                  double stabilize_rel = 0.05, double stabilize_floor = 1e-6);
SmoothnessReport smoothness_probe(const std::vector<BranchPoint> &branch, std::size_t probe_index, int max_order,
                                  double stabilize_rel = 0.05, double stabilize_floor = 1e-6);

}  // namespace tbem
