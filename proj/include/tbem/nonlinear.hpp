#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tbem/expression.hpp"
#include "tbem/operators.hpp"

namespace tbem {

/// Variables of the transmission nonlinearities F(x, zeta).
inline const std::vector<std::string> kTransmissionVariables{"x1", "x2", "z1", "z2"};
/// Variables of the outer Neumann datum.
inline const std::vector<std::string> kDatumVariables{"x1", "x2"};

/// Boundary nonlinearities F1, F2 with their zeta-derivatives and the outer datum f_o.
struct TransmissionData {
    Expression F1, F2;
    Expression dF1_dz1, dF1_dz2, dF2_dz1, dF2_dz2;
    Expression f_o;

    /// Parses every field; throws ParseError from the first failing expression.
    static TransmissionData parse(const std::string &f1, const std::string &f2, const std::string &df1_dz1,
                                  const std::string &df1_dz2, const std::string &df2_dz1,
                                  const std::string &df2_dz2, const std::string &f_o);
};

struct DerivativeCheck {
    bool ok = true;
    std::string worst;        ///< name of the worst-matching derivative
    double worst_error = 0.0; ///< |d - fd| / (1 + |d|)
};

/// Compares supplied derivatives with central differences at `samples` random points
/// (x, z) in [-2, 2]^4.
DerivativeCheck validate_derivatives(const TransmissionData &data, std::uint64_t seed, std::size_t samples = 100,
                                     double tolerance = 1e-6);

class NonlinearError : public std::runtime_error {
public:
    NonlinearError(const std::string &what, std::ptrdiff_t node = -1) : std::runtime_error(what), node_(node) {}
    std::ptrdiff_t node() const { return node_; }

private:
    std::ptrdiff_t node_;
};

/// Superposition operator: out_j = F(x_j, h1_j, h2_j).
Vector nemytskii_apply(const Expression &F, std::span<const Vec2> points, const Vector &h1, const Vector &h2);

/// Sampled differential of (N_F1, N_F2) at the traces (alpha1, alpha2).
MatrixField linearization_matrix(const TransmissionData &data, std::span<const Vec2> points, const Vector &alpha1,
                                 const Vector &alpha2);

/// Heuristic growth evidence for |F(x, zeta) - A(x) zeta| <= C (1 + |zeta|)^delta:
/// envelope fit over log-spaced shells |zeta| in [1, sample_radius], upper half of the log range.
struct GrowthReport {
    double slope = 0.0;      ///< fitted delta
    double intercept = 0.0;  ///< fitted C_F
    double max_residual = 0.0;
    bool passes = false;     ///< slope < 1 - 0.05
    std::string note = "heuristic evidence only";
};

GrowthReport check_growth(const TransmissionData &data, const MatrixField &a, std::span<const Vec2> points,
                          double sample_radius);

/// The transmission system at a fixed geometry. The inner boundary may be the image of
/// the reference curve under a shape map; F is evaluated at the reference points.
class TransmissionSystem {
public:
    TransmissionSystem(const DiscreteBoundary &outer, const DiscreteBoundary &inner,
                       std::vector<Vec2> reference_points, TransmissionData data);

    const SystemBlocks &blocks() const { return blocks_; }
    const TransmissionData &data() const { return data_; }
    std::span<const Vec2> reference_points() const { return reference_points_; }
    const Vector &outer_datum() const { return outer_datum_; }
    std::size_t n_outer() const { return blocks_.n_outer(); }
    std::size_t n_inner() const { return blocks_.n_inner(); }

    /// Nonlinear residual: linear part minus (f_o, N_F1(alpha), N_F2(alpha)).
    BoundaryTriple residual(const DensitySet &x) const;
    MatrixField linearization(const DensitySet &x) const;
    /// Bordered Jacobian of the residual: J_A with A the linearization at x.
    BlockOperator jacobian(const DensitySet &x) const;

private:
    SystemBlocks blocks_;
    std::vector<Vec2> reference_points_;
    TransmissionData data_;
    Vector outer_datum_;
};

/// T_A for a fixed matrix field A with J_A factorized once.
class PicardOperator {
public:
    PicardOperator(const TransmissionSystem &system, MatrixField a);

    DensitySet apply(const DensitySet &x) const;
    const MatrixField &matrix_field() const { return a_; }
    const BlockOperator &operator_matrix() const { return op_; }

private:
    const TransmissionSystem *system_;
    MatrixField a_;
    BlockOperator op_;
    FactorizedOperator lu_;
};

/// One relaxed Picard update (1 - damping) x + damping T_A(x).
DensitySet picard_step(const DensitySet &state, const PicardOperator &picard, double damping = 1.0);

enum class SolveMethod { Picard, Newton, Hybrid };

struct SolverOptions {
    SolveMethod method = SolveMethod::Hybrid;
    double tol = 1e-10;
    int max_iter = 100;
    double damping = 1.0;
    /// Picard-to-Newton switch threshold on the update size.
    double switch_tol = 1e-3;
    /// Matrix field for T_A; see default_picard_matrix.
    std::optional<MatrixField> picard_matrix;
};

struct IterationRecord {
    int iteration = 0;
    std::string method;
    double residual = 0.0;
    double step = 0.0;
};

struct SolveResult {
    DensitySet densities;
    std::vector<IterationRecord> trace;
    double residual = 0.0;
    int newton_steps = 0;
    int picard_steps = 0;
};

class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string &what, std::vector<IterationRecord> trace, DensitySet last)
        : std::runtime_error(what), trace_(std::move(trace)), last_(std::move(last)) {}
    const std::vector<IterationRecord> &trace() const { return trace_; }
    const DensitySet &last_iterate() const { return last_; }

private:
    std::vector<IterationRecord> trace_;
    DensitySet last_;
};

/// Newton Jacobian too ill-conditioned to factor; carries the trace so far.
class SingularJacobianError : public NonConvergenceError {
public:
    using NonConvergenceError::NonConvergenceError;
};

/// Default matrix field for T_A: the linearization at zero traces or diag(1, -1),
/// whichever is admissible and passes check_growth first; an admissible one otherwise.
MatrixField default_picard_matrix(const TransmissionSystem &system);

SolveResult solve_system(const TransmissionSystem &system, const DensitySet &guess, const SolverOptions &options);

SolveResult solve_unperturbed(const TransmissionData &data, const DiscreteBoundary &outer,
                              const DiscreteBoundary &inner, const SolverOptions &options);

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class Region { Outer, Inner, Outside };

/// (u_o, u_i) from a DensitySet via the single-layer representation.
class HarmonicPair {
public:
    HarmonicPair(DensitySet densities, const DiscreteBoundary &outer, const DiscreteBoundary &inner);

    Region region(const Vec2 &x) const;
    /// Throws DomainError outside the annular region.
    double u_outer(const Vec2 &x) const;
    /// Throws DomainError outside the inclusion.
    double u_inner(const Vec2 &x) const;
    /// u_outer or u_inner by region; throws outside the outer domain.
    double value(const Vec2 &x) const;

    const DensitySet &densities() const { return densities_; }
    const DiscreteBoundary &outer() const { return *outer_; }
    const DiscreteBoundary &inner() const { return *inner_; }

private:
    DensitySet densities_;
    std::shared_ptr<const DiscreteBoundary> outer_;
    std::shared_ptr<const DiscreteBoundary> inner_;
};

HarmonicPair reconstruct_solution(const DensitySet &densities, const DiscreteBoundary &outer,
                                  const DiscreteBoundary &inner);

}  // namespace tbem
