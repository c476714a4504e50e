#pragma once

#include <stdexcept>
#include <string>

#include "tbem/potential.hpp"

namespace tbem {

/// The unknowns of the transmission system: layer densities and the two constants.
/// mu_o lives on the outer nodes, mu_i and eta_i on the (possibly perturbed) inner
/// nodes indexed by the reference parameter.
struct DensitySet {
    Vector mu_o;
    Vector mu_i;
    Vector eta_i;
    double rho_o = 0.0;
    double rho_i = 0.0;

    static DensitySet zeros(std::size_t n_outer, std::size_t n_inner);

    std::size_t n_outer() const { return static_cast<std::size_t>(mu_o.size()); }
    std::size_t n_inner() const { return static_cast<std::size_t>(mu_i.size()); }

    /// Flat layout [mu_o, mu_i, eta_i, rho_o, rho_i].
    Vector pack() const;
    static DensitySet unpack(const Vector &x, std::size_t n_outer, std::size_t n_inner);

    double max_abs() const;
};

double max_abs_diff(const DensitySet &a, const DensitySet &b);

/// Values on the outer nodes and the two inner rows.
struct BoundaryTriple {
    Vector outer;
    Vector first;
    Vector second;

    Vector pack() const;
    static BoundaryTriple unpack(const Vector &x, std::size_t n_outer, std::size_t n_inner);
    double max_abs() const;
};

/// Sampled 2x2 matrix function A(x) on the inner nodes.
struct MatrixField {
    Vector a11, a12, a21, a22;

    static MatrixField constant(std::size_t n, double a11, double a12, double a21, double a22);
    std::size_t size() const { return static_cast<std::size_t>(a11.size()); }
};

struct AdmissibilityReport {
    bool finite = false;
    bool semidefinite = false;
    double min_eigenvalue = 0.0;       ///< smallest eigenvalue of sym(A~) over nodes
    bool nondegenerate = false;
    double min_singular_value = 0.0;   ///< of the stacked 2N x 2 matrix [A(x_j)]
    bool admissible() const { return finite && semidefinite && nondegenerate; }
};

AdmissibilityReport check_A_conditions(const MatrixField &a, const DiscreteBoundary &inner);

class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularSystemError : public std::runtime_error {
public:
    SingularSystemError(const std::string &what, double condition)
        : std::runtime_error(what), condition_(condition) {}
    double condition() const { return condition_; }

private:
    double condition_;
};

/// Geometry-dependent operator blocks of the two-boundary system. Built once per
/// (outer, inner) pair and reused for every matrix field A.
struct SystemBlocks {
    std::shared_ptr<const DiscreteBoundary> outer;
    std::shared_ptr<const DiscreteBoundary> inner;
    Matrix wstar_outer;          ///< W* on the outer boundary
    Matrix wstar_inner;          ///< W* on the inner boundary
    Matrix v_inner;              ///< V on the inner boundary
    Matrix outer_from_inner_dn;  ///< nu_o . grad v_i[.] at outer nodes
    Matrix inner_from_outer_dn;  ///< nu_i . grad v_o[.] at inner nodes
    Matrix inner_from_outer_v;   ///< v_o[.] at inner nodes
    bool near_interaction = false;  ///< boundaries closer than three mesh widths

    static SystemBlocks build(const DiscreteBoundary &outer, const DiscreteBoundary &inner);

    std::size_t n_outer() const { return outer->size(); }
    std::size_t n_inner() const { return inner->size(); }
    std::size_t dim() const { return n_outer() + 2 * n_inner() + 2; }

    /// Inner-boundary traces (alpha1, alpha2) = (v_o[mu_o] + V[mu_i] + rho_o, V[eta_i] + rho_i).
    std::pair<Vector, Vector> traces(const DensitySet &x) const;

    /// The linear part of the system without any A coupling.
    BoundaryTriple apply_linear(const DensitySet &x) const;

    /// Weighted means of mu_o (outer weights) and eta_i (inner weights).
    std::pair<double, double> constraints(const DensitySet &x) const;
};

/// Bordered square matrix of J_A: N_o + 2 N_i equation rows followed by the two
/// mean-zero rows; columns [mu_o, mu_i, eta_i, rho_o, rho_i].
struct BlockOperator {
    Matrix matrix;
    std::size_t n_outer = 0;
    std::size_t n_inner = 0;
    bool near_interaction = false;

    std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }
    std::size_t equation_rows() const { return n_outer + 2 * n_inner; }
};

BlockOperator assemble_JA(const SystemBlocks &blocks, const MatrixField &a);
BlockOperator assemble_JA(const DiscreteBoundary &outer, const DiscreteBoundary &inner, const MatrixField &a);

/// Equation rows of J_A applied to x (constraint rows dropped).
BoundaryTriple apply_JA(const BlockOperator &op, const DensitySet &x);

/// Smallest singular value of the bordered matrix.
double smallest_singular_value(const BlockOperator &op);

/// LU factorization of a BlockOperator with a 1-norm condition estimate.
class FactorizedOperator {
public:
    /// Throws SingularSystemError when the condition estimate exceeds `max_condition`.
    explicit FactorizedOperator(const BlockOperator &op, double max_condition = 1e12);

    /// Solves J x = rhs with zero constraint right-hand side.
    DensitySet solve(const BoundaryTriple &rhs) const;
    /// Solves with explicit constraint right-hand sides (outer mean, inner mean).
    DensitySet solve(const BoundaryTriple &rhs, double outer_mean, double inner_mean) const;

    double condition() const { return condition_; }

private:
    Eigen::PartialPivLU<Matrix> lu_;
    std::size_t n_outer_;
    std::size_t n_inner_;
    double condition_;
};

DensitySet solve_JA(const BlockOperator &op, const BoundaryTriple &rhs);

}  // namespace tbem
