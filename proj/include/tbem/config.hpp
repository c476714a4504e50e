#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tbem/shape.hpp"

namespace tbem {

/// circle | ellipse | star | custom (x, y, dx, dy as expressions in t).
struct CurveSpec {
    std::string type = "circle";
    double radius = 1.0;
    double semi_x = 1.0;
    double semi_y = 1.0;
    double amplitude = 0.0;
    int frequency = 3;
    Vec2 center{};
    std::string x, y, dx, dy;

    static CurveSpec circle(double r)
    {
        CurveSpec c;
        c.radius = r;
        return c;
    }
    ParametricCurve build() const;
};

struct ShapeSpec {
    std::string family;   ///< empty (no shape block), trefoil, dilation or custom
    std::string dx, dy, dx_dt, dy_dt;
    double s_max = 0.1;
    std::size_t steps = 20;
    int predictor_order = 1;
    int max_order = 3;
    double tol = 1e-10;

    ShapeFamily build(const ParametricCurve &base) const;
};

struct OutputSpec {
    std::string densities = "densities.json";
    std::string trace = "trace.csv";
    std::string field = "field.csv";
    std::string probes = "probes.csv";
    std::string branch = "branch.csv";
    std::string derivatives = "derivatives.csv";
    std::string smoothness = "smoothness.json";
    std::string convergence = "convergence.csv";
    std::string report = "verify.json";
    std::size_t grid = 41;
    bool branch_densities = false;
};

struct ProblemConfig {
    std::string source;   ///< path or label
    CurveSpec outer = CurveSpec::circle(2.0);
    CurveSpec inner = CurveSpec::circle(1.0);
    std::size_t N = 64;
    std::size_t max_N = 256;

    std::string F1, F2, dF1_dz1, dF1_dz2, dF2_dz1, dF2_dz2, f_o;
    TransmissionData data;

    SolverOptions solver;
    std::optional<std::array<double, 4>> picard_A;   ///< constant a11 a12 a21 a22

    ShapeSpec shape;
    ProbeSet probes;
    OutputSpec output;
};

/// All problems found while reading a config, each prefixed with its line when known.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string> &errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

/// Flat sectioned key = value text; '#' starts a comment; strings in double quotes.
/// Point lists are written "x y; x y".
ProblemConfig parse_config(const std::string &text, const std::string &label = "<config>");
ProblemConfig load_config(const std::string &path);

}  // namespace tbem
