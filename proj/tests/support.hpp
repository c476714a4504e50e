#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "tbem/shape.hpp"

namespace tbem::test {

inline std::filesystem::path source_dir() { return TBEM_SOURCE_DIR; }
inline std::filesystem::path config_path(const std::string &name) { return source_dir() / "configs" / name; }

inline std::filesystem::path scratch_dir(const std::string &name)
{
    const auto p = std::filesystem::path(TBEM_BINARY_DIR) / "scratch" / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline std::string slurp(const std::filesystem::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline Vector random_vector(std::mt19937_64 &rng, Eigen::Index n, double scale = 1.0)
{
    std::uniform_real_distribution<double> d(-scale, scale);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = d(rng);
    return v;
}

inline double max_abs(const Vector &v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

inline Vector nodal(const DiscreteBoundary &b, double (*f)(double))
{
    Vector v(static_cast<Eigen::Index>(b.size()));
    for (std::size_t j = 0; j < b.size(); ++j)
        v[static_cast<Eigen::Index>(j)] = f(b.params[j]);
    return v;
}

inline TransmissionData canonical_data()
{
    return TransmissionData::parse("z1 + tanh(z2)", "-z2 + tanh(z1)", "1", "1 - tanh(z2)^2", "1 - tanh(z1)^2",
                                   "-1", "x1/2");
}

inline TransmissionData zero_data() { return TransmissionData::parse("0", "0", "0", "0", "0", "0", "0"); }

inline ProbeSet canonical_probes() { return {{{0.0, 0.0}, {0.3, 0.2}}, {{1.5, 0.0}, {-0.2, 1.6}}}; }

// x-dependent admissible example: A(x) = ((x1^2, x1), (-x1, -1))
inline MatrixField x_dependent_A(const DiscreteBoundary &inner)
{
    const auto n = static_cast<Eigen::Index>(inner.size());
    MatrixField a{Vector(n), Vector(n), Vector(n), Vector(n)};
    for (Eigen::Index j = 0; j < n; ++j) {
        const double x1 = inner.nodes[static_cast<std::size_t>(j)].x;
        a.a11[j] = x1 * x1;
        a.a12[j] = x1;
        a.a21[j] = -x1;
        a.a22[j] = -1.0;
    }
    return a;
}

}  // namespace tbem::test
