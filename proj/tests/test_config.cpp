#include <doctest.h>

#include "support.hpp"
#include "tbem/config.hpp"

using namespace tbem;

namespace {

const char *minimal = R"(# linear transmission on the builtin circles
[transmission]
F1 = "z1 + 0.5*z2"
F2 = "0.5*z1 - z2"
dF1_dz1 = "1"
dF1_dz2 = "0.5"
dF2_dz1 = "0.5"
dF2_dz2 = "-1"
)";

std::vector<std::string> errors_of(const std::string &text)
{
    try {
        parse_config(text);
    } catch (const ConfigError &e) {
        return e.errors();
    }
    return {};
}

bool mentions(const std::vector<std::string> &errors, const std::string &a, const std::string &b = "")
{
    for (const std::string &e : errors)
        if (e.find(a) != std::string::npos && e.find(b) != std::string::npos)
            return true;
    return false;
}

}  // namespace

TEST_CASE("minimal config gets defaults")
{
    const ProblemConfig cfg = parse_config(minimal);
    CHECK(cfg.N == 64);
    CHECK(cfg.solver.tol == 1e-10);
    CHECK(cfg.solver.method == SolveMethod::Hybrid);
    CHECK(cfg.outer.radius == 2.0);
    CHECK(cfg.inner.radius == 1.0);
    CHECK(cfg.data.f_o({1.0, 2.0}) == 0.0);
    CHECK(cfg.shape.family.empty());
    CHECK(cfg.output.grid == 41);
}

TEST_CASE("shipped configs load")
{
    for (const char *name : {"canonical.ini", "manufactured.ini", "quadratic.ini", "zero.ini", "star_linear.ini",
                             "linear_dilation.ini", "escape.ini"}) {
        CAPTURE(name);
        CHECK_NOTHROW(load_config(test::config_path(name).string()));
    }
    const ProblemConfig c = load_config(test::config_path("canonical.ini").string());
    CHECK(c.shape.family == "trefoil");
    CHECK(c.probes.interior.size() == 2);
    CHECK(c.probes.exterior[1].y == 1.6);
}

TEST_CASE("unknown identifier is reported with its line")
{
    std::string text = minimal;
    text.replace(text.find("F1 = \"z1 + 0.5*z2\""), 18, "F1 = \"z1 + z3\"");
    const auto errors = errors_of(text);
    CHECK(mentions(errors, "line 3:", "z3"));
}

TEST_CASE("odd N is rejected")
{
    const auto errors = errors_of(std::string(minimal) + "[discretization]\nN = 63\n");
    CHECK(mentions(errors, "N must be even"));
}

TEST_CASE("all problems are collected")
{
    const std::string text = std::string(minimal) + R"(
[solver]
method = bisection
tol = abc
colour = 3
)";
    const auto errors = errors_of(text);
    CHECK(mentions(errors, "unknown method"));
    CHECK(mentions(errors, "'tol' expects a number"));
    CHECK(mentions(errors, "unknown key 'colour'"));

    // geometry is checked once the file itself is well formed
    CHECK(mentions(errors_of(std::string(minimal) + "[inner]\nradius = 2.5\n"), "not inside the outer curve"));
}

TEST_CASE("missing or wrong derivatives")
{
    CHECK(mentions(errors_of("[transmission]\nF1 = \"z1\"\nF2 = \"-z2\"\n"), "missing 'dF1_dz1'"));
    std::string text = minimal;
    text.replace(text.find("dF1_dz2 = \"0.5\""), 15, "dF1_dz2 = \"0.7\"");
    CHECK(mentions(errors_of(text), "dF1_dz2", "disagrees"));
}

TEST_CASE("probes and curves")
{
    const std::string text = std::string(minimal) + R"ini(
[outer]
type = ellipse
semi_x = 3
semi_y = 2

[inner]
type = custom
x = "cos(t)"
y = "0.5*sin(t)"
dx = "-sin(t)"
dy = "0.5*cos(t)"

[shape]
probes_interior = "0 0; 0.2 0.1"
probes_exterior = "2 0"
)ini";
    const ProblemConfig cfg = parse_config(text);
    CHECK(cfg.inner.type == "custom");
    CHECK(cfg.probes.size() == 3);
    CHECK(norm(cfg.inner.build().position(M_PI / 2) - Vec2{0.0, 0.5}) <= 1e-15);

    CHECK(mentions(errors_of(std::string(minimal) + "[shape]\nprobes_interior = \"1.5 0\"\n"), "probe points"));
    CHECK(mentions(errors_of(std::string(minimal) + "[shape]\nprobes_interior = \"1.5\"\n"), "expects points"));
}
