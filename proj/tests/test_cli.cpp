#include <doctest.h>

#include <cstdlib>
#include <json.hpp>

#include "support.hpp"
#include "tbem/commands.hpp"

using namespace tbem;
namespace fs = std::filesystem;

namespace {

int run(const std::string &args)
{
    const std::string cmd = std::string(TBEM_CLI) + " --quiet " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string cfg(const std::string &name) { return test::config_path(name).string(); }

std::vector<std::vector<std::string>> read_csv(const fs::path &p)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(test::slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            row.push_back(cell);
        if (!line.empty() && line.back() == ',')
            row.emplace_back();
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_CASE("manufactured solve reproduces the exact probes")
{
    const fs::path out = test::scratch_dir("cli_manufactured");
    REQUIRE(run("--out-dir " + out.string() + " solve " + cfg("manufactured.ini")) == kExitOk);
    const auto rows = read_csv(out / "probes.csv");
    REQUIRE(rows.size() == 5);
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const double x = std::stod(rows[k][1]), y = std::stod(rows[k][2]), v = std::stod(rows[k][3]);
        const double exact = rows[k][0] == "inner" ? 0.5 * x : x + x / (x * x + y * y);
        CHECK(std::abs(v - exact) <= 1e-8);
    }
    for (const char *f : {"trace.csv", "densities.json", "field.csv"})
        CHECK(fs::exists(out / f));
}

TEST_CASE("zero data gives constant fields")
{
    const fs::path out = test::scratch_dir("cli_zero");
    REQUIRE(run("--out-dir " + out.string() + " solve " + cfg("zero.ini")) == kExitOk);
    const auto dens = nlohmann::json::parse(test::slurp(out / "densities.json"));
    const double rho_o = dens["rho_o"], rho_i = dens["rho_i"];
    const auto rows = read_csv(out / "field.csv");
    std::size_t inner = 0, outer = 0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (rows[k][2] == "skip")
            continue;
        const double v = std::stod(rows[k][3]);
        CHECK(v == (rows[k][2] == "inner" ? rho_i : rho_o));
        (rows[k][2] == "inner" ? inner : outer)++;
    }
    CHECK(inner > 0);
    CHECK(outer > 0);
}

TEST_CASE("field regions agree with the polygons")
{
    const fs::path out = test::scratch_dir("cli_field");
    REQUIRE(run("--out-dir " + out.string() + " solve " + cfg("star_linear.ini")) == kExitOk);
    const ProblemConfig c = load_config(cfg("star_linear.ini"));
    const Problem prob = discretize_problem(c, c.N);
    const auto rows = read_csv(out / "field.csv");
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (rows[k][2] == "skip")
            continue;
        const Vec2 p{std::stod(rows[k][0]), std::stod(rows[k][1])};
        CHECK(inside_polygon(prob.outer, p));
        CHECK(inside_polygon(prob.inner, p) == (rows[k][2] == "inner"));
    }
}

TEST_CASE("quadratic growth with Picard diverges")
{
    const fs::path out = test::scratch_dir("cli_quadratic");
    CHECK(run("--out-dir " + out.string() + " solve " + cfg("quadratic.ini")) == kExitNonConvergence);
    CHECK(read_csv(out / "trace.csv").size() >= 3);
    CHECK_FALSE(fs::exists(out / "densities.json"));
}

TEST_CASE("perturb commands")
{
    const fs::path zero = test::scratch_dir("cli_perturb_zero");
    REQUIRE(run("--out-dir " + zero.string() + " perturb " + cfg("zero.ini")) == kExitOk);
    const auto deriv = read_csv(zero / "derivatives.csv");
    REQUIRE(deriv.size() > 1);
    for (std::size_t k = 1; k < deriv.size(); ++k) {
        CHECK(std::stod(deriv[k][3]) == 0.0);
        CHECK(std::stod(deriv[k][4]) == 0.0);
    }

    const fs::path canon = test::scratch_dir("cli_perturb_canonical");
    REQUIRE(run("--out-dir " + canon.string() + " perturb " + cfg("canonical.ini")) == kExitOk);
    const auto report = nlohmann::json::parse(test::slurp(canon / "smoothness.json"));
    CHECK(read_csv(canon / "branch.csv").size() == 22);
    for (const auto &probe : report["probes"]) {
        for (const auto &o : probe["orders"]) {
            CHECK(o["stabilized"] == true);
            if (o["order"] > 2)
                continue;
            const double r = o["median_richardson"];
            CHECK(r >= 3.0);
            CHECK(r <= 5.0);
        }
    }

    const fs::path esc = test::scratch_dir("cli_perturb_escape");
    CHECK(run("--out-dir " + esc.string() + " perturb " + cfg("escape.ini")) == kExitNonConvergence);
    const auto branch = read_csv(esc / "branch.csv");
    CHECK(branch.size() > 2);
    CHECK(branch.size() < 12);
    CHECK(test::slurp(esc / "smoothness.json").find("failed_s") != std::string::npos);

    CHECK(run("--out-dir " + esc.string() + " perturb " + cfg("manufactured.ini")) == kExitConfig);
}

TEST_CASE("verify")
{
    const fs::path out = test::scratch_dir("cli_verify");
    CHECK(run("--out-dir " + out.string() + " verify " + cfg("canonical.ini")) == kExitOk);
    const auto report = nlohmann::json::parse(test::slurp(out / "verify.json"));
    for (const auto &c : report["checks"])
        CHECK(c["status"] != "failed");

    CHECK(run("--out-dir " + out.string() + " --tamper fourier_Wstar verify " + cfg("canonical.ini"))
          == kExitVerifyFailed);
    const auto tampered = nlohmann::json::parse(test::slurp(out / "verify.json"));
    std::vector<std::string> failed;
    for (const auto &c : tampered["checks"])
        if (c["status"] == "failed")
            failed.push_back(c["name"]);
    CHECK(failed == std::vector<std::string>{"fourier_Wstar"});
}

TEST_CASE("convergence study")
{
    const fs::path out = test::scratch_dir("cli_convergence");
    REQUIRE(run("--out-dir " + out.string() + " convergence " + cfg("manufactured.ini")) == kExitOk);
    const auto rows = read_csv(out / "convergence.csv");
    REQUIRE(rows.size() == 6);
    CHECK(rows[0][0] == "N");
    // rows are N = 16 .. 256; deltas compare each level with the finest
    const std::size_t probes = (rows[0].size() - 2) / 2;
    for (std::size_t p = 0; p < probes; ++p) {
        const std::size_t col = 1 + probes + p;
        CHECK(std::stod(rows[4][col]) <= 1e-10);
        CHECK(rows[5][col].empty());
    }

    const fs::path star = test::scratch_dir("cli_convergence_star");
    REQUIRE(run("--out-dir " + star.string() + " convergence " + cfg("star_linear.ini")) == kExitOk);
    const auto srows = read_csv(star / "convergence.csv");
    const std::size_t sp = (srows[0].size() - 2) / 2;
    for (std::size_t p = 0; p < sp; ++p) {
        const std::size_t col = 1 + sp + p;
        for (std::size_t k = 1; k + 2 < srows.size(); ++k) {
            const double a = std::abs(std::stod(srows[k][col])), b = std::abs(std::stod(srows[k + 1][col]));
            if (a < 1e-2 && a > 1e-13)
                CHECK(b <= a / 10);
        }
    }
}

TEST_CASE("single-level convergence study")
{
    const fs::path out = test::scratch_dir("cli_convergence_single");
    const fs::path c = out / "capped.ini";
    std::string text = test::slurp(test::config_path("manufactured.ini"));
    text.replace(text.find("N = 128"), 7, "N = 128\nmax_N = 16");
    std::ofstream(c) << text;
    REQUIRE(run("--out-dir " + out.string() + " convergence " + c.string()) == kExitOk);
    const auto rows = read_csv(out / "convergence.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][0] == "16");
    for (std::size_t k = 1; k < rows[1].size() - 1; ++k)
        if (k > (rows[0].size() - 2) / 2)
            CHECK(rows[1][k].empty());
}

TEST_CASE("outputs are deterministic")
{
    const fs::path a = test::scratch_dir("cli_det_a"), b = test::scratch_dir("cli_det_b");
    for (const fs::path &d : {a, b}) {
        REQUIRE(run("--out-dir " + d.string() + " solve " + cfg("canonical.ini")) == kExitOk);
        REQUIRE(run("--out-dir " + d.string() + " perturb " + cfg("canonical.ini")) == kExitOk);
        REQUIRE(run("--out-dir " + d.string() + " verify " + cfg("canonical.ini")) == kExitOk);
        REQUIRE(run("--out-dir " + d.string() + " convergence " + cfg("star_linear.ini")) == kExitOk);
    }
    for (const char *f : {"trace.csv", "densities.json", "field.csv", "probes.csv", "branch.csv", "derivatives.csv",
                          "smoothness.json", "verify.json"}) {
        CAPTURE(f);
        CHECK(test::slurp(a / f) == test::slurp(b / f));
    }
    auto ra = read_csv(a / "convergence.csv"), rb = read_csv(b / "convergence.csv");
    REQUIRE(ra.size() == rb.size());
    for (std::size_t k = 0; k < ra.size(); ++k) {
        ra[k].pop_back();
        rb[k].pop_back();
        CHECK(ra[k] == rb[k]);
    }
}

TEST_CASE("exit codes for bad input")
{
    const fs::path out = test::scratch_dir("cli_errors");
    CHECK(run("solve " + (out / "missing.ini").string()) == kExitConfig);
    std::ofstream(out / "bad.ini") << "[discretization]\nN = 63\n";
    CHECK(run("solve " + (out / "bad.ini").string()) == kExitConfig);
    CHECK(run("frobnicate") == kExitConfig);
    CHECK(run("--out-dir " + out.string() + " --tamper nothing verify " + cfg("canonical.ini")) == kExitConfig);
}
