#include "cli_app.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run_cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "dipolar");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = dipolar::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        if (!line.empty() && line.back() == ',')
            cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

fs::path scratch_dir()
{
    const fs::path dir = fs::temp_directory_path() / ("dipolar_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

int run_binary(const std::string& args)
{
    const std::string cmd = std::string(DIPOLAR_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kProfileHeader = "r_prime,u3_hat,ur_hat,u3_classical_hat,ur_classical_hat,quad_err_u3,quad_err_ur";

} // namespace

TEST(Format, TwelveSignificantDigits)
{
    using dipolar::cli::fmt;
    EXPECT_EQ(fmt(1.0 / 3.0), "0.333333333333");
    EXPECT_EQ(fmt(-2.0 / 3.0), "-0.666666666667");
    EXPECT_EQ(fmt(0.0), "0");
    EXPECT_EQ(fmt(20.0), "20");
    EXPECT_EQ(fmt(1.5e-20), "1.5e-20");
    EXPECT_EQ(fmt(123456789012345.0), "1.23456789012e+14");
}

TEST(Profile, HeaderOriginAndClassicalColumns)
{
    const auto r = run_cli({"profile", "--n-points", "12"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 14u);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), kProfileHeader);

    const auto& origin = rows[1];
    ASSERT_EQ(origin.size(), 7u);
    EXPECT_EQ(origin[0], "0");
    EXPECT_EQ(origin[2], "0");
    EXPECT_TRUE(std::isfinite(std::stod(origin[1])));
    EXPECT_EQ(origin[3], "");
    EXPECT_EQ(origin[4], "");

    const auto& last = rows.back();
    EXPECT_EQ(last[0], "20");
    EXPECT_NEAR(std::stod(last[1]) / std::stod(last[3]), 1.0, 0.01);
    EXPECT_NEAR(std::stod(last[2]) / std::stod(last[4]), 1.0, 0.01);
}

TEST(Profile, RepeatedRunsAreIdentical)
{
    const auto a = run_cli({"profile", "--n-points", "15", "--nu", "0.25"});
    const auto b = run_cli({"profile", "--n-points", "15", "--nu", "0.25"});
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.err, b.err);
}

TEST(Profile, NonConvergenceKeepsCsvWithFlagColumn)
{
    const auto r = run_cli({"profile", "--n-points", "5", "--max-zero-intervals", "8", "--rel-tol", "1e-14"});
    EXPECT_EQ(r.code, 3);
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 7u);
    EXPECT_EQ(rows[0].back(), "converged");
    bool any_zero = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        ASSERT_EQ(rows[i].size(), 8u);
        any_zero = any_zero || rows[i].back() == "0";
    }
    EXPECT_TRUE(any_zero);
}

TEST(Sweep, FitFooterAndMonotoneValues)
{
    const auto r = run_cli({"sweep"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 12u);
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "nu,u3_hat_origin,quad_err");
    for (std::size_t i = 2; i + 1 < rows.size(); ++i)
        EXPECT_LT(std::stod(rows[i][1]), std::stod(rows[i - 1][1]));
    const auto& fit = rows.back();
    ASSERT_EQ(fit.size(), 3u);
    EXPECT_EQ(fit[0], "fit");
    EXPECT_NEAR(std::stod(fit[1]) / 1.286, 1.0, 0.02);
    EXPECT_NEAR(std::stod(fit[2]) / -1.166, 1.0, 0.03);
}

TEST(Sweep, CustomValuesAndValidation)
{
    const auto r = run_cli({"sweep", "--nu-values", "0.1,0.2,0.3"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(parse_csv(r.out).size(), 5u);
    EXPECT_EQ(run_cli({"sweep", "--nu-values", "0.1,0.6"}).code, 2);
    EXPECT_EQ(run_cli({"sweep", "--nu-values", "0.1"}).code, 2);
}

TEST(Verify, DefaultPassesAndIsReproducible)
{
    const auto a = run_cli({"verify"});
    ASSERT_EQ(a.code, 0) << a.out;
    EXPECT_NE(a.out.find("result: PASS"), std::string::npos);
    EXPECT_NE(a.out.find("max_boundary_residual: "), std::string::npos);
    EXPECT_NE(a.out.find("max_ode_residual: "), std::string::npos);
    EXPECT_NE(a.out.find("worst_sample: "), std::string::npos);
    EXPECT_EQ(a.out, run_cli({"verify"}).out);
    EXPECT_NE(a.out, run_cli({"verify", "--seed", "7"}).out);
}

TEST(Verify, CorruptedCoefficientFails)
{
    const auto r = run_cli({"verify", "--corrupt-coefficient", "1e-6"});
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.out.find("result: FAIL"), std::string::npos);
    EXPECT_NE(r.out.find("worst_sample: "), std::string::npos);
}

TEST(Verify, PerSampleCsv)
{
    const auto path = scratch_dir() / "samples.csv";
    const auto r = run_cli({"verify", "--samples", "10", "--csv", path.string()});
    ASSERT_EQ(r.code, 0);
    const auto rows = parse_csv(slurp(path));
    ASSERT_EQ(rows.size(), 11u);
    EXPECT_EQ(rows[0][0], "index");
    EXPECT_EQ(rows[10][0], "9");
}

TEST(Point, DimensionalValues)
{
    const auto r = run_cli({"point", "--r", "2", "--c", "4", "--P", "3", "--mu", "2"});
    ASSERT_EQ(r.code, 0);
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1][1], "1");
    const double u3_hat = std::stod(rows[1][5]);
    EXPECT_NEAR(std::stod(rows[1][3]), 3.0 * u3_hat / (2.0 * std::numbers::pi * 2.0 * 2.0), 1e-11);
}

TEST(Convolve, UniformDiscSettlement)
{
    const auto r = run_cli({"convolve", "--radius", "1", "--pressure", "2", "--r-max", "3", "--n-points", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[0][0], "r");
    EXPECT_EQ(rows[0][1], "u3");
    EXPECT_EQ(rows[4][0], "3");
    // Library value for p = 1 at the center is 0.331518287; the CLI doubles it.
    EXPECT_NEAR(std::stod(rows[1][1]) / (2.0 * 0.331518287), 1.0, 1e-7);
    EXPECT_EQ(run_cli({"convolve", "--shape", "square"}).code, 2);
    EXPECT_EQ(run_cli({"convolve", "--radius", "0"}).code, 2);
}

TEST(Validation, ExitCodeTwo)
{
    EXPECT_EQ(run_cli({"profile", "--nu", "0.5"}).code, 2);
    EXPECT_EQ(run_cli({"profile", "--mu", "-1"}).code, 2);
    EXPECT_EQ(run_cli({"profile", "--c", "0"}).code, 2);
    EXPECT_EQ(run_cli({"profile", "--n-points", "1"}).code, 2);
    EXPECT_EQ(run_cli({"profile", "--rel-tol", "0"}).code, 2);
    EXPECT_EQ(run_cli({"profile", "--gnuplot"}).code, 2);
    EXPECT_EQ(run_cli({"verify", "--samples", "0"}).code, 2);
    EXPECT_EQ(run_cli({"point", "--r", "-1"}).code, 2);
    EXPECT_EQ(run_cli({"profile", "--nu", "abc"}).code, 2);
    EXPECT_EQ(run_cli({"nonsense"}).code, 2);
    EXPECT_EQ(run_cli({}).code, 2);
    const auto r = run_cli({"profile", "--nu", "0.5"});
    EXPECT_TRUE(r.out.empty());
    EXPECT_NE(r.err.find("error:"), std::string::npos);
    EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Config, FilePrecedenceAndEnvironment)
{
    const auto ini = scratch_dir() / "run.ini";
    {
        std::ofstream f(ini);
        f << "nu = 0.2\nn-points = 3\n";
    }
    auto r = run_cli({"profile", "--config", ini.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("\"nu\":0.2"), std::string::npos) << r.err;
    EXPECT_EQ(parse_csv(r.out).size(), 5u);

    r = run_cli({"profile", "--config", ini.string(), "--nu", "0.1"});
    EXPECT_NE(r.err.find("\"nu\":0.1"), std::string::npos);

    ::setenv(dipolar::cli::rel_tol_env, "1e-7", 1);
    r = run_cli({"point"});
    EXPECT_NE(r.err.find("\"rel_tol\":1e-07"), std::string::npos) << r.err;
    r = run_cli({"point", "--rel-tol", "1e-8"});
    EXPECT_NE(r.err.find("\"rel_tol\":1e-08"), std::string::npos);
    ::setenv(dipolar::cli::rel_tol_env, "fast", 1);
    EXPECT_EQ(run_cli({"point"}).code, 2);
    ::unsetenv(dipolar::cli::rel_tol_env);
}

TEST(Binary, ByteIdenticalOutputsAndArtifacts)
{
    const auto dir = scratch_dir();
    const auto a = dir / "a.csv", b = dir / "b.csv", sum = dir / "summary.json";
    ASSERT_EQ(run_binary("profile --n-points 25 --gnuplot -o " + a.string() + " --summary " + sum.string()), 0);
    ASSERT_EQ(run_binary("profile --n-points 25 -o " + b.string()), 0);
    const std::string ca = slurp(a);
    EXPECT_FALSE(ca.empty());
    EXPECT_EQ(ca, slurp(b));
    EXPECT_TRUE(fs::exists(a.string() + ".gp"));
    const auto summary = nlohmann::json::parse(slurp(sum));
    EXPECT_EQ(summary["exit_code"], 0);
    EXPECT_EQ(summary["config"]["command"], "profile");
    EXPECT_EQ(summary["result"]["rows"], 26);

    const auto va = dir / "va.txt", vb = dir / "vb.txt";
    ASSERT_EQ(run_binary("verify --seed 99 -o " + va.string()), 0);
    ASSERT_EQ(run_binary("verify --seed 99 -o " + vb.string()), 0);
    EXPECT_EQ(slurp(va), slurp(vb));

    EXPECT_EQ(run_binary("verify --corrupt-coefficient 1e-6 -o " + va.string()), 4);
    EXPECT_EQ(run_binary("profile --nu 0.7"), 2);
    fs::remove_all(dir);
}
