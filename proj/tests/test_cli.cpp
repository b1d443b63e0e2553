#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "kerrpo/cli.hpp"

using namespace kerrpo;
using namespace kerrpo::cli;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out, err;
};

CliRun run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
    const fs::path d = fs::temp_directory_path() / ("kerrpo_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Short grids keep these tests fast.
const std::vector<std::string> kShort{"--t-max", "3.0", "--dt", "0.5"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST(ParseComplex, Forms) {
    EXPECT_EQ(parse_complex("3+3i"), cplx(3, 3));
    EXPECT_EQ(parse_complex("3-3i"), cplx(3, -3));
    EXPECT_EQ(parse_complex("-1.5e-1+2e2i"), cplx(-0.15, 200));
    EXPECT_EQ(parse_complex("2"), cplx(2, 0));
    EXPECT_EQ(parse_complex("2.5i"), cplx(0, 2.5));
    EXPECT_EQ(parse_complex("-i"), cplx(0, -1));
    EXPECT_EQ(parse_complex(" 1 + 2i "), cplx(1, 2));
    EXPECT_THROW(parse_complex("abc"), InvalidParameter);
    EXPECT_THROW(parse_complex("1+2x"), InvalidParameter);
    EXPECT_THROW(parse_complex(""), InvalidParameter);
    EXPECT_EQ(format_complex({3, -0.5}), "3-0.5i");
}

TEST(ParseConfig, FlagsAndDefaults) {
    const RunConfig cfg = parse_config({"autocorr", "--z", "3+3i", "--kappa", "0.05"});
    EXPECT_EQ(cfg.mode, Mode::autocorr);
    EXPECT_EQ(cfg.params.z, cplx(3, 3));
    EXPECT_EQ(cfg.params.kappa, 0.05);
    EXPECT_EQ(cfg.t_max, 8 * kPi);
    EXPECT_EQ(cfg.sample_dt, 8 * kPi / 2000);
    EXPECT_EQ(cfg.tol.ode_tol, 1e-10);
    EXPECT_EQ(cfg.nmax_cap, 4096u);
    EXPECT_EQ(cfg.format, Format::csv);
}

TEST(ParseConfig, Alpha0DefaultsToModulusOfZ) {
    const RunConfig cfg = parse_config({"pk", "--z", "2+0i"});
    EXPECT_EQ(cfg.params.averaging_amplitude(), cplx(2, 0));
    const RunConfig explicit_cfg = parse_config({"pk", "--z", "2+0i", "--alpha0", "1.5"});
    EXPECT_EQ(explicit_cfg.params.averaging_amplitude(), cplx(1.5, 0));
}

TEST(ParseConfig, InvalidParametersExitWithTwo) {
    EXPECT_EQ(run({"autocorr", "--chi", "-1"}).code, 2);
    EXPECT_EQ(run({"autocorr", "--omega0", "0"}).code, 2);
    EXPECT_EQ(run({"autocorr", "--kappa", "-0.1"}).code, 2);
    EXPECT_EQ(run({"autocorr", "--z", "nonsense"}).code, 2);
    EXPECT_EQ(run({"bogus"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"autocorr", "--dt", "0"}).code, 2);
    EXPECT_EQ(run({"autocorr", "--format", "xml"}).code, 2);
    const CliRun r = run({"autocorr", "--chi", "-1"});
    EXPECT_NE(r.err.find("kerrpo:"), std::string::npos);
}

TEST(ParseConfig, HelpExitsCleanly) {
    const CliRun r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("--series-tol"), std::string::npos);
}

TEST(ParseConfig, FlagsOverrideConfigFileOverridesDefaults) {
    const fs::path file = scratch_dir() / "cfg.json";
    std::ofstream(file) << R"({"kappa": 0.3, "chi": 0.1, "z": "1-2i", "t_max": 5.0, "format": "json"})";
    const RunConfig cfg = parse_config({"coeffs", "--config", file.string(), "--chi", "0.2"});
    EXPECT_EQ(cfg.params.kappa, 0.3);
    EXPECT_EQ(cfg.params.chi, 0.2);
    EXPECT_EQ(cfg.params.z, cplx(1, -2));
    EXPECT_EQ(cfg.t_max, 5.0);
    EXPECT_EQ(cfg.format, Format::json);
    EXPECT_EQ(cfg.sample_dt, 8 * kPi / 2000);

    std::ofstream(file) << R"({"unknown": 1})";
    EXPECT_EQ(run({"coeffs", "--config", file.string()}).code, 2);
    EXPECT_EQ(run({"coeffs", "--config", (scratch_dir() / "missing.json").string()}).code, 2);
}

TEST(Cli, OutputIsDeterministic) {
    const auto args = with({"autocorr", "--kappa", "0.25", "--chi", "0.25", "--z", "2"}, kShort);
    const CliRun a = run(args), b = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_FALSE(a.out.empty());
}

TEST(Cli, DeterministicAcrossThreadCounts) {
    const auto args = with({"fig2"}, kShort);
    ::setenv("KERRPO_THREADS", "1", 1);
    const CliRun one = run(args);
    ::setenv("KERRPO_THREADS", "4", 1);
    const CliRun four = run(args);
    ::unsetenv("KERRPO_THREADS");
    ASSERT_EQ(one.code, 0) << one.err;
    EXPECT_EQ(one.out, four.out);
}

TEST(Cli, EveryCsvCarriesTheHeader) {
    const std::vector<std::vector<std::string>> commands{
        {"coeffs", "--kappa", "0.1", "--chi", "0.1"},   {"pk", "--kappa", "0.1", "--chi", "0.1"},
        {"autocorr", "--kappa", "0.1", "--chi", "0.1"}, {"oracle", "--kappa", "0.1", "--chi", "0.1"},
        {"revivals", "--kappa", "0.0", "--chi", "0.5"}, {"compare", "--kappa", "0.1", "--chi", "0.1"},
        {"fig1"},
    };
    for (const auto& c : commands) {
        const CliRun r = run(with(c, kShort));
        ASSERT_EQ(r.code, 0) << c[0] << ": " << r.err;
        EXPECT_EQ(r.out.rfind("# kerrpo " + c[0] + "\n", 0), 0u) << c[0];
        for (const char* key : {"# omega0=", "# kappa=", "# chi=", "# z=", "# alpha0=", "# t_max=", "# dt=",
                                "# ode_tol=", "# series_tol=", "# conv_tol=", "# nmax_cap="})
            EXPECT_NE(r.out.find(key), std::string::npos) << c[0] << " lacks " << key;
    }
}

TEST(Cli, CsvColumns) {
    EXPECT_NE(run(with({"coeffs"}, kShort)).out.find("t,re_a1,im_a1,re_a2,im_a2,re_a3,im_a3,re_a4,im_a4,"
                                                      "residual_unitarity\n"),
              std::string::npos);
    EXPECT_NE(run(with({"pk"}, kShort)).out.find("\nk,P_k\n"), std::string::npos);
    EXPECT_NE(run(with({"autocorr"}, kShort)).out.find("\nt,re_F,im_F,abs2_F\n"), std::string::npos);
    EXPECT_NE(run(with({"compare"}, kShort)).out.find("\nt,abs2_approx,abs2_oracle,abs2_diff\n"), std::string::npos);
    EXPECT_NE(run(with({"revivals", "--chi", "0.5"}, kShort)).out.find("\nt,height\n"), std::string::npos);
}

TEST(Cli, FilesAreSuffixedPerPart) {
    EXPECT_EQ(suffixed_path("dir/run.csv", "t0"), "dir/run_t0.csv");
    EXPECT_EQ(suffixed_path("run", "a"), "run_a");
    EXPECT_EQ(suffixed_path("d.x/run", "a"), "d.x/run_a");

    const fs::path base = scratch_dir() / "fig1.csv";
    const CliRun r = run({"fig1", "--out", base.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* tag : {"t0", "t2pi", "t6pi"}) {
        const std::string text = slurp(suffixed_path(base.string(), tag));
        EXPECT_EQ(text.rfind("# kerrpo fig1\n", 0), 0u) << tag;
    }
}

TEST(Cli, OracleWritesConvergenceReport) {
    const fs::path base = scratch_dir() / "oracle.csv";
    const CliRun r = run(with({"oracle", "--kappa", "0.25", "--chi", "0.25", "--out", base.string()}, kShort));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rep = nlohmann::json::parse(slurp(suffixed_path(base.string(), "convergence") + ".json"));
    ASSERT_TRUE(rep.contains("N_tried"));
    ASSERT_TRUE(rep.contains("sup_deltas"));
    ASSERT_TRUE(rep.contains("N_final"));
    EXPECT_EQ(rep["N_tried"].size(), rep["sup_deltas"].size() + 1);
    EXPECT_LT(rep["sup_deltas"].back().get<double>(), 1e-6);
}

TEST(Cli, JsonBundlesConfigAndResult) {
    const CliRun r = run(with({"compare", "--z", "2", "--kappa", "0.05", "--chi", "0", "--format", "json"}, kShort));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_EQ(doc["config"]["command"], "compare");
    EXPECT_EQ(doc["config"]["z"], "2+0i");
    EXPECT_TRUE(doc["result"]["passed"].get<bool>());
    EXPECT_LT(doc["result"]["sup_abs2_diff"].get<double>(), 5e-3);
    EXPECT_TRUE(doc["result"]["convergence"].contains("N_final"));
}

TEST(Cli, CompareReportsBreachWithoutFailing) {
    const CliRun r = run(with({"compare", "--z", "2", "--kappa", "0.25", "--chi", "0.25", "--compare-tol", "1e-9"}, kShort));
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("# passed=false"), std::string::npos);
    EXPECT_NE(r.err.find("FAIL"), std::string::npos);
}

TEST(Cli, ExitCodes) {
    // squeezing overflow on a long resonant run is an integration failure
    EXPECT_EQ(run({"coeffs", "--kappa", "0.05", "--chi", "0", "--t-max", "200", "--dt", "1"}).code, 3);
    // basis cap too small for the oracle
    EXPECT_EQ(run(with({"oracle", "--kappa", "0.25", "--chi", "0.25", "--nmax-cap", "8"}, kShort)).code, 3);
    // revival time has no meaning without the Kerr term, but peaks are still listed
    EXPECT_EQ(run(with({"revivals", "--chi", "0"}, kShort)).code, 0);
    EXPECT_EQ(run(with({"autocorr", "--out", "/nonexistent/dir/x.csv"}, kShort)).code, 2);
}
