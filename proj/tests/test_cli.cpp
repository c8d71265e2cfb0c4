#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "reins/cli.hpp"

namespace fs = std::filesystem;
using reins::cli::run;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::path(testing::TempDir()) / ("reins_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t count_ext(const fs::path& dir, const std::string& ext) {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ext;
    return n;
}

}  // namespace

TEST(Cli, SolveBaseline) {
    const auto r = invoke({"solve"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("K*       0.107043"), std::string::npos);
    EXPECT_NE(r.out.find("q*       0.10238"), std::string::npos);
    EXPECT_NE(r.err.find("manifest: "), std::string::npos);
}

TEST(Cli, SolveThresholds) {
    const auto low = invoke({"solve", "--k", "0.08"});
    EXPECT_NE(low.out.find("t*       1.34572"), std::string::npos);
    EXPECT_NE(low.out.find("subscribe at t = 0"), std::string::npos);
    const auto high = invoke({"--k", "0.2", "solve"});
    EXPECT_NE(high.out.find("regime   NoReinsurance"), std::string::npos);
    EXPECT_NE(high.out.find("t*       none"), std::string::npos);
}

TEST(Cli, SolveTable) {
    const auto dir = fresh_dir("table");
    const auto r = invoke({"solve", "--table", "0:10:11,-1:1:5", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto csv = slurp(dir / "value_table.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x,value");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 11 * 5);
    EXPECT_TRUE(fs::exists(dir / "manifest.json"));
    EXPECT_EQ(invoke({"solve", "--table", "0:20:3,0:1:2"}).code, 2);
}

TEST(Cli, ValidationExitCode) {
    const auto r = invoke({"solve", "--q", "0.01", "--eta", "-1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("eta > 0 violated"), std::string::npos);
    EXPECT_EQ(invoke({"solve", "--q", "0.2"}).code, 2);
    EXPECT_EQ(invoke({"solve", "--bogus"}).code, 2);
    EXPECT_EQ(invoke({}).code, 2);
    EXPECT_EQ(invoke({"solve", "--config", "/nonexistent/reins.cfg"}).code, 2);
}

TEST(Cli, ConfigPrecedence) {
    const auto dir = fresh_dir("config");
    {
        std::ofstream f(dir / "base.cfg");
        f << "# base\nq = 0.11\nsigma0 = 0.5\neta = 0.5\nbig_r = 0.05\nbig_t = 10\nk = 0.09\n";
    }
    const auto r = invoke({"solve", "--config", (dir / "base.cfg").string(), "--k", "0.07", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto manifest = slurp(dir / "manifest.json");
    EXPECT_NE(manifest.find("\"q\": 0.11"), std::string::npos);
    EXPECT_NE(manifest.find("\"k\": 0.07"), std::string::npos);
    {
        std::ofstream f(dir / "bad.cfg");
        f << "q = 0.11\ngamma = 2\n";
    }
    const auto bad = invoke({"solve", "--config", (dir / "bad.cfg").string()});
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("unknown key `gamma`"), std::string::npos);
}

TEST(Cli, ManifestRoundTrip) {
    const auto dir = fresh_dir("manifest");
    const auto first = invoke({"simulate", "--k", "0.08", "--seed", "7", "--paths", "2000", "--out", dir.string()});
    ASSERT_EQ(first.code, 0) << first.err;
    const auto again = invoke({"simulate", "--manifest", (dir / "manifest.json").string(), "--paths", "2000"});
    ASSERT_EQ(again.code, 0) << again.err;
    EXPECT_EQ(first.out, again.out);
}

TEST(Cli, SimulateAssertPasses) {
    for (const char* strategy : {"optimal", "null"}) {
        const auto r = invoke({"simulate", "--strategy", strategy, "--assert", "--k", "0.08"});
        EXPECT_EQ(r.code, 0) << strategy << '\n' << r.out;
        EXPECT_NE(r.out.find("std_error"), std::string::npos);
    }
}

TEST(Cli, SimulateDeterministic) {
    const auto a = invoke({"simulate", "--seed", "3", "--paths", "5000", "--threads", "1"});
    const auto b = invoke({"simulate", "--seed", "3", "--paths", "5000", "--threads", "4"});
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, invoke({"simulate", "--seed", "4", "--paths", "5000"}).out);
}

TEST(Cli, SimulateScheduleFile) {
    const auto dir = fresh_dir("schedule");
    {
        std::ofstream f(dir / "half.txt");
        f << "# constant retention\nstop_time 0\n0 0.5\n";
    }
    const auto r = invoke({"simulate", "--strategy", "file", "--schedule", (dir / "half.txt").string(), "--assert",
                           "--dump", (dir / "samples.txt").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("utility_of_schedule"), std::string::npos);
    const auto samples = slurp(dir / "samples.txt");
    EXPECT_EQ(std::count(samples.begin(), samples.end(), '\n'), 100000);

    {
        std::ofstream f(dir / "full.txt");
        f << "stop_time = 0\n0 0\n";
    }
    const auto zero = invoke({"simulate", "--strategy", "file", "--schedule", (dir / "full.txt").string(), "--assert"});
    EXPECT_EQ(zero.code, 0) << zero.out;
    EXPECT_NE(zero.out.find("zero variance"), std::string::npos);

    {
        std::ofstream f(dir / "broken.txt");
        f << "0 0.5\n";
    }
    EXPECT_EQ(invoke({"simulate", "--strategy", "file", "--schedule", (dir / "broken.txt").string()}).code, 2);
    EXPECT_EQ(invoke({"simulate", "--strategy", "file"}).code, 2);
}

TEST(Cli, SimulateAssertFailsForCoarseEuler) {
    const auto r = invoke({"simulate", "--scheme", "euler", "--steps", "1", "--assert"});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("exceeds"), std::string::npos);
}

TEST(Cli, VerifySuites) {
    const auto hjb = invoke({"verify", "--suite", "hjb"});
    EXPECT_EQ(hjb.code, 0) << hjb.out;
    EXPECT_NE(hjb.out.find("PASS hjb.value"), std::string::npos);
    const auto lattice = invoke({"verify", "--suite", "lattice", "--k", "0.08"});
    EXPECT_EQ(lattice.code, 0) << lattice.out;
    EXPECT_NE(lattice.out.find("PASS lattice.boundary"), std::string::npos);
    const auto detstop = invoke({"verify", "--suite", "detstop", "--k", "0.2"});
    EXPECT_EQ(detstop.code, 0) << detstop.out;
    EXPECT_NE(detstop.out.find("argmin s = 10"), std::string::npos);
}

TEST(Cli, VerifyFailureNamesCheck) {
    const auto r = invoke({"verify", "--suite", "hjb", "--time-scheme", "be", "--nt", "100", "--nx", "200"});
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.out.find("FAIL hjb.value"), std::string::npos);
    EXPECT_NE(r.err.find("hjb.value"), std::string::npos);
    EXPECT_EQ(invoke({"verify", "--nt", "10"}).code, 2);
    EXPECT_EQ(invoke({"verify", "--suite", "everything"}).code, 2);
}

TEST(Cli, SweepQ) {
    const auto dir = fresh_dir("sweep");
    const auto r = invoke({"sweep", "q", "0.02", "0.12", "50", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("warning: truncated q"), std::string::npos);
    EXPECT_NE(r.out.find("strictly decreasing"), std::string::npos);
    const auto csv = slurp(dir / "sweep_q.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 51);
    EXPECT_TRUE(fs::exists(dir / "sweep_q.svg"));
}

TEST(Cli, SweepAllPanels) {
    const auto dir = fresh_dir("panels");
    const auto r = invoke({"sweep", "--all-panels", "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(count_ext(dir, ".csv"), 4u);
    EXPECT_EQ(count_ext(dir, ".svg"), 4u);
}

TEST(Cli, SweepErrors) {
    EXPECT_EQ(invoke({"sweep", "gamma", "0", "1", "10"}).code, 2);
    EXPECT_EQ(invoke({"sweep", "q", "0.2", "0.3", "10"}).code, 2);
    EXPECT_EQ(invoke({"sweep", "q", "0.02"}).code, 2);
    EXPECT_EQ(invoke({"sweep", "q", "a", "b", "c"}).code, 2);
}

TEST(Cli, Version) {
    const auto r = invoke({"--version"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find(reins::cli::kVersion), std::string::npos);
}
