#include <gtest/gtest.h>

#include <fstream>

#include "nidsp/bench/harness.hpp"

using namespace nidsp;

namespace {

IniDocument doc(const std::string& text) {
    std::istringstream is(text);
    return IniDocument::parse(is, "test.ini");
}

int error_line(const std::string& text) {
    try {
        (void)experiment_from_ini(doc(text));
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

const char* kLoopback = R"(
[experiment]
profiles = 9/8, 2
mse_trace_len = 64

[grid]
snr_db = inf
seeds = 1, 2

[channel]
enabled = false
)";

} // namespace

TEST(Ini, ParsesSectionsAndComments) {
    const auto d = doc("# top\na = 1\n[s]\n; note\nkey = value with spaces  \n");
    ASSERT_NE(d.find("", "a"), nullptr);
    EXPECT_EQ(d.find("s", "key")->text, "value with spaces");
    EXPECT_EQ(d.find("s", "key")->line, 5);
    EXPECT_EQ(d.find("s", "missing"), nullptr);
}

TEST(Ini, SyntaxErrorsNameTheLine) {
    EXPECT_THROW(doc("[ok]\nno equals sign\n"), ConfigError);
    try {
        doc("[ok]\nx = 1\nx = 2\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_NE(std::string(e.what()).find("test.ini:3"), std::string::npos);
    }
    EXPECT_THROW(doc("[broken\n"), ConfigError);
}

TEST(Ini, SplitKeepsEmptyFields) {
    const auto v = IniDocument::split_list("a, b,,");
    ASSERT_EQ(v.size(), 4U);
    EXPECT_EQ(v[1], "b");
    EXPECT_EQ(v[3], "");
}

TEST(Config, Defaults) {
    const auto c = experiment_from_ini(doc(""));
    EXPECT_EQ(c.profiles.size(), 1U);
    EXPECT_EQ(c.fec_threshold_ber, 2.0e-2);
    EXPECT_EQ(c.point_count(), 1U);
}

TEST(Config, GridRangesAndLists) {
    const auto c = experiment_from_ini(doc("[experiment]\nprofiles = 9/8, 5/4, 2\n[grid]\nsnr_db = 10:20:1\ncfo_hz = 0, 1e8\nseeds = 1:3:1, 9\n"));
    EXPECT_EQ(c.snr_db.size(), 11U);
    EXPECT_DOUBLE_EQ(c.snr_db.back(), 20.0);
    EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2, 3, 9}));
    EXPECT_EQ(c.point_count(), 3U * 11U * 2U * 4U);
}

TEST(Config, ErrorsAreLineAnchored) {
    EXPECT_EQ(error_line("[grid]\nsnr_db = 10\nseeds = 1, 1\n"), 3);
    EXPECT_EQ(error_line("[grid]\n\nsnr_db = ten\n"), 3);
    EXPECT_EQ(error_line("[grid]\nbogus = 1\n"), 2);
    EXPECT_EQ(error_line("\n[nope]\n"), 2);
    EXPECT_EQ(error_line("[experiment]\nprofiles = 9/8, 7/3\n"), 2);
    EXPECT_EQ(error_line("[experiment]\nn_frames = 0\n"), 2);
    EXPECT_EQ(error_line("[grid]\nseeds = 1.5\n"), 2);
    EXPECT_EQ(error_line("[layout]\ntotal_symbols = 100\n"), 1);
    EXPECT_EQ(error_line("[experiment]\nprofiles = bad\n\n[profile.bad]\nN = 250\n"), 4);
    EXPECT_EQ(error_line("[profile.orphan]\nN = 250\n"), 1);
    EXPECT_EQ(error_line("[channel]\njones = 1 0 0 0 0 0 2 0\n"), 1);
    EXPECT_EQ(error_line("[grid]\ncfo_hz = \n"), 2);
}

TEST(Config, CustomProfile) {
    const auto c = experiment_from_ini(doc("[experiment]\nprofiles = wide\n[profile.wide]\nbase = 5/4\nL = 9\nmu_dd = 0.0005\n"));
    ASSERT_EQ(c.profiles.size(), 1U);
    EXPECT_EQ(c.profiles[0].name, "wide");
    EXPECT_EQ(c.profiles[0].K, 5);
    EXPECT_EQ(c.profiles[0].L, 9);
    EXPECT_EQ(c.profiles[0].mu_dd, 0.0005);
}

TEST(Config, CanonicalTextRoundTrips) {
    const auto a = experiment_from_ini(doc(
        "[experiment]\nprofiles = 9/8, wide\nn_frames = 3\n[profile.wide]\nbase = 2\nL1 = 13\n[grid]\nsnr_db = 12, inf\n"
        "[channel]\njones_theta = 0.3\nclock_phase = 0.25\n"));
    const auto text = a.to_ini();
    const auto b = experiment_from_ini(doc(text));
    EXPECT_EQ(b.to_ini(), text);
    EXPECT_EQ(b.profiles[1].L1, 13);
    EXPECT_TRUE(std::isinf(b.snr_db[1]));
}

TEST(Metrics, BerCrossingLogLinear) {
    const rvec snr{10, 11, 12};
    const rvec ber{1e-1, 1e-2, 1e-3};
    EXPECT_NEAR(ber_crossing(snr, ber, std::pow(10.0, -1.5)), 10.5, 1e-12);
    EXPECT_TRUE(std::isnan(ber_crossing(snr, ber, 1e-4)));
    EXPECT_TRUE(std::isinf(ber_crossing(snr, ber, 0.5)));
}

TEST(Metrics, ConvergenceIndex) {
    rvec m(400);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.01 + std::exp(-static_cast<double>(i) / 30.0);
    const auto idx = mse_convergence_index(m, 0.01, 1.0, 1);
    // 0.01·(10^0.1 − 1) = e^{−i/30}
    EXPECT_EQ(idx, static_cast<std::int64_t>(std::ceil(-30.0 * std::log(0.01 * (std::pow(10.0, 0.1) - 1)))));
    EXPECT_EQ(blocks_to_lock(rvec{0.0, 0.5, 1.0, 1.0, 1.0, 1.0}), 2);
}

TEST(Harness, LoopbackRunIsErrorFreeAndDeterministic) {
    TempDir t("nidsp_bench_loopback");
    {
        std::ofstream(t.path / "cfg.ini") << kLoopback;
    }
    std::ostringstream log, err;
    ASSERT_EQ(cmd_run(t.path / "cfg.ini", log, err, t.path / "a"), 0) << err.str();
    const auto csv = slurp(t.path / "a" / "ber_sweep.csv");
    EXPECT_EQ(csv.rfind("# schema=1\nprofile,snr_db,cfo_hz,seed,ber,mse_final,foe_residual_hz", 0), 0U);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2 + 4);
    EXPECT_EQ(csv.find(",ok,0,67584") != std::string::npos, true);
    EXPECT_EQ(csv.find("failed"), std::string::npos);

    ::setenv(kWorkersEnv, "3", 1);
    ASSERT_EQ(cmd_run(t.path / "cfg.ini", log, err, t.path / "b"), 0);
    ::unsetenv(kWorkersEnv);
    for (const char* f : {"ber_sweep.csv", "mse_trace.csv", "complexity.csv"}) {
        EXPECT_EQ(slurp(t.path / "a" / f), slurp(t.path / "b" / f)) << f;
    }

    std::ostringstream out;
    ASSERT_EQ(cmd_report(t.path / "a", out, err), 0) << err.str();
    EXPECT_NE(out.str().find("ROP analogue"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(t.path / "a" / "sensitivity.csv"));
}

TEST(Harness, InvalidConfigExitsOne) {
    TempDir t("nidsp_bench_invalid");
    {
        std::ofstream(t.path / "cfg.ini") << "[grid]\nseeds = 4, 4\n";
    }
    std::ostringstream log, err;
    EXPECT_EQ(cmd_run(t.path / "cfg.ini", log, err, t.path / "out"), 1);
    EXPECT_NE(err.str().find("cfg.ini:2"), std::string::npos);
    EXPECT_FALSE(std::filesystem::exists(t.path / "out"));
    EXPECT_EQ(cmd_run(t.path / "missing.ini", log, err), 1);
}

TEST(Harness, StageFailureExitsTwoWithTaggedRows) {
    TempDir t("nidsp_bench_failure");
    {
        std::ofstream(t.path / "cfg.ini") << "[experiment]\nmse_trace_len = 0\n[grid]\nsnr_db = -20, 30\n";
    }
    std::ostringstream log, err;
    EXPECT_EQ(cmd_run(t.path / "cfg.ini", log, err, t.path / "out"), 2);
    const auto csv = slurp(t.path / "out" / "ber_sweep.csv");
    EXPECT_NE(csv.find(",failed:"), std::string::npos);
    EXPECT_NE(csv.find(",ok,"), std::string::npos);
}

TEST(Harness, ReportRejectsEmptyDirectory) {
    TempDir t("nidsp_bench_empty");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_report(t.path, out, err), 1);
    EXPECT_NE(err.str().find("ber_sweep.csv"), std::string::npos);
    EXPECT_TRUE(std::filesystem::is_empty(t.path));
    EXPECT_TRUE(out.str().empty());
}

TEST(Harness, ReportRejectsCorruptCsv) {
    TempDir t("nidsp_bench_corrupt");
    {
        std::ofstream(t.path / "cfg.ini") << kLoopback;
    }
    std::ostringstream log, err;
    ASSERT_EQ(cmd_run(t.path / "cfg.ini", log, err, t.path / "r"), 0);
    {
        std::ofstream(t.path / "r" / "mse_trace.csv") << "profile,index\n1,2\n";
    }
    std::ostringstream out, err2;
    EXPECT_EQ(cmd_report(t.path / "r", out, err2), 1);
    EXPECT_NE(err2.str().find("mse_trace.csv"), std::string::npos);
    EXPECT_FALSE(std::filesystem::exists(t.path / "r" / "report.txt"));
}

TEST(Harness, ComplexityCommand) {
    std::ostringstream out, err;
    EXPECT_EQ(cmd_complexity("5/4", out, err), 0);
    EXPECT_NE(out.str().find("40.82"), std::string::npos);
    EXPECT_EQ(cmd_complexity("3/2", out, err), 1);
}
