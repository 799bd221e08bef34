#include "cli_app.hpp"

#include "fz/container.hpp"
#include "fz/io_corpus.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

using namespace fz;
namespace fs = std::filesystem;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string &text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

class Cli : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("fz_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string &name) const { return (dir_ / name).string(); }

    // zeros with one spike whose Lorenzo delta cannot fit a 16-bit code at eb 1e-3
    std::string spike_file() const {
        std::vector<float> v(4096, 0.0f);
        v[1234] = 100.0f;
        const std::string p = path("spike.f32");
        write_raw_f32(Field(v, {4096}), p);
        return p;
    }

    fs::path dir_;
};

TEST_F(Cli, CompressConstantField) {
    const Result r = run_cli({"compress", "--generate", "constant", "--dims", "1048576", "--eb", "1e-3", "--output",
            path("c.fz"), "--report", "csv"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 2u);
    const double cr = std::stod(rows[1][2]);
    EXPECT_GE(cr, 250.0);
    EXPECT_LE(cr, 256.0);
    EXPECT_EQ(fs::file_size(path("c.fz")), std::stoull(rows[1][1]));
}

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run_cli({"compress", "--generate", "ramp", "--eb", "1e-3", "--output", path("x.fz")}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"compress", "--generate", "ramp", "--dims", "4,4,4,4", "--eb", "1e-3", "--output", path("x.fz")}).code,
            cli::kUsage);
    EXPECT_EQ(run_cli({"compress", "--generate", "ramp", "--dims", "64", "--output", path("x.fz")}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"compress", "--generate", "wobble", "--dims", "64", "--eb", "1e-3", "--output", path("x.fz")}).code,
            cli::kUsage);
    EXPECT_EQ(run_cli({"compress", "--generate", "ramp", "--dims", "64", "--eb", "-1", "--output", path("x.fz")}).code,
            cli::kUsage);
    EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kUsage);
    EXPECT_EQ(run_cli({}).code, cli::kUsage);
    EXPECT_FALSE(fs::exists(path("x.fz")));
    EXPECT_EQ(run_cli({"--help"}).code, cli::kOk);
}

TEST_F(Cli, MissingInputIsIoError) {
    const Result r = run_cli({"compress", "--input", path("nope.f32"), "--dims", "8", "--eb", "1e-3", "--output",
            path("x.fz")});
    EXPECT_EQ(r.code, cli::kIoError);
    EXPECT_FALSE(fs::exists(path("x.fz")));
}

TEST_F(Cli, StrictOverflowFailsWithoutOutput) {
    const std::string in = spike_file();
    const Result r = run_cli({"compress", "--input", in, "--dims", "4096", "--eb", "1e-3", "--eb-mode", "abs", "--strict",
            "--output", path("s.fz")});
    EXPECT_EQ(r.code, cli::kStrictOverflow);
    EXPECT_NE(r.err.find("1234"), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(path("s.fz")));
    EXPECT_FALSE(fs::exists(path("s.fz.tmp")));

    const Result lax = run_cli({"compress", "--input", in, "--dims", "4096", "--eb", "1e-3", "--eb-mode", "abs",
            "--output", path("s.fz"), "--report", "csv"});
    ASSERT_EQ(lax.code, cli::kOk) << lax.err;
    EXPECT_EQ(parse_csv(lax.out)[1][5], "2");

    const Result v = run_cli({"verify", "--input", in, "--dims", "4096", "--eb", "1e-3", "--eb-mode", "abs"});
    EXPECT_EQ(v.code, cli::kOk);
    EXPECT_NE(v.out.find("not guaranteed"), std::string::npos) << v.out;
}

TEST_F(Cli, NonFiniteInputIsInvalidData) {
    std::vector<float> v(64, 1.0f);
    v[5] = std::numeric_limits<float>::infinity();
    write_raw_f32(Field(v, {64}), path("inf.f32"));
    const Result r = run_cli({"compress", "--input", path("inf.f32"), "--dims", "64", "--eb", "1e-3", "--output",
            path("x.fz")});
    EXPECT_EQ(r.code, cli::kInvalidData);
    EXPECT_FALSE(fs::exists(path("x.fz")));
}

TEST_F(Cli, DecompressRoundTrip) {
    ASSERT_EQ(run_cli({"compress", "--generate", "sine-product", "--dims", "20,30,40", "--eb", "1e-3", "--output",
                      path("a.fz")}).code,
            cli::kOk);
    const Result d = run_cli({"decompress", "--input", path("a.fz"), "--output", path("a.f32")});
    ASSERT_EQ(d.code, cli::kOk) << d.err;
    const Field back = read_raw_f32(path("a.f32"), {20, 30, 40});
    const Field orig = generate(GeneratorKind::sine_product, {20, 30, 40}, 1);
    const Container c = parse(read_file(path("a.fz")));
    for (std::size_t i = 0; i < orig.values.size(); ++i)
        ASSERT_LE(std::abs(static_cast<double>(back.values[i]) - orig.values[i]), c.header.eb_abs);

    const Result v = run_cli({"verify", "--generate", "sine-product", "--dims", "20,30,40", "--container", path("a.fz")});
    EXPECT_EQ(v.code, cli::kOk);
    EXPECT_NE(v.out.find("PASS"), std::string::npos);
}

TEST_F(Cli, CorruptContainers) {
    ASSERT_EQ(run_cli({"compress", "--generate", "ramp", "--dims", "5000", "--eb", "1e-3", "--output", path("a.fz")}).code,
            cli::kOk);
    std::vector<std::uint8_t> bytes = read_file(path("a.fz"));

    std::vector<std::uint8_t> bad_magic = bytes;
    bad_magic[0] ^= 0xFF;
    write_file_atomic(path("m.fz"), bad_magic);
    EXPECT_EQ(run_cli({"decompress", "--input", path("m.fz"), "--output", path("m.f32")}).code, cli::kCorruptContainer);
    EXPECT_FALSE(fs::exists(path("m.f32")));

    std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 1);
    write_file_atomic(path("t.fz"), truncated);
    EXPECT_EQ(run_cli({"decompress", "--input", path("t.fz"), "--output", path("t.f32")}).code, cli::kCorruptContainer);
    EXPECT_NE(run_cli({"verify", "--generate", "ramp", "--dims", "5000", "--container", path("t.fz")}).code, cli::kOk);

    EXPECT_EQ(run_cli({"verify", "--generate", "ramp", "--dims", "5001", "--container", path("a.fz")}).code,
            cli::kCorruptContainer);
}

TEST_F(Cli, VerifyPassesOnSmoothFields) {
    for (const char *gen : {"sine-product", "smooth-random-walk", "ramp"})
        for (const char *eb : {"1e-2", "5e-3", "1e-3", "5e-4", "1e-4"}) {
            const Result r = run_cli({"verify", "--generate", gen, "--dims", "24,24,24", "--eb", eb, "--report", "csv"});
            ASSERT_EQ(r.code, cli::kOk) << gen << ' ' << eb << r.err;
            EXPECT_EQ(parse_csv(r.out)[1].back(), "PASS") << gen << ' ' << eb;
        }
}

TEST_F(Cli, VerifyLogTransform) {
    std::vector<float> v(1000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(std::exp(0.01 * static_cast<double>(i)));
    write_raw_f32(Field(v, {1000}), path("pos.f32"));
    const Result r = run_cli({"verify", "--input", path("pos.f32"), "--dims", "1000", "--eb", "1e-3", "--eb-mode", "abs",
            "--log-transform"});
    EXPECT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_NE(r.out.find("log-transformed"), std::string::npos);
    EXPECT_EQ(run_cli({"verify", "--generate", "sine-product", "--dims", "100", "--eb", "1e-3", "--log-transform"}).code,
            cli::kInvalidData);
}

TEST_F(Cli, SweepEmptyListPrintsHeaderOnly) {
    const Result r = run_cli({"sweep", "--generate", "ramp", "--dims", "100", "--ebs", ""});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(r.out, "eb,eb_abs,compression_ratio,bitrate,psnr_db,ssim,max_abs_err,overflow_count,status\n");
}

TEST_F(Cli, SweepIsMonotoneOnSmoothField) {
    const Result r = run_cli({"sweep", "--generate", "sine-product", "--dims", "64,64,64", "--output", path("s.csv")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    const auto rows = parse_csv(std::string(std::istreambuf_iterator<char>(std::ifstream(path("s.csv")).rdbuf()), {}));
    ASSERT_EQ(rows.size(), 6u);
    for (std::size_t i = 2; i < rows.size(); ++i) {
        EXPECT_LE(std::stod(rows[i][2]), std::stod(rows[i - 1][2]));
        EXPECT_GE(std::stod(rows[i][4]), std::stod(rows[i - 1][4]));
        EXPECT_EQ(rows[i][8], "ok");
    }
}

TEST_F(Cli, SweepContinuesPastFailingBound) {
    const std::string in = spike_file();
    // 1e-7 absolute puts the spike beyond the quantization range; 1e-2 works
    const Result r = run_cli({"sweep", "--input", in, "--dims", "4096", "--eb-mode", "abs", "--ebs", "1e-7,1e-2"});
    ASSERT_EQ(r.code, cli::kOk);
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[1].back().rfind("error:", 0), 0u) << rows[1].back();
    EXPECT_EQ(rows[2].back(), "ok");
    EXPECT_FALSE(r.err.empty());
}

TEST_F(Cli, NoiseCompressesWorseThanSmooth) {
    auto cr = [&](const char *gen) {
        const Result r = run_cli({"compress", "--generate", gen, "--dims", "64,64,64", "--eb", "1e-3", "--output",
                path("n.fz"), "--report", "csv"});
        return std::stod(parse_csv(r.out)[1][2]);
    };
    EXPECT_LT(cr("uniform-noise"), cr("sine-product"));
}

TEST_F(Cli, BenchIsWorkerIndependentAndConsistent) {
    auto bench = [&](const char *workers) {
        const Result r = run_cli({"bench", "--generate", "smooth-random-walk", "--dims", "64,64,64", "--eb", "1e-3",
                "--reps", "1", "--workers", workers, "--report", "csv"});
        EXPECT_EQ(r.code, cli::kOk) << r.err;
        return parse_csv(r.out);
    };
    const auto one = bench("1"), four = bench("4");
    const std::string tail1 = one.back()[0], tail4 = four.back()[0];
    const auto hash = [](const std::string &s) { return s.substr(s.find("container_fnv1a=")); };
    EXPECT_EQ(hash(tail1), hash(tail4));

    double stages = 0;
    for (std::size_t i = 1; i <= 4; ++i) stages += std::stod(one[i][1]);
    EXPECT_EQ(one[5][0], "compress");
    EXPECT_LE(stages, std::stod(one[5][1]) * 1.05);
    EXPECT_EQ(run_cli({"bench", "--generate", "ramp", "--dims", "64", "--eb", "1e-3", "--reps", "0"}).code, cli::kUsage);
}

} // namespace
