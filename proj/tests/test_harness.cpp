#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "lpcoreset/experiment.hpp"
#include "lpcoreset/matrix_io.hpp"
#include "lpcoreset/synthetic.hpp"

using namespace lpcoreset;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "lpcoreset_test_harness";
    fs::create_directories(dir);
    return dir / name;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream os(p, std::ios::binary);
    os << bytes;
}

std::string expect_parse_error(const std::string& bytes) {
    try {
        parse_matrix(bytes, "x");
    } catch (const ParseError& e) {
        return e.what();
    }
    ADD_FAILURE() << "no ParseError";
    return "";
}

} // namespace

TEST(LoadMatrix, Csv) {
    const fs::path p = scratch("a.csv");
    write_bytes(p, "1,2\n3,4\n");
    Matrix want(2, 2);
    want << 1, 2, 3, 4;
    EXPECT_EQ(load_matrix(p.string()).values(), want);
}

TEST(LoadMatrix, CsvWhitespaceAndTrailingBlankLines) {
    EXPECT_EQ(parse_matrix(" 1 , -2.5e3\r\n3,4\n\n\n").values()(0, 1), -2500.0);
}

TEST(LoadMatrix, EmptyFileWarns) {
    const fs::path p = scratch("empty.csv");
    write_bytes(p, "");
    std::string warning;
    const DenseMatrix m = load_matrix(p.string(), &warning);
    EXPECT_EQ(m.rows(), 0u);
    EXPECT_EQ(m.cols(), 0u);
    EXPECT_FALSE(warning.empty());
}

TEST(LoadMatrix, MissingFile) {
    EXPECT_THROW(load_matrix(scratch("does_not_exist.csv").string()), UsageError);
}

TEST(LoadMatrix, BinaryRoundTripIsBitExact) {
    Engine gen(1);
    Matrix m = gaussian_matrix(100, 7, gen);
    m(3, 4) = -0.0;
    m(5, 6) = 1e-310;
    const DenseMatrix dm(m);
    const fs::path p = scratch("m.bin");
    save_matrix(p.string(), dm, MatrixFormat::Binary);
    const DenseMatrix back = load_matrix(p.string());
    ASSERT_EQ(back.rows(), 100u);
    ASSERT_EQ(back.cols(), 7u);
    EXPECT_EQ(std::memcmp(back.values().data(), m.data(), sizeof(double) * 700), 0);
}

TEST(LoadMatrix, BinaryHeaderLayout) {
    Matrix m(1, 2);
    m << 1.0, 2.0;
    const std::string bytes = format_binary(DenseMatrix(m));
    ASSERT_EQ(bytes.size(), kBinaryHeaderLen + 16);
    EXPECT_EQ(bytes.substr(0, 5), "LPCM1");
    EXPECT_EQ(static_cast<unsigned char>(bytes[5]), 1);
    EXPECT_EQ(static_cast<unsigned char>(bytes[13]), 2);
    double v;
    std::memcpy(&v, bytes.data() + kBinaryHeaderLen + 8, 8);
    EXPECT_EQ(v, 2.0);
}

TEST(LoadMatrix, CsvRoundTripIsExact) {
    Engine gen(2);
    const DenseMatrix m(gaussian_matrix(20, 3, gen));
    EXPECT_EQ(parse_matrix(format_csv(m)).values(), m.values());
}

TEST(ParseErrors, CsvReportsLine) {
    EXPECT_NE(expect_parse_error("1,2\n3\n").find("line 2"), std::string::npos);
    EXPECT_NE(expect_parse_error("1,2\n3,abc\n").find("line 2"), std::string::npos);
    EXPECT_NE(expect_parse_error("1,,2\n").find("line 1"), std::string::npos);
    EXPECT_NE(expect_parse_error("1,2\n\n3,4\n").find("line 3"), std::string::npos);
    EXPECT_NE(expect_parse_error("1,nan\n").find("line 1"), std::string::npos);
}

TEST(ParseErrors, BinaryReportsOffset) {
    Matrix m(2, 2);
    m << 1, 2, 3, 4;
    const std::string good = format_binary(DenseMatrix(m));
    EXPECT_NE(expect_parse_error(good.substr(0, 10)).find("offset"), std::string::npos);
    EXPECT_NE(expect_parse_error(good.substr(0, good.size() - 3)).find("offset"), std::string::npos);
    std::string bad = good;
    const double inf = HUGE_VAL;
    std::memcpy(&bad[kBinaryHeaderLen + 16], &inf, 8);
    const std::string msg = expect_parse_error(bad);
    EXPECT_NE(msg.find("offset " + std::to_string(kBinaryHeaderLen + 16)), std::string::npos) << msg;
}

TEST(MatrixFormat, Names) {
    EXPECT_EQ(parse_matrix_format("csv"), MatrixFormat::Csv);
    EXPECT_EQ(parse_matrix_format("bin"), MatrixFormat::Binary);
    EXPECT_THROW(parse_matrix_format("xml"), UsageError);
}

TEST(Synthetic, LowRankWithoutNoiseHasExactRank) {
    const DenseMatrix m = low_rank_plus_noise(80, 12, 3, 0.0, 3);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(m.values())};
    const Vector s = svd.singularValues();
    EXPECT_LE(s[3], 1e-10 * s[0]);
    EXPECT_GT(s[2], 1e-3 * s[0]);
}

TEST(Synthetic, SingleComponentAtOriginZeroVariance) {
    const DenseMatrix m = gaussian_mixture(50, 4, 1, 0.0, 0.0, 4);
    EXPECT_EQ(m.values().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Synthetic, HeavyTailOutlierCount) {
    SyntheticParams prm;
    prm.n = 1000;
    prm.d = 4;
    prm.responses = 2;
    prm.outlier_fraction = 0.05;
    prm.outlier_magnitude = 1e3;
    prm.base_noise = 1.0;
    const HeavyTailInstance h = heavy_tail_residual(prm, 5);
    const Matrix r = h.B.values() - h.A.values() * h.X0.values();
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < r.rows(); ++i) count += r.row(i).cwiseAbs().minCoeff() == 1e3;
    EXPECT_EQ(count, 50u);
    EXPECT_EQ(h.outlier_rows.size(), 50u);
    const DenseMatrix ab = generate_synthetic(SyntheticKind::HeavyTailResidual, prm, 5);
    EXPECT_EQ(ab.cols(), 6u);
}

TEST(Synthetic, DeterministicAndKindNames) {
    SyntheticParams prm;
    EXPECT_EQ(generate_synthetic(SyntheticKind::GaussianMixture, prm, 9),
              generate_synthetic(SyntheticKind::GaussianMixture, prm, 9));
    EXPECT_EQ(parse_synthetic_kind("low-rank-plus-noise"), SyntheticKind::LowRankPlusNoise);
    EXPECT_THROW(parse_synthetic_kind("mnist"), UsageError);
    prm.n = 0;
    EXPECT_THROW(generate_synthetic(SyntheticKind::HeavyTailResidual, prm, 1), UsageError);
}

TEST(Synthetic, DigitSurrogateShapeAndRange) {
    const DenseMatrix m = digits_surrogate(200, 6);
    EXPECT_EQ(m.cols(), kDigitFeatures);
    EXPECT_GE(m.values().minCoeff(), 0.0);
    EXPECT_LE(m.values().maxCoeff(), 1.0);
    EXPECT_GT(m.values().maxCoeff(), 0.5);
    // Columns are a pure function of (seed, row, column).
    const DenseMatrix cols = digits_surrogate_columns(200, {5, 300, 300}, 6);
    EXPECT_EQ(cols.values().col(1), m.values().col(300));
    EXPECT_EQ(cols.values().col(2), m.values().col(300));
}

TEST(Experiment, FullSampleHasNoError) {
    ExperimentConfig cfg;
    cfg.n = 300;
    cfg.dims = {20};
    cfg.sample_sizes = {300, 1000};
    cfg.seeds = 2;
    for (const PowerMeansRow& r : run_power_means_experiment(cfg)) EXPECT_LE(std::fabs(r.relative_error), 1e-12);
}

TEST(Experiment, MedianDecreasesOverSweep) {
    ExperimentConfig cfg;
    cfg.n = 20000;
    cfg.dims = {50};
    cfg.sample_sizes = {50, 500, 5000};
    cfg.seeds = 5;
    const auto rows = run_power_means_experiment(cfg);
    EXPECT_EQ(rows.size(), 15u);
    const auto med = median_by_cell(rows);
    EXPECT_GT(med.at({50, 50}), med.at({50, 500}));
    EXPECT_GT(med.at({50, 500}), med.at({50, 5000}));
    for (const PowerMeansRow& r : rows) EXPECT_GE(r.relative_error, -1e-9);
}

TEST(Experiment, TableFormatAndDeterminism) {
    ExperimentConfig cfg;
    cfg.n = 500;
    cfg.dims = {10};
    cfg.sample_sizes = {20};
    cfg.seeds = 2;
    const std::string t1 = format_power_means_table(run_power_means_experiment(cfg));
    const std::string t2 = format_power_means_table(run_power_means_experiment(cfg));
    EXPECT_EQ(t1, t2);
    EXPECT_EQ(t1.rfind("m,sample_size,relative_error,seed\n10,20,", 0), 0u);
    EXPECT_EQ(std::count(t1.begin(), t1.end(), '\n'), 3);
}

TEST(Experiment, UserData) {
    Engine gen(7);
    const DenseMatrix data(gaussian_matrix(400, 6, gen));
    ExperimentConfig cfg;
    cfg.dims = {3};
    cfg.sample_sizes = {400};
    cfg.seeds = 1;
    const auto rows = run_power_means_experiment(cfg, &data);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_LE(std::fabs(rows[0].relative_error), 1e-12);
}

TEST(ExperimentConfig, Validation) {
    ExperimentConfig cfg;
    cfg.task = Task::Strong;
    EXPECT_THROW(cfg.validate(), UsageError);
    cfg.inputs = {"a.csv"};
    cfg.target = "b.csv";
    EXPECT_NO_THROW(cfg.validate());
    cfg.eps = 1.5;
    EXPECT_THROW(cfg.validate(), UsageError);
    ExperimentConfig bench;
    bench.sample_sizes = {};
    EXPECT_THROW(bench.validate(), UsageError);
    bench.sample_sizes = {0};
    EXPECT_THROW(bench.validate(), UsageError);
}
