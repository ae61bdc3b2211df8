#include "specquant/evaluation.hpp"
#include "specquant/plot_export.hpp"
#include "test_support.hpp"

#include <fstream>
#include <set>

namespace specquant {
namespace {

using testing::expect_error;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class Evaluation : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    lib_ = testing::small_library(4);
    clean_ = new SpectraDataset(generate_dataset(*lib_, group_scheme(1), 300, 12.0, std::nullopt, 1));
    noisy_ = new SpectraDataset(
        generate_dataset(*lib_, group_scheme(1), 600, 12.0, NoiseSpec::from_snr_db(30), 2));
  }
  static void TearDownTestSuite() {
    delete clean_;
    delete noisy_;
    lib_.reset();
  }
  static TfSpec tf() {
    TfSpec s;
    s.library = lib_;
    return s;
  }

  static inline std::shared_ptr<const GasLibrary> lib_;
  static inline SpectraDataset* clean_ = nullptr;
  static inline SpectraDataset* noisy_ = nullptr;
};

TEST(KFold, PartitionCoversDisjointly) {
  const auto folds = kfold_partition(23, 5, 9);
  ASSERT_EQ(folds.size(), 5u);
  std::set<std::size_t> seen;
  for (std::size_t f = 0; f < 5; ++f) {
    EXPECT_EQ(folds[f].size(), f == 4 ? 7u : 4u);
    for (auto i : folds[f]) EXPECT_TRUE(seen.insert(i).second);
  }
  EXPECT_EQ(seen.size(), 23u);
  EXPECT_EQ(kfold_partition(23, 5, 9), folds);
  EXPECT_NE(kfold_partition(23, 5, 10), folds);
  const auto train = kfold_training_rows(folds, 2);
  EXPECT_EQ(train.size(), 19u);
  EXPECT_TRUE(std::is_sorted(train.begin(), train.end()));
  for (auto i : folds[2]) EXPECT_FALSE(std::binary_search(train.begin(), train.end(), i));
  expect_error(ErrorCode::kConfiguration, [] { kfold_partition(10, 1, 0); });
  expect_error(ErrorCode::kConfiguration, [] { kfold_partition(3, 5, 0); });
}

TEST(Metrics, GasErrorsOracle) {
  RowMatrix truth(3, 2), pred(3, 2);
  truth << 1, 0, 2, 4, 4, 2;
  pred << 2, 1, 2, 3, 2, 2;
  const auto e = gas_errors(truth, pred);
  EXPECT_NEAR(e.rmse(0), std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_NEAR(e.rmse(1), std::sqrt(2.0 / 3.0), 1e-15);
  EXPECT_NEAR(e.mape(0), (1.0 + 0.0 + 0.5) / 3.0, 1e-15);
  // the zero truth is excluded
  EXPECT_NEAR(e.mape(1), (0.25 + 0.0) / 2.0, 1e-15);
  EXPECT_EQ(e.mape_excluded[1], 1u);
  const Vector guess = random_guess_rmse(truth);
  EXPECT_NEAR(guess(0), std::sqrt(14.0 / 9.0), 1e-15);
}

TEST(Metrics, Quantile) {
  EXPECT_DOUBLE_EQ(quantile({3, 1, 2, 4}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 0.2), 1.8);
  EXPECT_DOUBLE_EQ(quantile({NAN, 1, 3}, 1.0), 3.0);
  EXPECT_TRUE(std::isnan(quantile({}, 0.5)));
}

TEST(Saturation, RecoversSyntheticKnee) {
  const int n = 30;
  Vector c(n), v(n);
  for (int i = 0; i < n; ++i) {
    c(i) = std::pow(10.0, -11.0 + 0.3 * i);
    v(i) = std::max(0.02, 3e-9 / c(i));
  }
  const auto fit = fit_saturation(c, v);
  EXPECT_NEAR(fit.gamma, 0.02, 1e-3);
  EXPECT_NEAR(fit.a, 3e-9, 3e-10);
  EXPECT_NEAR(fit.c_th, 1.5e-7, 2e-8);
  EXPECT_LT(fit.residual, 1e-3);
  EXPECT_GE(fit.plateau_bins, 10u);
  v(3) = NAN;
  v(4) = -1.0;
  EXPECT_NEAR(fit_saturation(c, v).gamma, 0.02, 1e-3);
  expect_error(ErrorCode::kDimension, [&] { fit_saturation(c, v.head(3)); });
}

TEST_F(Evaluation, OracleAndMeanBaselines) {
  const auto oracle = kfold_evaluate(OracleSpec{}, *noisy_);
  EXPECT_EQ(oracle.mean_rmse, 0.0);
  const auto mean = kfold_evaluate(MeanSpec{}, *noisy_);
  for (Eigen::Index k = 0; k < 9; ++k) {
    EXPECT_NEAR(mean.per_gas_rmse(k) / mean.random_guess_rmse(k), 1.0, 0.05);
  }
  EXPECT_EQ(mean.fold_count, 10u);
  EXPECT_EQ(mean.fold_rmse.rows(), 10);
}

TEST_F(Evaluation, NoiselessModelsAreExact) {
  for (const ModelSpec& spec : std::vector<ModelSpec>{LrSpec{}, tf()}) {
    const auto r = kfold_evaluate(spec, *clean_);
    EXPECT_LT(r.mean_rmse, 1e-12) << r.model;
  }
}

TEST_F(Evaluation, FoldsTrainOnlyOnTheirTrainingRows) {
  const KFoldOptions o{4, 3};
  const auto report = kfold_evaluate(LrSpec{}, *noisy_, o);
  const auto folds = kfold_partition(noisy_->size(), 4, 3);
  for (std::size_t f = 0; f < 4; ++f) {
    const auto fitted = fit_model(LrSpec{}, noisy_->subset(kfold_training_rows(folds, f)));
    EXPECT_EQ(report.fold_fingerprints[f], fitted.fingerprint());
    const auto test = noisy_->subset(folds[f]);
    const auto err = gas_errors(test.concentrations, fitted.predict(test));
    EXPECT_NEAR(report.fold_mean_rmse(static_cast<Eigen::Index>(f)), err.rmse.mean(), 1e-15);
  }
}

TEST_F(Evaluation, PcSweepShape) {
  PcSweepOptions o;
  o.max_components = 12;
  o.kfold.folds = 3;
  const auto sweep = sweep_pc_count(*clean_, o);
  ASSERT_EQ(sweep.counts.size(), 12u);
  EXPECT_EQ(sweep.rmse.rows(), 12);
  // noiseless data of nine gases is exact once nine components are used
  EXPECT_LT(sweep.rmse.row(8).maxCoeff(), 1e-12);
  EXPECT_GT(sweep.rmse.row(0).minCoeff(), 1e-8);
  for (Eigen::Index l = 1; l < 12; ++l) {
    EXPECT_NEAR(sweep.delta(l, 0), sweep.rmse(l, 0) - sweep.rmse(l - 1, 0), 1e-18);
  }
  EXPECT_LT(sweep.delta(0, 0), 0.0);
}

TEST_F(Evaluation, TrainingSizeMarksInfeasiblePoints) {
  TrainingSizeOptions o;
  o.sizes = {5, 50};
  o.seeds = {0, 1};
  const auto s = sweep_training_size(*noisy_, {LrSpec{}, tf()}, o);
  EXPECT_TRUE(std::isnan(s.median(0, 0)));
  EXPECT_TRUE(std::isfinite(s.median(0, 1)));
  EXPECT_TRUE(std::isfinite(s.median(1, 0)));
  EXPECT_EQ(s.median_rmse.rows(), 2);
}

TEST_F(Evaluation, SnrSweepRows) {
  const auto other = generate_dataset(*lib_, group_scheme(1), 200, 12.0, NoiseSpec::from_snr_db(10), 3);
  const auto rows = sweep_snr({noisy_, &other}, {LrSpec{}, MeanSpec{}}, {3, 0});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_DOUBLE_EQ(rows[0].snr_db, 30.0);
  EXPECT_LT(rows[0].mean_rmse, rows[2].mean_rmse);
}

TEST_F(Evaluation, OutOfRangeNoiselessTfIsExact) {
  ConcentrationScheme wide = group_scheme(3);
  wide.high = 1e-2;
  const auto train = generate_dataset(*lib_, group_scheme(2), 200, 12.0, std::nullopt, 5);
  const auto test = generate_dataset(*lib_, wide, 200, 12.0, std::nullopt, 6);
  OutOfRangeOptions o;
  o.bins = 8;
  o.kfold.folds = 3;
  o.gases = {0, 3};
  const auto curves = out_of_range_study(train, test, {tf()}, o);
  ASSERT_EQ(curves.size(), 2u);
  for (const auto& c : curves) {
    EXPECT_EQ(c.in_range.centers.size(), 8);
    for (Eigen::Index b = 0; b < 8; ++b) {
      if (std::isfinite(c.out_of_range.mape_mean(b))) EXPECT_LT(c.out_of_range.mape_mean(b), 1e-6);
    }
    std::size_t total = 0;
    for (auto n : c.out_of_range.counts) total += n;
    EXPECT_LE(total, 3u * 200u);
  }
}

TEST_F(Evaluation, ExportIsDeterministic) {
  const auto report = kfold_evaluate(LrSpec{}, *noisy_, {3, 0});
  PcSweepOptions o;
  o.max_components = 4;
  o.kfold.folds = 3;
  PlotBundle bundle = plot_data(report);
  bundle.merge(plot_data(sweep_pc_count(*noisy_, o)));
  testing::TempDir a("plot_a"), b("plot_b");
  bundle.write(a.path());
  bundle.write(b.path());
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(a.path())) {
    ++files;
    EXPECT_EQ(slurp(entry.path()), slurp(b.path() / entry.path().filename()));
  }
  EXPECT_GE(files, 4u);
  EXPECT_TRUE(std::filesystem::exists(a / "manifest.json"));
  EXPECT_NE(slurp(a / "eval_rmse.csv").find("model,gas,fold,rmse"), std::string::npos);
}

TEST(PlotExport, CsvQuoting) {
  PlotTable t{"t.csv", "f", "x", "y", {"name", "value"}, {{std::string("a,b"), 1.5}, {std::string("q\"t"), 2LL}}};
  EXPECT_EQ(format_csv(t), "name,value\n\"a,b\",1.5\n\"q\"\"t\",2\n");
}

}  // namespace
}  // namespace specquant
