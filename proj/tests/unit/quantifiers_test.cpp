#include "specquant/evaluation.hpp"
#include "specquant/linear_model.hpp"
#include "specquant/model_io.hpp"
#include "specquant/plsr.hpp"
#include "specquant/training_free.hpp"
#include "test_support.hpp"

#include <numbers>

namespace specquant {
namespace {

using testing::expect_error;

class Quantifiers : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    lib_ = testing::small_library(3);
    clean_ = new SpectraDataset(generate_dataset(*lib_, group_scheme(1), 400, 12.0, std::nullopt, 1));
    noisy_ = new SpectraDataset(
        generate_dataset(*lib_, group_scheme(1), 2000, 12.0, NoiseSpec::from_snr_db(20), 2));
  }
  static void TearDownTestSuite() {
    delete clean_;
    delete noisy_;
    lib_.reset();
  }

  static double max_relative_error(const RowMatrix& predicted, const RowMatrix& truth) {
    return (predicted - truth).cwiseAbs().maxCoeff() / truth.cwiseAbs().maxCoeff();
  }

  static inline std::shared_ptr<const GasLibrary> lib_;
  static inline SpectraDataset* clean_ = nullptr;
  static inline SpectraDataset* noisy_ = nullptr;
};

TEST_F(Quantifiers, OverlapEstimateMatchesDirectProjection) {
  const auto basis = fit_pca(clean_->absorbances, clean_->grid, Flavor::kFunctional, true, 9);
  const auto est = estimate_overlap_noise(basis, *clean_);
  // oracle: b |e_k| <phi_p | e_k>
  const Matrix oracle = 12.0 * basis.components.transpose() * basis.weights().asDiagonal() *
                        lib_->shapes().transpose() * lib_->norms().asDiagonal();
  EXPECT_LT((est.b_psi_eps - oracle).cwiseAbs().maxCoeff(), 1e-9 * oracle.cwiseAbs().maxCoeff());
  EXPECT_LT(est.expected_noise.cwiseAbs().maxCoeff(), 1e-9 * est.mean_projection.cwiseAbs().maxCoeff());
  EXPECT_LT(est.residual_rms, 1e-12);
}

TEST_F(Quantifiers, LrRecoversNoiselessConcentrationsAndInvertsOverlap) {
  const auto basis = fit_pca(clean_->absorbances, clean_->grid, Flavor::kFunctional, true, 9);
  const auto lr = fit_lr(basis, *clean_);
  EXPECT_LT(max_relative_error(predict_lr(lr, clean_->absorbances), clean_->concentrations), 1e-8);
  const auto est = estimate_overlap_noise(basis, *clean_);
  const Matrix product = lr.lambda * est.b_psi_eps;
  EXPECT_LT((product - Matrix::Identity(9, 9)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST_F(Quantifiers, LrUnderdetermined) {
  const auto basis = fit_pca(clean_->absorbances, clean_->grid, Flavor::kFunctional, true, 9);
  expect_error(ErrorCode::kUnderdetermined, [&] { fit_lr(basis, clean_->head(10)); });
  expect_error(ErrorCode::kUnderdetermined, [&] { estimate_overlap_noise(basis, clean_->head(10)); });
}

TEST_F(Quantifiers, DirectModelKeepsLeadingEntries) {
  const auto basis = fit_pca(noisy_->absorbances, noisy_->grid, Flavor::kFunctional, true, 9);
  const auto lr = fit_lr(basis, *noisy_);
  const auto direct = sparsify_to_direct(lr, *noisy_, 2);
  for (Eigen::Index k = 0; k < 9; ++k) {
    EXPECT_EQ(direct.mask.row(k).count(), 2);
    std::vector<std::pair<double, Eigen::Index>> order;
    for (Eigen::Index l = 0; l < 9; ++l) order.emplace_back(-std::abs(lr.lambda(k, l)), l);
    std::stable_sort(order.begin(), order.end());
    EXPECT_TRUE(direct.mask(k, order[0].second));
    EXPECT_TRUE(direct.mask(k, order[1].second));
    for (Eigen::Index l = 0; l < 9; ++l) {
      if (!direct.mask(k, l)) EXPECT_EQ(direct.lambda(k, l), 0.0);
    }
  }
  const auto full = sparsify_to_direct(lr, *noisy_, 9);
  EXPECT_LT((full.lambda - lr.lambda).cwiseAbs().maxCoeff(), 1e-6 * lr.lambda.cwiseAbs().maxCoeff());
  const auto per_gas = sparsify_to_direct(lr, *noisy_, std::vector<int>{1, 2, 3, 1, 1, 1, 1, 1, 9});
  EXPECT_EQ(per_gas.mask.row(8).count(), 9);
  expect_error(ErrorCode::kConfiguration, [&] { sparsify_to_direct(lr, *noisy_, 0); });
  expect_error(ErrorCode::kConfiguration, [&] { sparsify_to_direct(lr, *noisy_, std::vector<int>{1, 2}); });
}

TEST_F(Quantifiers, TfRecoversNoiselessConcentrations) {
  for (bool centered : {false, true}) {
    for (Flavor flavor : {Flavor::kFunctional, Flavor::kPlain}) {
      TfOptions o;
      o.centered = centered;
      o.flavor = flavor;
      const auto tf = fit_tf(*lib_, o);
      EXPECT_LT(max_relative_error(predict_tf(tf, clean_->absorbances), clean_->concentrations), 1e-8);
      // affine form agrees with the solve
      const RowMatrix affine = (tf.lambda() * project_uncentered(tf.basis, clean_->absorbances).transpose()).transpose();
      const RowMatrix with_bias = affine.rowwise() + tf.bias().transpose();
      EXPECT_LT(max_relative_error(with_bias, clean_->concentrations), 1e-8);
    }
  }
}

TEST_F(Quantifiers, TfLearnsPathLengthAndOffset) {
  auto shifted = generate_dataset(*lib_, group_scheme(1), 50, 7.5, std::nullopt, 3);
  shifted.absorbances.array() += 0.002;
  TfOptions o;
  o.b_mode = PathLengthMode::kLearn;
  o.noise_mode = NoiseMode::kLearn;
  const auto tf = fit_tf(*lib_, o, &shifted);
  EXPECT_NEAR(tf.path_length_cm, 7.5, 1e-9);
  EXPECT_LT(max_relative_error(predict_tf(tf, shifted.absorbances), shifted.concentrations), 1e-8);

  o.noise_mode = NoiseMode::kZero;
  const auto b_only = fit_tf(*lib_, o, clean_);
  EXPECT_NEAR(b_only.path_length_cm, 12.0, 1e-9);
  expect_error(ErrorCode::kUnderdetermined, [&] { fit_tf(*lib_, o); });
  expect_error(ErrorCode::kUnderdetermined, [&] {
    const auto one = clean_->head(1);
    fit_tf(*lib_, o, &one);
  });
}

TEST_F(Quantifiers, TfRejectsDegenerateLibrary) {
  std::vector<GasEntry> gases = lib_->gases();
  gases[1].shape = gases[0].shape;
  const GasLibrary dup(lib_->grid(), gases);
  expect_error(ErrorCode::kDegenerateLibrary, [&] { fit_tf(dup, TfOptions{}); });
  // a ridge cannot restore a missing dimension
  TfOptions ridge;
  ridge.ridge = 1e-3;
  expect_error(ErrorCode::kDegenerateLibrary, [&] { fit_tf(dup, ridge); });
}

TEST_F(Quantifiers, SystemNoisePower) {
  const auto tf = fit_tf(*lib_, TfOptions{});
  EXPECT_LT(estimate_system_noise(tf, *clean_).mean_power, 1e-20);
  // per-point standard deviation sigma / ln 10
  const double sigma = noisy_->noise->sigma();
  const double expected = static_cast<double>(lib_->grid()->size()) * sigma * sigma /
                          (std::numbers::ln10 * std::numbers::ln10);
  EXPECT_NEAR(estimate_system_noise(tf, *noisy_).mean_power / expected, 1.0, 0.03);
}

TEST(Plsr, FullRankMatchesOls) {
  std::mt19937_64 gen(5);
  const RowMatrix x = testing::random_matrix(gen, 60, 6);
  const RowMatrix y = testing::random_matrix(gen, 60, 2);
  PlsrOptions o;
  o.components = 6;
  const auto model = fit_plsr(x, y, o);
  // oracle: normal equations on centered data
  const Matrix xc = x.rowwise() - x.colwise().mean();
  const Matrix yc = y.rowwise() - y.colwise().mean();
  const Matrix b = (xc.transpose() * xc).ldlt().solve(xc.transpose() * yc);
  EXPECT_LT((model.regression - b).cwiseAbs().maxCoeff(), 1e-8);
  const RowMatrix pred = predict_plsr(model, x);
  const RowMatrix expected = (xc * b).rowwise() + y.colwise().mean();
  EXPECT_LT((pred - expected).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Plsr, SingleComponentWeightIsCovarianceDirection) {
  std::mt19937_64 gen(6);
  const RowMatrix x = testing::random_matrix(gen, 40, 10);
  const RowMatrix y = testing::random_matrix(gen, 40, 1);
  PlsrOptions o;
  o.components = 1;
  const auto model = fit_plsr(x, y, o);
  const Matrix xc = x.rowwise() - x.colwise().mean();
  const Vector yc = y.col(0).array() - y.col(0).mean();
  const Vector w = (xc.transpose() * yc).normalized();
  EXPECT_NEAR(std::abs(model.x_weights.col(0).dot(w)), 1.0, 1e-10);
}

TEST(PlsrProperty, ScoresOrthogonalAndWeightsOrthonormal) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 10; ++trial) {
    const auto n = static_cast<Eigen::Index>(20 + gen() % 30);
    const RowMatrix x = testing::random_matrix(gen, n, 12);
    const RowMatrix y = testing::random_matrix(gen, n, 3);
    PlsrOptions o;
    o.components = 5;
    o.warm_start = trial % 2 == 0;
    const auto model = fit_plsr(x, y, o);
    const Matrix tt = model.train_scores.transpose() * model.train_scores;
    const Matrix ww = model.x_weights.transpose() * model.x_weights;
    EXPECT_LT((ww - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-8);
    for (Eigen::Index i = 0; i < 5; ++i) {
      for (Eigen::Index j = 0; j < 5; ++j) {
        if (i != j) EXPECT_LT(std::abs(tt(i, j)), 1e-8 * std::sqrt(tt(i, i) * tt(j, j)));
      }
    }
  }
}

TEST(Plsr, ErrorsAndEarlyStop) {
  std::mt19937_64 gen(8);
  const RowMatrix x = testing::random_matrix(gen, 30, 8);
  const RowMatrix y = testing::random_matrix(gen, 30, 3);
  PlsrOptions o;
  o.components = 3;
  o.max_iterations = 1;
  o.warm_start = false;
  expect_error(ErrorCode::kConvergence, [&] { fit_plsr(x, y, o); });
  o.max_iterations = 500;
  o.components = 40;
  expect_error(ErrorCode::kBound, [&] { fit_plsr(x, y, o); });
  expect_error(ErrorCode::kDimension, [&] { fit_plsr(x, y.topRows(5), o); });

  // rank-2 X stops after two components
  const Matrix f = testing::random_matrix(gen, 30, 2);
  const RowMatrix low = f * testing::random_matrix(gen, 2, 8);
  o.components = 6;
  EXPECT_EQ(fit_plsr(low, y, o).components(), 2);
}

class ModelRoundTrip : public Quantifiers, public ::testing::WithParamInterface<int> {};

TEST_P(ModelRoundTrip, SaveLoadIsBitExact) {
  std::vector<ModelSpec> specs{LrSpec{}, DirectSpec{LrSpec{}, 2}, TfSpec{}, PlsrSpec{}, MeanSpec{}};
  std::get<TfSpec>(specs[2]).library = lib_;
  std::get<TfSpec>(specs[2]).options.noise_mode = NoiseMode::kLearn;
  std::get<PlsrSpec>(specs[3]).options.components = 8;
  const auto& spec = specs[static_cast<std::size_t>(GetParam())];
  const QuantModel model = *fit_model(spec, noisy_->head(500)).model;
  testing::TempDir dir("model");
  save_model(model, dir.path());
  const QuantModel back = load_model(dir.path());
  EXPECT_EQ(model_kind(back), model_kind(model));
  EXPECT_EQ(model_fingerprint(back), model_fingerprint(model));
  EXPECT_EQ(predict(back, noisy_->absorbances), predict(model, noisy_->absorbances));
}

INSTANTIATE_TEST_SUITE_P(Kinds, ModelRoundTrip, ::testing::Range(0, 5));

TEST_F(Quantifiers, TamperedModelFailsFingerprint) {
  const QuantModel model = *fit_model(LrSpec{}, noisy_->head(300)).model;
  testing::TempDir dir("tampered");
  save_model(model, dir.path());
  Matrix kappa = read_matrix_csv(dir / "kappa.csv", false);
  kappa(0, 0) *= 1.5;
  write_matrix_csv(dir / "kappa.csv", kappa);
  expect_error(ErrorCode::kFingerprint, [&] { load_model(dir.path()); });
}

}  // namespace
}  // namespace specquant
