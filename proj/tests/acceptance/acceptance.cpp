// Desk-scale acceptance suite: one PASS/FAIL line per criterion.

#include "specquant/dataset_io.hpp"
#include "specquant/evaluation.hpp"
#include "specquant/gas_library.hpp"
#include "specquant/kernels.hpp"
#include "specquant/model_io.hpp"
#include "specquant/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

using namespace specquant;

namespace {

constexpr std::size_t kSamples = 10000;
constexpr std::uint64_t kLibrarySeed = 1;
constexpr double kRandomGuessUm = 10.0 / 3.4641016151377544;  // 10 / sqrt(12)
constexpr double kMicro = 1e6;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

class Fixture {
 public:
  Fixture()
      : grid_(std::make_shared<const WavelengthGrid>(WavelengthGrid::default_mid_ir())),
        library_(std::make_shared<const GasLibrary>(synthesize_library(kLibrarySeed, grid_))) {}

  const std::shared_ptr<const GasLibrary>& library() const { return library_; }

  const SpectraDataset& group1(double snr_db) {
    return cached("g1-" + std::to_string(snr_db), [&] {
      return generate_dataset(*library_, group_scheme(1), kSamples, kDefaultPathLengthCm,
                              NoiseSpec::from_snr_db(snr_db), 100 + static_cast<std::uint64_t>(snr_db));
    });
  }

  const SpectraDataset& group2(double snr_db) {
    return cached("g2-" + std::to_string(snr_db), [&] {
      return generate_dataset(*library_, group_scheme(2), kSamples, kDefaultPathLengthCm,
                              NoiseSpec::from_snr_db(snr_db), 200 + static_cast<std::uint64_t>(snr_db));
    });
  }

  // Group III with the wide 10 pM - 1 M range used for the out-of-range study.
  const SpectraDataset& group3_wide(double snr_db) {
    return cached("g3-" + std::to_string(snr_db), [&] {
      ConcentrationScheme scheme = group_scheme(3);
      scheme.high = 1.0;
      return generate_dataset(*library_, scheme, kSamples, kDefaultPathLengthCm,
                              NoiseSpec::from_snr_db(snr_db), 300 + static_cast<std::uint64_t>(snr_db));
    });
  }

  TfSpec tf(NoiseMode noise, PathLengthMode b_mode = PathLengthMode::kKnown) const {
    TfSpec spec;
    spec.library = library_;
    spec.options.noise_mode = noise;
    spec.options.b_mode = b_mode;
    return spec;
  }

 private:
  const SpectraDataset& cached(const std::string& key, const std::function<SpectraDataset()>& make) {
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, make()).first;
    return it->second;
  }

  GridPtr grid_;
  std::shared_ptr<const GasLibrary> library_;
  std::map<std::string, SpectraDataset> cache_;
};

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

// 1. Minimum PC count.
void criterion_1(Fixture& fx, Outcome& out) {
  {
    const auto& ds = fx.group1(40);
    const auto basis = fit_pca(ds.absorbances, ds.grid, Flavor::kFunctional, true, 20);
    const auto ev = explained_variance(basis, 20);
    const double ratio = ev.individual(9) / ev.individual(8);
    out.detail << "40dB: CEV(9)=" << ev.cumulative(8) << " IEV10/IEV9=" << ratio
               << " IEV10=" << ev.individual(9) << "; ";
    out.check(ev.cumulative(8) >= 0.999, "CEV(9) >= 0.999 at 40 dB");
    out.check(ratio < 0.05, "IEV(10)/IEV(9) < 0.05 at 40 dB");
  }
  {
    const auto& ds = fx.group1(10);
    const auto basis = fit_pca(ds.absorbances, ds.grid, Flavor::kFunctional, true, 20);
    const auto ev = explained_variance(basis, 20);
    const double median_tail = quantile(std::vector<double>(ev.individual.begin() + 9, ev.individual.end()), 0.5);
    const double worst = ev.individual.segment(1, 19).maxCoeff();
    out.detail << "10dB: max IEV(2..20)/median tail=" << worst / median_tail;
    out.check(worst <= 2.0 * median_tail, "flat IEV at 10 dB");
  }
}

// 2. Reconstruction plateau.
void criterion_2(Fixture& fx, Outcome& out) {
  for (double snr : {30.0, 40.0, 10.0}) {
    const auto& ds = fx.group1(snr);
    const auto basis = fit_pca(ds.absorbances, ds.grid, Flavor::kFunctional, true, 20);
    const RowMatrix scores = project(basis, ds.absorbances).scores;
    std::vector<double> rmse(21);
    for (Eigen::Index l = 1; l <= 20; ++l) {
      rmse[static_cast<std::size_t>(l)] =
          reconstruction_metrics(ds.absorbances, reconstruct(basis, scores, l)).rmse;
    }
    if (snr == 10.0) {
      out.detail << "10dB: RMSE(20)/RMSE(1)=" << rmse[20] / rmse[1];
      out.check(rmse[20] / rmse[1] > 0.8, "RMSE(20)/RMSE(1) > 0.8 at 10 dB");
      continue;
    }
    bool decreasing = true;
    for (std::size_t l = 2; l <= 9; ++l) decreasing = decreasing && rmse[l] < rmse[l - 1];
    double change = 0.0;
    for (std::size_t l = 10; l <= 20; ++l) change = std::max(change, relative(rmse[l], rmse[9]));
    out.detail << snr << "dB: RMSE(9)=" << rmse[9] << " max change 9..20=" << change << "; ";
    out.check(decreasing, "strictly decreasing RMSE for L = 1..9");
    out.check(change < 0.05, "RMSE change < 5% for L = 9..20");
  }
}

// 3. Quantification saturation at L <= 9.
void criterion_3(Fixture& fx, Outcome& out) {
  for (double snr : {30.0, 40.0}) {
    PcSweepOptions o;
    o.min_components = 1;
    o.max_components = 20;
    const auto sweep = sweep_pc_count(fx.group1(snr), o);
    double worst = 0.0;
    for (Eigen::Index g = 0; g < sweep.rmse.cols(); ++g) {
      const double at9 = sweep.rmse(8, g);
      const double best = sweep.rmse.col(g).minCoeff();
      worst = std::max(worst, at9 / best - 1.0);
    }
    out.detail << snr << "dB: worst RMSE(9)/min-1=" << worst << "; ";
    out.check(worst <= 0.05, "per-gas RMSE(9) within 5% of the minimum");
  }
}

// 4. Random-guess line.
void criterion_4(Fixture& fx, Outcome& out) {
  const auto mean_report = kfold_evaluate(MeanSpec{}, fx.group1(40));
  double worst = 0.0;
  for (double r : mean_report.per_gas_rmse) worst = std::max(worst, relative(r * kMicro, kRandomGuessUm));
  out.detail << "mean predictor worst deviation=" << worst << "; 10dB mean RMSE (uM):";
  out.check(worst <= 0.02, "mean predictor RMSE = 10/sqrt(12) uM +- 2%");

  const std::vector<ModelSpec> models{LrSpec{}, DirectSpec{}, fx.tf(NoiseMode::kLearn), PlsrSpec{}, MeanSpec{}};
  for (const auto& spec : models) {
    const auto report = kfold_evaluate(spec, fx.group1(10));
    out.detail << " " << report.model << "=" << report.mean_rmse * kMicro;
    out.check(report.mean_rmse * kMicro >= 0.9 * kRandomGuessUm, report.model + " >= 0.9 x random guess");
  }
}

// 5. Model ordering TF <= LR <= PLSR at 40 dB.
void criterion_5(Fixture& fx, Outcome& out) {
  const auto& ds = fx.group1(40);
  const auto tf = kfold_evaluate(fx.tf(NoiseMode::kZero), ds);
  const auto lr = kfold_evaluate(LrSpec{}, ds);
  const auto plsr = kfold_evaluate(PlsrSpec{}, ds);
  int tf_le_lr = 0, lr_le_plsr = 0;
  for (std::size_t f = 0; f < tf.fold_count; ++f) {
    const auto fi = static_cast<Eigen::Index>(f);
    tf_le_lr += tf.fold_mean_rmse(fi) <= lr.fold_mean_rmse(fi);
    lr_le_plsr += lr.fold_mean_rmse(fi) <= plsr.fold_mean_rmse(fi);
  }
  out.detail << "mean RMSE (uM) TF=" << tf.mean_rmse * kMicro << " LR=" << lr.mean_rmse * kMicro
             << " PLSR=" << plsr.mean_rmse * kMicro << "; folds TF<=LR " << tf_le_lr
             << "/10, LR<=PLSR " << lr_le_plsr << "/10";
  out.check(tf.mean_rmse <= lr.mean_rmse && lr.mean_rmse <= plsr.mean_rmse, "pooled ordering");
  out.check(tf_le_lr >= 8, "TF <= LR on >= 8 folds");
  out.check(lr_le_plsr >= 8, "LR <= PLSR on >= 8 folds");
}

// 6. TF sample efficiency.
void criterion_6(Fixture& fx, Outcome& out) {
  TfSpec tf = fx.tf(NoiseMode::kLearn);
  tf.calibration_samples = 10;
  TrainingSizeOptions o;
  o.sizes = {10, 12, 15, 20, 30, 40, 49, 100, 200, 500};
  o.seeds = {0, 1, 2, 3, 4};
  const auto sweep = sweep_training_size(fx.group1(40), {tf, LrSpec{}}, o);
  const double tf10 = sweep.median(0, 0);
  std::size_t match = 0;
  for (std::size_t z = 0; z < o.sizes.size(); ++z) {
    const double lr = sweep.median(1, z);
    if (std::isfinite(lr) && lr <= tf10) {
      match = o.sizes[z];
      break;
    }
  }
  out.detail << "TF(10 samples) median RMSE=" << tf10 * kMicro << " uM; LR first matches at "
             << (match ? std::to_string(match) : std::string("> 500")) << " samples; LR medians (uM):";
  for (std::size_t z = 0; z < o.sizes.size(); ++z) out.detail << " " << o.sizes[z] << ":" << sweep.median(1, z) * kMicro;
  out.check(tf10 * kMicro < 0.1, "TF with 10 calibration samples < 0.1 uM");
  out.check(match == 0 || match >= 50, "LR needs >= 5x more samples");
}

// 7. Diagonal dominance and CH4/HCl coupling.
void criterion_7(Fixture& fx, Outcome& out) {
  const auto& ds = fx.group1(40);
  const auto fitted = fit_model(LrSpec{}, ds);
  const auto& lr = std::get<LrModel>(*fitted.model);
  const Matrix m = (fx.library()->norms().asDiagonal() * lr.lambda).transpose();
  int dominant = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double diag = std::abs(m(r, r));
    dominant += diag > m.row(r).cwiseAbs().sum() - diag;
  }
  out.detail << "diagonally dominant rows " << dominant << "/9; ";
  out.check(dominant >= 7, ">= 7 diagonally dominant rows");

  const auto m1 = kfold_evaluate(DirectSpec{LrSpec{}, 1}, ds);
  const auto m2 = kfold_evaluate(DirectSpec{LrSpec{}, 2}, ds);
  for (const char* gas : {"CH4", "HCl"}) {
    const auto g = static_cast<Eigen::Index>(fx.library()->index_of(gas));
    const double gain = 1.0 - m2.per_gas_rmse(g) / m1.per_gas_rmse(g);
    out.detail << gas << " m=1->2 improvement=" << gain << " ";
    out.check(gain > 0.10, std::string(gas) + " improves > 10% from m=1 to m=2");
  }
}

// 8. Out-of-range behaviour.
void criterion_8(Fixture& fx, Outcome& out) {
  const std::size_t gas = fx.library()->index_of("N2O");
  for (double snr : {20.0, 30.0}) {
    OutOfRangeOptions o;
    o.gases = {gas};
    const auto curves = out_of_range_study(fx.group2(snr), fx.group3_wide(snr),
                                           {fx.tf(NoiseMode::kLearn, PathLengthMode::kLearn)}, o);
    const auto& c = curves.front();
    // shared bins: both populations populated
    int shared = 0, agree = 0;
    for (Eigen::Index b = 0; b < c.in_range.centers.size(); ++b) {
      if (c.in_range.counts[static_cast<std::size_t>(b)] < 100 ||
          c.out_of_range.counts[static_cast<std::size_t>(b)] < 100) {
        continue;
      }
      ++shared;
      const double tol = 2.0 * std::max(c.in_range.mape_std(b), c.out_of_range.mape_std(b));
      agree += std::abs(c.in_range.mape_mean(b) - c.out_of_range.mape_mean(b)) <= tol;
    }
    // inverse-proportional branch: bins well below the knee
    std::vector<double> products;
    for (Eigen::Index b = 0; b < c.out_of_range.centers.size(); ++b) {
      const double center = c.out_of_range.centers(b);
      if (c.out_of_range.counts[static_cast<std::size_t>(b)] >= 100 && center < c.fit.c_th / 10.0 &&
          std::isfinite(c.out_of_range.median_ape(b))) {
        products.push_back(c.out_of_range.median_ape(b) * center);
      }
    }
    const double mid = quantile(products, 0.5);
    double spread = 0.0;
    for (double p : products) spread = std::max(spread, relative(p, mid));
    out.detail << snr << "dB: agree " << agree << "/" << shared << " bins, 1/c bins " << products.size()
               << " max dev " << spread << ", gamma=" << c.fit.gamma << " c_th=" << c.fit.c_th
               << " residual/gamma=" << c.fit.residual / c.fit.gamma << " plateau bins "
               << c.fit.plateau_bins << "; ";
    out.check(shared > 0 && agree == shared, "in-range and out-of-range MAPE agree");
    out.check(products.size() >= 3 && spread <= 0.25, "MAPE ~ 1/c within 25% on the low branch");
    out.check(c.fit.gamma > 0.0 && c.fit.plateau_bins >= 2 && c.fit.residual < 0.2 * c.fit.gamma,
              "finite plateau with residual < 20%");
  }
}

// 9. Property suite.
void criterion_9(Fixture& fx, Outcome& out) {
  // PCA orthonormality
  {
    const auto& ds = fx.group1(40);
    const auto basis = fit_pca(ds.absorbances.topRows(2000), ds.grid, Flavor::kFunctional, true, 20);
    const Matrix gram = basis.components.transpose() * basis.weights().asDiagonal() * basis.components;
    const double err = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    out.detail << "orthonormality " << err << "; ";
    out.check(err < 1e-8, "PCA orthonormality");
  }
  // Eigenvalue oracle on random 20 x 15 matrices
  {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> normal;
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      RowMatrix x(20, 15);
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(gen);
      auto grid = std::make_shared<const WavelengthGrid>(WavelengthGrid::uniform(1.0, 2.0, 15));
      const auto basis = fit_pca(x, grid, Flavor::kPlain, true, 15);
      const RowMatrix centered = x.rowwise() - x.colwise().mean();
      const Matrix cov = centered.transpose() * centered / 19.0;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
      const Vector ref = eig.eigenvalues().reverse();
      for (Eigen::Index l = 0; l < basis.size(); ++l) worst = std::max(worst, relative(basis.eigenvalues(l), ref(l)));
    }
    out.detail << "eigen oracle " << worst << "; ";
    out.check(worst < 1e-8, "eigenvalue oracle");
  }
  // Noiseless exact recovery
  {
    const auto& lib = *fx.library();
    const auto clean = generate_dataset(lib, group_scheme(1), 500, kDefaultPathLengthCm, std::nullopt, 9);
    const auto tf = fit_tf(lib, TfOptions{});
    const RowMatrix tf_pred = predict_tf(tf, clean.absorbances);
    const double tf_err = (tf_pred - clean.concentrations).cwiseAbs().maxCoeff() / clean.concentrations.cwiseAbs().maxCoeff();
    const auto lr = std::get<LrModel>(*fit_model(LrSpec{}, clean).model);
    const RowMatrix lr_pred = predict_lr(lr, clean.absorbances);
    const double lr_err = (lr_pred - clean.concentrations).cwiseAbs().maxCoeff() / clean.concentrations.cwiseAbs().maxCoeff();
    out.detail << "TF recovery " << tf_err << " LR recovery " << lr_err << "; ";
    out.check(tf_err < 1e-8 && lr_err < 1e-8, "noiseless TF and LR recovery");
  }
  // Forward-model linearity
  {
    const auto& lib = *fx.library();
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1e-5);
    Vector c1(9), c2(9);
    for (int k = 0; k < 9; ++k) {
      c1(k) = u(gen);
      c2(k) = u(gen);
    }
    const double alpha = 2.75;
    const Vector lhs = forward_spectrum(lib, alpha * c1 + c2, 12.0, std::nullopt, 0).values();
    const Vector rhs = alpha * forward_spectrum(lib, c1, 12.0, std::nullopt, 0).values() +
                       forward_spectrum(lib, c2, 12.0, std::nullopt, 0).values();
    const double err = (lhs - rhs).norm() / rhs.norm();
    out.detail << "linearity " << err << "; ";
    out.check(err < 1e-12, "forward-model linearity");
  }
  // Noise bias: E{-log10(1 + rho)} ~ sigma^2 / (2 ln 10)
  {
    std::vector<double> row(10'000'000, 0.0);
    kernels::add_intensity_noise(row.data(), row.size(), 0.1, 77);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(row.size());
    const double expected = 0.01 / (2.0 * std::numbers::ln10);
    out.detail << "noise bias ratio " << mean / expected << "; ";
    out.check(relative(mean, expected) <= 0.05, "noise bias within 5%");
  }
  // Serialization round trips
  {
    const auto dir = std::filesystem::temp_directory_path() / "specquant_acceptance";
    std::filesystem::remove_all(dir);
    const auto ds = fx.group1(40).head(300);
    save_dataset(ds, dir / "ds.bin");
    const auto back = load_dataset(dir / "ds.bin", fx.library().get());
    const bool ds_ok = back.absorbances == ds.absorbances && back.concentrations == ds.concentrations;
    const auto basis = fit_pca(ds.absorbances, ds.grid, Flavor::kFunctional, true, 12);
    save_basis(basis, dir / "basis");
    const auto basis_back = load_basis(dir / "basis");
    const bool basis_ok = basis_back.components == basis.components && basis_back.mean == basis.mean &&
                          basis_back.eigenvalues == basis.eigenvalues;
    bool models_ok = true;
    for (const ModelSpec& spec : std::vector<ModelSpec>{LrSpec{}, DirectSpec{}, fx.tf(NoiseMode::kLearn), PlsrSpec{}, MeanSpec{}}) {
      const QuantModel model = *fit_model(spec, ds).model;
      save_model(model, dir / "model");
      const QuantModel loaded = load_model(dir / "model");
      models_ok = models_ok && model_fingerprint(loaded) == model_fingerprint(model) &&
                  predict(loaded, ds.absorbances) == predict(model, ds.absorbances);
      std::filesystem::remove_all(dir / "model");
    }
    std::filesystem::remove_all(dir);
    out.detail << "round trips dataset/basis/models " << ds_ok << basis_ok << models_ok << "; ";
    out.check(ds_ok && basis_ok && models_ok, "bit-exact serialization round trips");
  }
  // Determinism under 1 and 8 threads
  {
    const auto& lib = *fx.library();
    auto run = [&](int threads) {
      set_thread_count(threads);
      const auto ds = generate_dataset(lib, group_scheme(2), 2000, kDefaultPathLengthCm, NoiseSpec::from_snr_db(30), 5);
      const auto report = kfold_evaluate(LrSpec{}, ds, {5, 1});
      return std::make_pair(ds.absorbances, report.fold_fingerprints);
    };
    const int original = thread_count();
    const auto a = run(1);
    const auto b = run(8);
    set_thread_count(original);
    const bool same = a.first == b.first && a.second == b.second;
    out.detail << "threads 1 vs 8 identical " << same;
    out.check(same, "determinism under --threads {1, 8}");
  }
}

}  // namespace

// Usage: specquant_acceptance [--known-failure N]... [criterion]...
// A known failure still prints FAIL but does not fail the run; if it passes,
// the run fails so the marker cannot go stale.
int main(int argc, char** argv) {
  set_thread_count(resolve_thread_count(std::nullopt));
  Fixture fx;
  const std::vector<std::function<void(Fixture&, Outcome&)>> criteria{
      criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
      criterion_6, criterion_7, criterion_8, criterion_9};
  std::vector<int> only, known;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--known-failure" && i + 1 < argc) {
      known.push_back(std::atoi(argv[++i]));
    } else {
      only.push_back(std::atoi(argv[i]));
    }
  }
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i](fx, out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << "[exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool is_known = std::find(known.begin(), known.end(), id) != known.end();
    std::printf("CRITERION %d: %s (%.0fs) %s%s\n", id, out.pass ? "PASS" : "FAIL", secs,
                out.detail.str().c_str(),
                is_known ? (out.pass ? " [declared known failure now passes]" : " [known failure]") : "");
    std::fflush(stdout);
    unexpected += out.pass == is_known;
  }
  return unexpected == 0 ? 0 : 1;
}
