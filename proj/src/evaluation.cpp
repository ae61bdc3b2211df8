#include "specquant/evaluation.hpp"

#include "specquant/error.hpp"
#include "specquant/fingerprint.hpp"
#include "specquant/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace specquant {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

std::string describe_lr(const LrSpec& s) {
  std::ostringstream os;
  os << to_string(s.flavor) << "-lr(L=" << s.components << (s.centered ? "" : ", uncentered") << ")";
  return os.str();
}

PcBasis fit_lr_basis(const LrSpec& spec, const SpectraDataset& train) {
  if (spec.components < 1) throw Error(ErrorCode::kConfiguration, "LR needs at least 1 component");
  if (train.size() <= static_cast<std::size_t>(spec.components) + 1) {
    throw Error(ErrorCode::kUnderdetermined,
                "LR with " + std::to_string(spec.components) + " components needs more than " +
                    std::to_string(spec.components + 1) + " training samples, got " +
                    std::to_string(train.size()));
  }
  return fit_pca(train.absorbances, train.grid, spec.flavor, spec.centered, spec.components);
}

double mean_finite(const Vector& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isfinite(x)) {
      sum += x;
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : kNaN;
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed, std::uint64_t salt) {
  std::vector<std::uint64_t> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = rng::key(seed, rng::kFolds, i, salt);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return keys[a] != keys[b] ? keys[a] < keys[b] : a < b;
  });
  return order;
}

}  // namespace

std::string describe(const ModelSpec& spec) {
  return std::visit(
      Overloaded{[](const LrSpec& s) { return describe_lr(s); },
                 [](const DirectSpec& s) {
                   std::ostringstream os;
                   os << "direct(" << describe_lr(s.base) << ", m=";
                   if (std::holds_alternative<int>(s.retain)) {
                     os << std::get<int>(s.retain);
                   } else {
                     const auto& v = std::get<std::vector<int>>(s.retain);
                     for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "/" : "") << v[i];
                   }
                   os << ")";
                   return os.str();
                 },
                 [](const TfSpec& s) {
                   std::ostringstream os;
                   os << "tf(" << to_string(s.options.flavor)
                      << (s.options.centered ? ", centered" : "") << ", b=";
                   if (s.options.b_mode == PathLengthMode::kKnown) {
                     os << s.options.path_length_cm;
                   } else {
                     os << "learned";
                   }
                   os << ", N'=" << (s.options.noise_mode == NoiseMode::kLearn ? "learned" : "0");
                   if (s.calibration_samples) os << ", calibration=" << *s.calibration_samples;
                   os << ")";
                   return os.str();
                 },
                 [](const PlsrSpec& s) {
                   return "plsr(A=" + std::to_string(s.options.components) + ")";
                 },
                 [](const MeanSpec&) { return std::string("mean"); },
                 [](const OracleSpec&) { return std::string("oracle"); }},
      spec);
}

RowMatrix FittedModel::predict(const SpectraDataset& test) const {
  if (!model) return test.concentrations;
  return specquant::predict(*model, test.absorbances);
}

std::string FittedModel::fingerprint() const {
  return model ? model_fingerprint(*model) : std::string("oracle");
}

FittedModel fit_model(const ModelSpec& spec, const SpectraDataset& train) {
  return std::visit(
      Overloaded{
          [&](const LrSpec& s) -> FittedModel {
            return {fit_lr(fit_lr_basis(s, train), train)};
          },
          [&](const DirectSpec& s) -> FittedModel {
            const PcBasis basis = fit_lr_basis(s.base, train);
            const RowMatrix scores = project(basis, train.absorbances).scores;
            const LrModel lr =
                fit_lr_from_scores(basis, scores, train.concentrations, train.gas_names);
            return {sparsify_to_direct_from_scores(lr, scores, train.concentrations, s.retain)};
          },
          [&](const TfSpec& s) -> FittedModel {
            if (!s.library) throw Error(ErrorCode::kConfiguration, "TF model needs a gas library");
            if (!train.library_fingerprint.empty() &&
                train.library_fingerprint != s.library->fingerprint()) {
              throw Error(ErrorCode::kFingerprint,
                          "training data was generated from a different library");
            }
            const bool needs_data = s.options.b_mode == PathLengthMode::kLearn ||
                                    s.options.noise_mode == NoiseMode::kLearn;
            if (!needs_data) return {fit_tf(*s.library, s.options)};
            if (s.calibration_samples) {
              const SpectraDataset calibration =
                  train.head(std::min(*s.calibration_samples, train.size()));
              return {fit_tf(*s.library, s.options, &calibration)};
            }
            return {fit_tf(*s.library, s.options, &train)};
          },
          [&](const PlsrSpec& s) -> FittedModel { return {fit_plsr(train, s.options)}; },
          [&](const MeanSpec&) -> FittedModel {
            return {MeanModel{train.concentrations.colwise().mean().transpose(), train.gas_names}};
          },
          [&](const OracleSpec&) -> FittedModel { return {std::nullopt}; }},
      spec);
}

std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t folds,
                                                      std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::kConfiguration, "k-fold needs at least 2 folds");
  if (n < folds) {
    throw Error(ErrorCode::kConfiguration, std::to_string(n) + " samples cannot fill " +
                                               std::to_string(folds) + " folds");
  }
  const auto order = permutation(n, seed, 0);
  const std::size_t size = n / folds;
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t begin = f * size;
    const std::size_t end = f + 1 == folds ? n : begin + size;
    out[f].assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
                  order.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(out[f].begin(), out[f].end());
  }
  return out;
}

std::vector<std::size_t> kfold_training_rows(const std::vector<std::vector<std::size_t>>& folds,
                                             std::size_t f) {
  std::vector<std::size_t> rows;
  for (std::size_t g = 0; g < folds.size(); ++g) {
    if (g != f) rows.insert(rows.end(), folds[g].begin(), folds[g].end());
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

GasErrors gas_errors(const RowMatrix& truth, const RowMatrix& predicted) {
  if (truth.rows() != predicted.rows() || truth.cols() != predicted.cols()) {
    throw Error(ErrorCode::kDimension, "gas_errors: prediction shape does not match the truth");
  }
  const Eigen::Index k = truth.cols();
  GasErrors out;
  out.rmse.resize(k);
  out.mape.resize(k);
  out.mape_excluded.assign(static_cast<std::size_t>(k), 0);
  for (Eigen::Index g = 0; g < k; ++g) {
    double se = 0.0, ape = 0.0;
    std::size_t used = 0;
    for (Eigen::Index i = 0; i < truth.rows(); ++i) {
      const double t = truth(i, g);
      const double e = predicted(i, g) - t;
      se += e * e;
      if (t > 0.0) {
        ape += std::abs(e) / t;
        ++used;
      } else {
        ++out.mape_excluded[static_cast<std::size_t>(g)];
      }
    }
    out.rmse(g) = truth.rows() ? std::sqrt(se / static_cast<double>(truth.rows())) : kNaN;
    out.mape(g) = used ? ape / static_cast<double>(used) : kNaN;
  }
  return out;
}

Vector random_guess_rmse(const RowMatrix& concentrations) {
  const Vector mean = concentrations.colwise().mean().transpose();
  const RowMatrix centered = concentrations.rowwise() - mean.transpose();
  return (centered.colwise().squaredNorm().transpose() / static_cast<double>(concentrations.rows()))
      .cwiseSqrt();
}

EvalReport kfold_evaluate(const ModelSpec& spec, const SpectraDataset& dataset,
                          const KFoldOptions& options) {
  const auto folds = kfold_partition(dataset.size(), options.folds, options.seed);
  const auto k = static_cast<Eigen::Index>(dataset.gas_count());
  RowMatrix pooled(dataset.concentrations.rows(), k);

  EvalReport report;
  report.model = describe(spec);
  report.dataset = dataset.describe();
  report.gas_names = dataset.gas_names;
  report.fold_count = folds.size();
  report.fold_rmse.resize(static_cast<Eigen::Index>(folds.size()), k);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const SpectraDataset train = dataset.subset(kfold_training_rows(folds, f));
    const SpectraDataset test = dataset.subset(folds[f]);
    const FittedModel fitted = fit_model(spec, train);
    const RowMatrix pred = fitted.predict(test);
    for (std::size_t r = 0; r < folds[f].size(); ++r) {
      pooled.row(static_cast<Eigen::Index>(folds[f][r])) = pred.row(static_cast<Eigen::Index>(r));
    }
    report.fold_rmse.row(static_cast<Eigen::Index>(f)) =
        gas_errors(test.concentrations, pred).rmse.transpose();
    report.fold_fingerprints.push_back(fitted.fingerprint());
  }
  const GasErrors errors = gas_errors(dataset.concentrations, pooled);
  report.per_gas_rmse = errors.rmse;
  report.mean_rmse = errors.rmse.mean();
  report.per_gas_mape = errors.mape;
  report.mape_excluded = errors.mape_excluded;
  report.random_guess_rmse = random_guess_rmse(dataset.concentrations);
  report.fold_mean_rmse = report.fold_rmse.rowwise().mean();
  return report;
}

Vector PcSweep::mean_rmse() const { return rmse.rowwise().mean(); }

PcSweep sweep_pc_count(const SpectraDataset& dataset, const PcSweepOptions& options) {
  if (options.min_components < 1 || options.max_components < options.min_components) {
    throw Error(ErrorCode::kConfiguration, "PC sweep range must satisfy 1 <= min <= max");
  }
  const auto folds = kfold_partition(dataset.size(), options.kfold.folds, options.kfold.seed);
  const Eigen::Index l_max = options.max_components;
  const auto k = static_cast<Eigen::Index>(dataset.gas_count());
  std::vector<RowMatrix> pooled(static_cast<std::size_t>(l_max + 1),
                                RowMatrix(dataset.concentrations.rows(), k));

  for (std::size_t f = 0; f < folds.size(); ++f) {
    const SpectraDataset train = dataset.subset(kfold_training_rows(folds, f));
    const SpectraDataset test = dataset.subset(folds[f]);
    const PcBasis basis =
        fit_pca(train.absorbances, train.grid, options.flavor, options.centered, l_max);
    const RowMatrix train_scores = project(basis, train.absorbances).scores;
    const RowMatrix test_scores = project(basis, test.absorbances).scores;
    for (Eigen::Index l = 0; l <= l_max; ++l) {
      // Beyond the numerical rank there is nothing left to add.
      const Eigen::Index used = std::min(l, basis.size());
      const LrModel lr = fit_lr_from_scores(basis.truncated(used), train_scores.leftCols(used),
                                            train.concentrations, train.gas_names);
      const RowMatrix pred = apply_affine(test_scores.leftCols(used), lr.lambda, lr.kappa);
      for (std::size_t r = 0; r < folds[f].size(); ++r) {
        pooled[static_cast<std::size_t>(l)].row(static_cast<Eigen::Index>(folds[f][r])) =
            pred.row(static_cast<Eigen::Index>(r));
      }
    }
  }

  PcSweep sweep;
  sweep.gas_names = dataset.gas_names;
  Matrix all(l_max + 1, k);
  for (Eigen::Index l = 0; l <= l_max; ++l) {
    all.row(l) = gas_errors(dataset.concentrations, pooled[static_cast<std::size_t>(l)])
                     .rmse.transpose();
  }
  const Eigen::Index rows = l_max - options.min_components + 1;
  sweep.rmse = all.bottomRows(rows);
  sweep.delta = all.bottomRows(rows) - all.middleRows(options.min_components - 1, rows);
  for (Eigen::Index l = options.min_components; l <= l_max; ++l) sweep.counts.push_back(l);
  return sweep;
}

std::vector<SnrSweepRow> sweep_snr(const std::vector<const SpectraDataset*>& datasets,
                                   const std::vector<ModelSpec>& models,
                                   const KFoldOptions& options) {
  std::vector<SnrSweepRow> rows;
  for (const SpectraDataset* ds : datasets) {
    const double snr = ds->noise ? ds->noise->snr_db() : std::numeric_limits<double>::infinity();
    for (const auto& spec : models) {
      const EvalReport report = kfold_evaluate(spec, *ds, options);
      rows.push_back({snr, report.model, report.mean_rmse, report.per_gas_rmse});
    }
  }
  return rows;
}

double TrainingSizeSweep::median(std::size_t model, std::size_t size_index) const {
  const Matrix& m = mean_rmse.at(model);
  std::vector<double> values;
  for (Eigen::Index s = 0; s < m.cols(); ++s) {
    values.push_back(m(static_cast<Eigen::Index>(size_index), s));
  }
  return quantile(values, 0.5);
}

TrainingSizeSweep sweep_training_size(const SpectraDataset& dataset,
                                      const std::vector<ModelSpec>& models,
                                      const TrainingSizeOptions& options) {
  if (options.sizes.empty() || options.seeds.empty()) {
    throw Error(ErrorCode::kConfiguration, "training-size sweep needs sizes and seeds");
  }
  if (!std::is_sorted(options.sizes.begin(), options.sizes.end()) || options.sizes.front() == 0) {
    throw Error(ErrorCode::kConfiguration, "training sizes must be positive and ascending");
  }
  if (!(options.test_fraction > 0.0 && options.test_fraction < 1.0)) {
    throw Error(ErrorCode::kConfiguration, "test fraction must lie in (0, 1)");
  }
  const std::size_t n = dataset.size();
  const auto n_test = static_cast<std::size_t>(std::ceil(options.test_fraction * static_cast<double>(n)));
  if (n_test >= n || options.sizes.back() > n - n_test) {
    throw Error(ErrorCode::kConfiguration,
                "training size " + std::to_string(options.sizes.back()) +
                    " exceeds the training pool of " + std::to_string(n - n_test));
  }

  TrainingSizeSweep sweep;
  sweep.sizes = options.sizes;
  sweep.seeds = options.seeds;
  for (const auto& spec : models) {
    sweep.models.push_back(describe(spec));
    sweep.mean_rmse.emplace_back(static_cast<Eigen::Index>(options.sizes.size()),
                                 static_cast<Eigen::Index>(options.seeds.size()));
  }
  for (std::size_t s = 0; s < options.seeds.size(); ++s) {
    const auto order = permutation(n, options.seeds[s], 1);
    std::vector<std::size_t> test_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::sort(test_rows.begin(), test_rows.end());
    const SpectraDataset test = dataset.subset(test_rows);
    const std::vector<std::size_t> pool(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    for (std::size_t z = 0; z < options.sizes.size(); ++z) {
      const SpectraDataset train = dataset.subset(
          std::vector<std::size_t>(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(options.sizes[z])));
      for (std::size_t m = 0; m < models.size(); ++m) {
        double value = kNaN;
        try {
          const FittedModel fitted = fit_model(models[m], train);
          value = gas_errors(test.concentrations, fitted.predict(test)).rmse.mean();
        } catch (const Error& e) {
          const auto code = e.code();
          if (code != ErrorCode::kUnderdetermined && code != ErrorCode::kBound &&
              code != ErrorCode::kConditioning) {
            throw;
          }
        }
        sweep.mean_rmse[m](static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(s)) = value;
      }
    }
  }
  sweep.median_rmse.resize(static_cast<Eigen::Index>(models.size()),
                           static_cast<Eigen::Index>(options.sizes.size()));
  for (std::size_t m = 0; m < models.size(); ++m) {
    for (std::size_t z = 0; z < options.sizes.size(); ++z) {
      sweep.median_rmse(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(z)) = sweep.median(m, z);
    }
  }
  return sweep;
}

SaturationFit fit_saturation(const Vector& centers, const Vector& values) {
  if (centers.size() != values.size()) {
    throw Error(ErrorCode::kDimension, "fit_saturation: centers and values differ in length");
  }
  std::vector<std::pair<double, double>> pts;
  for (Eigen::Index i = 0; i < centers.size(); ++i) {
    if (centers(i) > 0.0 && values(i) > 0.0 && std::isfinite(centers(i)) && std::isfinite(values(i))) {
      pts.emplace_back(std::log(centers(i)), std::log(values(i)));
    }
  }
  SaturationFit fit;
  if (pts.empty()) return fit;
  std::sort(pts.begin(), pts.end());
  const std::size_t n = pts.size();

  double best = std::numeric_limits<double>::infinity();
  double best_lg = 0.0, best_la = 0.0;
  for (std::size_t split = 0; split <= n; ++split) {
    // bins [0, split) on the a/c branch, [split, n) on the plateau
    double la = 0.0, lg = 0.0;
    for (std::size_t i = 0; i < split; ++i) la += pts[i].second + pts[i].first;
    for (std::size_t i = split; i < n; ++i) lg += pts[i].second;
    if (split > 0) la /= static_cast<double>(split);
    if (split < n) lg /= static_cast<double>(n - split);
    if (split == 0) la = lg + pts.front().first;
    if (split == n) lg = la - pts.back().first;
    double sse = 0.0;
    for (const auto& [x, y] : pts) {
      const double r = y - std::max(lg, la - x);
      sse += r * r;
    }
    if (sse < best) {
      best = sse;
      best_lg = lg;
      best_la = la;
    }
  }
  fit.gamma = std::exp(best_lg);
  fit.a = std::exp(best_la);
  fit.c_th = fit.a / fit.gamma;
  double ss = 0.0;
  for (const auto& [x, y] : pts) {
    if (std::exp(x) >= fit.c_th) {
      const double r = std::exp(y) - fit.gamma;
      ss += r * r;
      ++fit.plateau_bins;
    }
  }
  fit.residual = fit.plateau_bins ? std::sqrt(ss / static_cast<double>(fit.plateau_bins)) : 0.0;
  return fit;
}

double quantile(std::vector<double> values, double q) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

struct FoldBins {
  // per fold, per bin
  std::vector<Vector> mape, median, q20, q80;
  std::vector<std::vector<std::size_t>> counts;
};

void bin_fold(const Vector& truth, const Vector& pred, const Vector& edges, FoldBins& out) {
  const Eigen::Index bins = edges.size() - 1;
  std::vector<std::vector<double>> ape(static_cast<std::size_t>(bins));
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    const double c = truth(i);
    if (!(c > 0.0)) continue;
    const auto it = std::upper_bound(edges.begin(), edges.end(), c);
    auto b = static_cast<Eigen::Index>(it - edges.begin()) - 1;
    if (c == edges(bins)) b = bins - 1;
    if (b < 0 || b >= bins) continue;
    ape[static_cast<std::size_t>(b)].push_back(std::abs(pred(i) - c) / c);
  }
  Vector mape(bins), median(bins), q20(bins), q80(bins);
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins));
  for (Eigen::Index b = 0; b < bins; ++b) {
    const auto& v = ape[static_cast<std::size_t>(b)];
    counts[static_cast<std::size_t>(b)] = v.size();
    mape(b) = v.empty() ? kNaN : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    median(b) = quantile(v, 0.5);
    q20(b) = quantile(v, 0.2);
    q80(b) = quantile(v, 0.8);
  }
  out.mape.push_back(mape);
  out.median.push_back(median);
  out.q20.push_back(q20);
  out.q80.push_back(q80);
  out.counts.push_back(counts);
}

BinnedCurve summarize(const FoldBins& folds, const Vector& edges) {
  const Eigen::Index bins = edges.size() - 1;
  BinnedCurve c;
  c.lower = edges.head(bins);
  c.upper = edges.tail(bins);
  c.centers = (c.lower.array() * c.upper.array()).sqrt();
  c.mape_mean.resize(bins);
  c.mape_std.resize(bins);
  c.median_ape.resize(bins);
  c.q20_ape.resize(bins);
  c.q80_ape.resize(bins);
  c.counts.assign(static_cast<std::size_t>(bins), 0);
  for (Eigen::Index b = 0; b < bins; ++b) {
    Vector m(static_cast<Eigen::Index>(folds.mape.size()));
    Vector med(m.size()), lo(m.size()), hi(m.size());
    for (std::size_t f = 0; f < folds.mape.size(); ++f) {
      m(static_cast<Eigen::Index>(f)) = folds.mape[f](b);
      med(static_cast<Eigen::Index>(f)) = folds.median[f](b);
      lo(static_cast<Eigen::Index>(f)) = folds.q20[f](b);
      hi(static_cast<Eigen::Index>(f)) = folds.q80[f](b);
      c.counts[static_cast<std::size_t>(b)] += folds.counts[f][static_cast<std::size_t>(b)];
    }
    c.mape_mean(b) = mean_finite(m);
    double ss = 0.0;
    std::size_t used = 0;
    for (double x : m) {
      if (std::isfinite(x)) {
        ss += (x - c.mape_mean(b)) * (x - c.mape_mean(b));
        ++used;
      }
    }
    c.mape_std(b) = used > 1 ? std::sqrt(ss / static_cast<double>(used - 1)) : kNaN;
    c.median_ape(b) = mean_finite(med);
    c.q20_ape(b) = mean_finite(lo);
    c.q80_ape(b) = mean_finite(hi);
  }
  return c;
}

}  // namespace

std::vector<OutOfRangeCurve> out_of_range_study(const SpectraDataset& train,
                                                const SpectraDataset& test,
                                                const std::vector<ModelSpec>& models,
                                                const OutOfRangeOptions& options) {
  require_same_grid(train.grid, test.grid, "out_of_range_study");
  if (train.gas_names != test.gas_names) {
    throw Error(ErrorCode::kSchema, "out_of_range_study: train and test gases differ");
  }
  if (options.bins < 2) throw Error(ErrorCode::kConfiguration, "need at least 2 concentration bins");
  std::vector<std::size_t> gases = options.gases;
  if (gases.empty()) {
    gases.resize(train.gas_count());
    std::iota(gases.begin(), gases.end(), std::size_t{0});
  }
  for (std::size_t g : gases) {
    if (g >= train.gas_count()) throw Error(ErrorCode::kBound, "gas index out of range");
  }

  const double lo = std::min(train.scheme.low, test.scheme.low);
  const double hi = std::max(train.scheme.high, test.scheme.high);
  const auto bins = static_cast<Eigen::Index>(options.bins);
  Vector edges(bins + 1);
  for (Eigen::Index b = 0; b <= bins; ++b) {
    edges(b) = std::pow(10.0, std::log10(lo) + (std::log10(hi) - std::log10(lo)) *
                                                   static_cast<double>(b) / static_cast<double>(bins));
  }
  edges(0) = lo;
  edges(bins) = hi;

  const auto folds = kfold_partition(train.size(), options.kfold.folds, options.kfold.seed);
  std::vector<OutOfRangeCurve> curves;
  for (const auto& spec : models) {
    std::vector<FoldBins> in_bins(gases.size()), out_bins(gases.size());
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const SpectraDataset fold_train = train.subset(kfold_training_rows(folds, f));
      const SpectraDataset fold_test = train.subset(folds[f]);
      const FittedModel fitted = fit_model(spec, fold_train);
      const RowMatrix in_pred = fitted.predict(fold_test);
      const RowMatrix out_pred = fitted.predict(test);
      for (std::size_t gi = 0; gi < gases.size(); ++gi) {
        const auto g = static_cast<Eigen::Index>(gases[gi]);
        bin_fold(fold_test.concentrations.col(g), in_pred.col(g), edges, in_bins[gi]);
        bin_fold(test.concentrations.col(g), out_pred.col(g), edges, out_bins[gi]);
      }
    }
    for (std::size_t gi = 0; gi < gases.size(); ++gi) {
      OutOfRangeCurve curve;
      curve.model = describe(spec);
      curve.gas = train.gas_names[gases[gi]];
      curve.in_range = summarize(in_bins[gi], edges);
      curve.out_of_range = summarize(out_bins[gi], edges);
      for (Eigen::Index b = 0; b < bins; ++b) {
        if (curve.out_of_range.counts[static_cast<std::size_t>(b)] == 0) {
          curve.empty_bins.push_back(static_cast<std::size_t>(b));
        }
      }
      curve.fit = fit_saturation(curve.out_of_range.centers, curve.out_of_range.median_ape);
      curve.fold_gamma.resize(static_cast<Eigen::Index>(folds.size()));
      curve.fold_c_th.resize(static_cast<Eigen::Index>(folds.size()));
      for (std::size_t f = 0; f < folds.size(); ++f) {
        const SaturationFit ff = fit_saturation(curve.out_of_range.centers, out_bins[gi].median[f]);
        curve.fold_gamma(static_cast<Eigen::Index>(f)) = ff.gamma;
        curve.fold_c_th(static_cast<Eigen::Index>(f)) = ff.c_th;
      }
      const double gm = curve.fold_gamma.mean();
      curve.gamma_std = folds.size() > 1
                            ? std::sqrt((curve.fold_gamma.array() - gm).square().sum() /
                                        static_cast<double>(folds.size() - 1))
                            : 0.0;
      curves.push_back(std::move(curve));
    }
  }
  return curves;
}

}  // namespace specquant
