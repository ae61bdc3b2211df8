#include "specquant/plot_export.hpp"

#include "specquant/error.hpp"
#include "specquant/spectra_csv.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace specquant {

namespace {

std::string cell_text(const Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) {
    if (s->find_first_of(",\"\n") == std::string::npos) return *s;
    std::string quoted = "\"";
    for (char c : *s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + "\"";
  }
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  return std::to_string(std::get<long long>(cell));
}

long long as_ll(std::size_t v) { return static_cast<long long>(v); }

}  // namespace

std::string format_csv(const PlotTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw Error(ErrorCode::kDimension, table.file + ": row width does not match the header");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += cell_text(row[c]);
    }
    out += '\n';
  }
  return out;
}

PlotBundle& PlotBundle::merge(PlotBundle other) {
  for (auto& t : other.tables) tables.push_back(std::move(t));
  return *this;
}

void PlotBundle::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["files"] = nlohmann::json::array();
  for (const auto& t : tables) {
    std::ofstream out(dir / t.file, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / t.file).string());
    out << format_csv(t);
    manifest["files"].push_back(
        {{"file", t.file}, {"figure", t.figure}, {"x", t.x}, {"y", t.y}, {"columns", t.columns}});
  }
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

PlotBundle plot_data(const EvalReport& report) {
  PlotTable folds{"eval_rmse.csv", "per-gas RMSE per fold", "gas", "rmse",
                  {"model", "gas", "fold", "rmse"}, {}};
  PlotTable summary{"eval_summary.csv", "per-gas pooled RMSE and MAPE", "gas", "rmse",
                    {"model", "gas", "rmse", "mape", "mape_excluded", "random_guess_rmse"}, {}};
  for (std::size_t g = 0; g < report.gas_names.size(); ++g) {
    const auto gi = static_cast<Eigen::Index>(g);
    for (Eigen::Index f = 0; f < report.fold_rmse.rows(); ++f) {
      folds.rows.push_back({report.model, report.gas_names[g], static_cast<long long>(f),
                            report.fold_rmse(f, gi)});
    }
    summary.rows.push_back({report.model, report.gas_names[g], report.per_gas_rmse(gi),
                            report.per_gas_mape(gi), as_ll(report.mape_excluded[g]),
                            report.random_guess_rmse(gi)});
  }
  summary.rows.push_back({report.model, std::string("all"), report.mean_rmse,
                          report.per_gas_mape.mean(), 0LL, report.random_guess_rmse.mean()});
  return {{std::move(folds), std::move(summary)}};
}

PlotBundle plot_data(const PcSweep& sweep, const std::string& model) {
  PlotTable rmse{"pc_sweep.csv", "quantification RMSE vs. number of components", "n_components",
                 "rmse", {"model", "gas", "n_components", "rmse"}, {}};
  PlotTable delta{"pc_sweep_delta.csv", "RMSE decrement per added component", "n_components",
                  "delta_rmse", {"model", "gas", "n_components", "delta_rmse"}, {}};
  for (std::size_t g = 0; g < sweep.gas_names.size(); ++g) {
    for (std::size_t r = 0; r < sweep.counts.size(); ++r) {
      const auto ri = static_cast<Eigen::Index>(r);
      const auto gi = static_cast<Eigen::Index>(g);
      rmse.rows.push_back({model, sweep.gas_names[g], static_cast<long long>(sweep.counts[r]),
                           sweep.rmse(ri, gi)});
      delta.rows.push_back({model, sweep.gas_names[g], static_cast<long long>(sweep.counts[r]),
                            sweep.delta(ri, gi)});
    }
  }
  return {{std::move(rmse), std::move(delta)}};
}

PlotBundle plot_data(const std::vector<SnrSweepRow>& rows) {
  PlotTable t{"snr_sweep.csv", "RMSE vs. SNR", "snr_db", "rmse",
              {"model", "gas", "snr_db", "rmse"}, {}};
  for (const auto& r : rows) {
    for (Eigen::Index g = 0; g < r.per_gas_rmse.size(); ++g) {
      t.rows.push_back({r.model, std::string("gas_") + std::to_string(g + 1), r.snr_db,
                        r.per_gas_rmse(g)});
    }
    t.rows.push_back({r.model, std::string("all"), r.snr_db, r.mean_rmse});
  }
  return {{std::move(t)}};
}

PlotBundle plot_data(const TrainingSizeSweep& sweep) {
  PlotTable runs{"train_size.csv", "mean RMSE vs. number of training samples", "n_train",
                 "mean_rmse", {"model", "n_train", "seed", "mean_rmse"}, {}};
  PlotTable medians{"train_size_median.csv", "median over seeds of mean RMSE", "n_train",
                    "median_rmse", {"model", "n_train", "median_rmse"}, {}};
  for (std::size_t m = 0; m < sweep.models.size(); ++m) {
    for (std::size_t z = 0; z < sweep.sizes.size(); ++z) {
      for (std::size_t s = 0; s < sweep.seeds.size(); ++s) {
        runs.rows.push_back({sweep.models[m], as_ll(sweep.sizes[z]),
                             static_cast<long long>(sweep.seeds[s]),
                             sweep.mean_rmse[m](static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(s))});
      }
      medians.rows.push_back({sweep.models[m], as_ll(sweep.sizes[z]), sweep.median(m, z)});
    }
  }
  return {{std::move(runs), std::move(medians)}};
}

PlotBundle plot_data(const std::vector<OutOfRangeCurve>& curves) {
  PlotTable bins{"out_of_range.csv", "binned MAPE vs. true concentration", "bin_center",
                 "mape_mean",
                 {"model", "gas", "population", "bin_lower", "bin_upper", "bin_center", "count",
                  "mape_mean", "mape_std", "median_ape", "q20_ape", "q80_ape"},
                 {}};
  PlotTable fits{"out_of_range_fit.csv", "saturation fit MAPE ~ max(gamma, a/c)", "gas", "gamma",
                 {"model", "gas", "gamma", "a", "c_th", "residual", "plateau_bins", "gamma_std"},
                 {}};
  for (const auto& c : curves) {
    for (const auto* pop : {&c.in_range, &c.out_of_range}) {
      const std::string name = pop == &c.in_range ? "in_range" : "out_of_range";
      for (Eigen::Index b = 0; b < pop->centers.size(); ++b) {
        bins.rows.push_back({c.model, c.gas, name, pop->lower(b), pop->upper(b), pop->centers(b),
                             as_ll(pop->counts[static_cast<std::size_t>(b)]), pop->mape_mean(b),
                             pop->mape_std(b), pop->median_ape(b), pop->q20_ape(b),
                             pop->q80_ape(b)});
      }
    }
    fits.rows.push_back({c.model, c.gas, c.fit.gamma, c.fit.a, c.fit.c_th, c.fit.residual,
                         as_ll(c.fit.plateau_bins), c.gamma_std});
  }
  return {{std::move(bins), std::move(fits)}};
}

PlotBundle plot_data_variance(const PcBasis& basis, const RowMatrix& data, Eigen::Index up_to,
                              const std::string& label) {
  const auto ev = explained_variance(basis, up_to);
  const RowMatrix scores = project(basis, data).scores;
  PlotTable t{"variance_" + label + ".csv", "explained variance and reconstruction error",
              "n_components", "cev",
              {"label", "n_components", "iev", "cev", "rmse", "delta_rho"}, {}};
  for (Eigen::Index l = 0; l <= up_to; ++l) {
    const auto metrics = reconstruction_metrics(data, reconstruct(basis, scores, l));
    const double iev = l ? ev.individual(l - 1) : 0.0;
    const double cev = l ? ev.cumulative(l - 1) : 0.0;
    t.rows.push_back({label, static_cast<long long>(l), iev, cev, metrics.rmse, metrics.delta_rho});
  }
  return {{std::move(t)}};
}

PlotBundle plot_data_lambda(const LrModel& model, const Vector& norms) {
  if (norms.size() != model.lambda.rows()) {
    throw Error(ErrorCode::kDimension, "plot_data_lambda: one norm per gas required");
  }
  const Matrix scaled = (norms.asDiagonal() * model.lambda).transpose();  // L x K
  PlotTable t{"lambda_heatmap.csv", "(eps Lambda)^T", "gas", "component",
              {"component", "gas", "value"}, {}};
  for (Eigen::Index p = 0; p < scaled.rows(); ++p) {
    for (Eigen::Index k = 0; k < scaled.cols(); ++k) {
      t.rows.push_back({static_cast<long long>(p + 1), model.gas_names[static_cast<std::size_t>(k)],
                        scaled(p, k)});
    }
  }
  return {{std::move(t)}};
}

}  // namespace specquant
