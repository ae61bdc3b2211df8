#pragma once

#include "specquant/evaluation.hpp"
#include "specquant/pca.hpp"

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace specquant {

using Cell = std::variant<std::string, double, long long>;

/// One tidy (long-format) CSV.
struct PlotTable {
  std::string file;
  std::string figure;  // what the table is an analog of
  std::string x;       // x-axis column
  std::string y;       // y-axis column
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// A set of tables plus a JSON manifest listing them.
struct PlotBundle {
  std::vector<PlotTable> tables;

  PlotBundle& merge(PlotBundle other);
  /// Writes every table and `manifest.json`; byte-identical for identical input.
  void write(const std::filesystem::path& dir) const;
};

std::string format_csv(const PlotTable& table);

PlotBundle plot_data(const EvalReport& report);
PlotBundle plot_data(const PcSweep& sweep, const std::string& model = "fpca-lr");
PlotBundle plot_data(const std::vector<SnrSweepRow>& rows);
PlotBundle plot_data(const TrainingSizeSweep& sweep);
PlotBundle plot_data(const std::vector<OutOfRangeCurve>& curves);
/// IEV/CEV and reconstruction RMSE / delta-rho per component count.
PlotBundle plot_data_variance(const PcBasis& basis, const RowMatrix& data,
                              Eigen::Index up_to, const std::string& label);
/// Heat-map of (eps Lambda)^T.
PlotBundle plot_data_lambda(const LrModel& model, const Vector& norms);

}  // namespace specquant
