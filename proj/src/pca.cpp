#include "specquant/pca.hpp"

#include "specquant/error.hpp"
#include "specquant/fingerprint.hpp"
#include "specquant/kernels.hpp"
#include "specquant/spectra_csv.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

namespace specquant {

Weighting weighting_of(Flavor flavor) noexcept {
  return flavor == Flavor::kFunctional ? Weighting::kTrapezoidal : Weighting::kUnit;
}

std::string to_string(Flavor flavor) { return flavor == Flavor::kFunctional ? "fpca" : "pca"; }

Flavor parse_flavor(const std::string& text) {
  if (text == "fpca" || text == "functional") return Flavor::kFunctional;
  if (text == "pca" || text == "plain") return Flavor::kPlain;
  throw Error(ErrorCode::kConfiguration, "unknown PCA flavor '" + text + "' (expected fpca or pca)");
}

PcBasis PcBasis::truncated(Eigen::Index count) const {
  if (count < 0 || count > size()) {
    throw Error(ErrorCode::kBound, "basis has " + std::to_string(size()) + " components, " +
                                       std::to_string(count) + " requested");
  }
  PcBasis out = *this;
  out.components = components.leftCols(count);
  out.eigenvalues = eigenvalues.head(count);
  return out;
}

std::string PcBasis::fingerprint() const {
  Fingerprint fp;
  fp.add(std::span<const double>(grid->points()));
  fp.add(to_string(flavor));
  fp.add(static_cast<std::uint64_t>(centered));
  fp.add(static_cast<std::uint64_t>(components.cols()));
  fp.add(std::span<const double>(components.data(), static_cast<std::size_t>(components.size())));
  fp.add(std::span<const double>(mean.data(), static_cast<std::size_t>(mean.size())));
  fp.add(std::span<const double>(eigenvalues.data(), static_cast<std::size_t>(eigenvalues.size())));
  return fp.hex();
}

PcBasis fit_pca(const RowMatrix& data, GridPtr grid, Flavor flavor, bool centered,
                Eigen::Index max_components) {
  const Eigen::Index n = data.rows();
  const Eigen::Index m = data.cols();
  if (!grid || static_cast<std::size_t>(m) != grid->size()) {
    throw Error(ErrorCode::kDimension, "fit_pca: data width does not match the grid");
  }
  if (n < 2) throw Error(ErrorCode::kUnderdetermined, "fit_pca needs at least 2 samples");
  if (max_components < 1) {
    throw Error(ErrorCode::kConfiguration, "fit_pca needs max_components >= 1");
  }
  if (max_components > std::min(n, m)) {
    throw Error(ErrorCode::kBound, "fit_pca: " + std::to_string(max_components) +
                                       " components exceed min(N, M) = " +
                                       std::to_string(std::min(n, m)));
  }

  PcBasis basis;
  basis.grid = grid;
  basis.flavor = flavor;
  basis.centered = centered;
  basis.sample_count = static_cast<std::size_t>(n);
  basis.mean = centered ? Vector(data.colwise().mean().transpose()) : Vector::Zero(m);

  const Vector& w = grid->weights(weighting_of(flavor));
  const Vector sqrt_w = w.cwiseSqrt();
  Matrix x = (data.rowwise() - basis.mean.transpose()).array().rowwise() * sqrt_w.transpose().array();

  Vector singular;
  Matrix v;
  if (n >= m) {
    Eigen::HouseholderQR<Eigen::Ref<Matrix>> qr(x);
    const Matrix r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    Eigen::BDCSVD<Matrix> svd(r, Eigen::ComputeThinV);
    singular = svd.singularValues();
    v = svd.matrixV();
  } else {
    Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinV);
    singular = svd.singularValues();
    v = svd.matrixV();
  }

  const double denom = static_cast<double>(n - 1);
  basis.total_variance = singular.squaredNorm() / denom;
  const double cutoff = kRankTolerance * (singular.size() > 0 ? singular(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < singular.size() && singular(rank) > cutoff) ++rank;
  basis.effective_rank = static_cast<std::size_t>(rank);

  const Eigen::Index count = std::min(rank, max_components);
  basis.components = v.leftCols(count).array().colwise() / sqrt_w.array();
  basis.eigenvalues = singular.head(count).array().square() / denom;
  for (Eigen::Index l = 0; l < count; ++l) {
    Eigen::Index at = 0;
    basis.components.col(l).cwiseAbs().maxCoeff(&at);
    if (basis.components(at, l) < 0.0) basis.components.col(l) *= -1.0;
  }
  return basis;
}

ExplainedVariance explained_variance(const PcBasis& basis, Eigen::Index up_to) {
  if (up_to < 0 || up_to > basis.size()) {
    throw Error(ErrorCode::kBound, "explained_variance: basis has only " +
                                       std::to_string(basis.size()) + " components");
  }
  ExplainedVariance ev;
  if (!(basis.total_variance > 0.0)) {
    ev.individual = Vector::Zero(up_to);
    ev.cumulative = Vector::Zero(up_to);
    return ev;
  }
  ev.individual = basis.eigenvalues.head(up_to) / basis.total_variance;
  ev.cumulative.resize(up_to);
  double sum = 0.0;
  for (Eigen::Index l = 0; l < up_to; ++l) {
    sum += ev.individual(l);
    ev.cumulative(l) = std::min(sum, 1.0);
  }
  return ev;
}

namespace {

void require_width(const PcBasis& basis, const RowMatrix& data, const char* context) {
  if (static_cast<std::size_t>(data.cols()) != basis.grid->size()) {
    throw Error(ErrorCode::kDimension, std::string(context) + ": spectra have " +
                                           std::to_string(data.cols()) + " points, basis grid has " +
                                           std::to_string(basis.grid->size()));
  }
}

}  // namespace

ScoreMatrix project(const PcBasis& basis, const RowMatrix& data) {
  require_width(basis, data, "project");
  return {kernels::omp::project_rows(data, basis.mean, basis.weights(), basis.components),
          basis.fingerprint()};
}

RowMatrix project_uncentered(const PcBasis& basis, const RowMatrix& data) {
  require_width(basis, data, "project");
  return kernels::omp::project_rows(data, Vector::Zero(data.cols()), basis.weights(),
                                    basis.components);
}

RowMatrix reconstruct(const PcBasis& basis, const RowMatrix& scores, Eigen::Index up_to) {
  if (up_to < 0 || up_to > basis.size() || up_to > scores.cols()) {
    throw Error(ErrorCode::kBound, "reconstruct: " + std::to_string(up_to) +
                                       " components requested, basis has " +
                                       std::to_string(basis.size()));
  }
  return kernels::omp::reconstruct_rows(scores, basis.components, basis.mean, up_to);
}

ReconstructionMetrics reconstruction_metrics(const RowMatrix& original,
                                             const RowMatrix& reconstructed) {
  if (original.rows() != reconstructed.rows() || original.cols() != reconstructed.cols()) {
    throw Error(ErrorCode::kDimension, "reconstruction_metrics: shape mismatch");
  }
  ReconstructionMetrics out;
  if (original.rows() == 0) return out;
  double rmse_sum = 0.0;
  double rho_sum = 0.0;
  std::size_t rho_rows = 0;
  for (Eigen::Index i = 0; i < original.rows(); ++i) {
    const auto a = original.row(i);
    const auto r = reconstructed.row(i);
    rmse_sum += std::sqrt((a - r).squaredNorm() / static_cast<double>(a.size()));
    const double aa = a.squaredNorm();
    const double rr = r.squaredNorm();
    if (aa > 0.0 && rr > 0.0) {
      rho_sum += 1.0 - a.dot(r) / std::sqrt(aa * rr);
      ++rho_rows;
    } else {
      ++out.excluded_rows;
    }
  }
  out.rmse = rmse_sum / static_cast<double>(original.rows());
  out.delta_rho = rho_rows ? rho_sum / static_cast<double>(rho_rows) : 0.0;
  return out;
}

std::vector<ComponentAgreement> compare_flavors(const PcBasis& a, const PcBasis& b,
                                                Eigen::Index up_to) {
  require_same_grid(a.grid, b.grid, "compare_flavors");
  if (up_to < 0 || up_to > a.size() || up_to > b.size()) {
    throw Error(ErrorCode::kBound, "compare_flavors: not enough components");
  }
  std::vector<ComponentAgreement> out;
  for (Eigen::Index l = 0; l < up_to; ++l) {
    Vector x = a.components.col(l);
    Vector y = b.components.col(l);
    if (x.dot(y) < 0.0) y = -y;
    x.normalize();
    y.normalize();
    const double rmse = std::sqrt((x - y).squaredNorm() / static_cast<double>(x.size()));
    const Vector xc = x.array() - x.mean();
    const Vector yc = y.array() - y.mean();
    const double denom = xc.squaredNorm() * yc.squaredNorm();
    const double r = denom > 0.0 ? xc.dot(yc) / std::sqrt(denom) : 0.0;
    out.push_back({rmse, r * r});
  }
  return out;
}

void save_basis(const PcBasis& basis, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  SpectraTable table{basis.grid, {}, {}};
  for (Eigen::Index l = 0; l < basis.size(); ++l) {
    table.names.push_back("phi_" + std::to_string(l + 1));
    table.spectra.emplace_back(basis.grid, basis.components.col(l));
  }
  table.names.push_back("mean");
  table.spectra.emplace_back(basis.grid, basis.mean);
  write_spectra_csv(dir / "components.csv", table);

  nlohmann::json meta;
  meta["format"] = "specquant-basis/1";
  meta["flavor"] = to_string(basis.flavor);
  meta["centered"] = basis.centered;
  meta["eigenvalues"] = std::vector<double>(basis.eigenvalues.begin(), basis.eigenvalues.end());
  meta["total_variance"] = basis.total_variance;
  meta["sample_count"] = basis.sample_count;
  meta["effective_rank"] = basis.effective_rank;
  meta["fingerprint"] = basis.fingerprint();
  std::ofstream out(dir / "basis.json", std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "basis.json").string());
  out << meta.dump(2) << '\n';
}

PcBasis load_basis(const std::filesystem::path& dir) {
  const SpectraTable table = read_spectra_csv(dir / "components.csv");
  std::ifstream in(dir / "basis.json", std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + (dir / "basis.json").string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, (dir / "basis.json").string() + ": " + e.what());
  }
  if (table.names.empty() || table.names.back() != "mean") {
    throw Error(ErrorCode::kSchema, "components.csv must end with a 'mean' column");
  }
  PcBasis basis;
  basis.grid = table.grid;
  const auto count = static_cast<Eigen::Index>(table.names.size() - 1);
  const auto m = static_cast<Eigen::Index>(table.grid->size());
  basis.components.resize(m, count);
  for (Eigen::Index l = 0; l < count; ++l) {
    basis.components.col(l) = table.spectra[static_cast<std::size_t>(l)].values();
  }
  basis.mean = table.spectra.back().values();
  try {
    basis.flavor = parse_flavor(meta.at("flavor").get<std::string>());
    basis.centered = meta.at("centered").get<bool>();
    const auto eig = meta.at("eigenvalues").get<std::vector<double>>();
    basis.eigenvalues = Eigen::Map<const Vector>(eig.data(), static_cast<Eigen::Index>(eig.size()));
    basis.total_variance = meta.at("total_variance").get<double>();
    basis.sample_count = meta.at("sample_count").get<std::size_t>();
    basis.effective_rank = meta.at("effective_rank").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, (dir / "basis.json").string() + ": " + e.what());
  }
  if (basis.eigenvalues.size() != count) {
    throw Error(ErrorCode::kSchema, "basis.json eigenvalue count does not match components.csv");
  }
  const std::string expected = meta.value("fingerprint", std::string());
  if (!expected.empty() && expected != basis.fingerprint()) {
    throw Error(ErrorCode::kFingerprint, "basis in " + dir.string() + " does not match its fingerprint");
  }
  return basis;
}

}  // namespace specquant
