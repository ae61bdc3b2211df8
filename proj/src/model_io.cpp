#include "specquant/model_io.hpp"

#include "specquant/error.hpp"
#include "specquant/fingerprint.hpp"
#include "specquant/spectra_csv.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace specquant {

namespace {

constexpr const char* kModelFormat = "specquant-model/1";

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void write_vector(const std::filesystem::path& path, const Vector& v) { write_matrix_csv(path, v); }

Vector read_vector(const std::filesystem::path& path) {
  const Matrix m = read_matrix_csv(path, false);
  if (m.cols() != 1 && m.rows() > 0) {
    throw Error(ErrorCode::kSchema, path.string() + ": expected a single column");
  }
  return m.rows() ? Vector(m.col(0)) : Vector();
}

}  // namespace

std::string MeanModel::fingerprint() const {
  Fingerprint fp;
  fp.add("mean").add(std::span<const double>(mean.data(), static_cast<std::size_t>(mean.size())));
  for (const auto& n : gas_names) fp.add(n);
  return fp.hex();
}

std::string model_kind(const QuantModel& model) {
  return std::visit(Overloaded{[](const LrModel&) { return std::string("lr"); },
                               [](const DirectModel&) { return std::string("direct"); },
                               [](const TfModel&) { return std::string("tf"); },
                               [](const PlsrModel&) { return std::string("plsr"); },
                               [](const MeanModel&) { return std::string("mean"); }},
                    model);
}

std::string model_fingerprint(const QuantModel& model) {
  return std::visit([](const auto& m) { return m.fingerprint(); }, model);
}

RowMatrix predict(const QuantModel& model, const RowMatrix& spectra) {
  return std::visit(
      Overloaded{[&](const LrModel& m) { return predict_lr(m, spectra); },
                 [&](const DirectModel& m) { return predict_direct(m, spectra); },
                 [&](const TfModel& m) { return predict_tf(m, spectra); },
                 [&](const PlsrModel& m) { return predict_plsr(m, spectra); },
                 [&](const MeanModel& m) {
                   RowMatrix out(spectra.rows(), m.mean.size());
                   out.rowwise() = m.mean.transpose();
                   return out;
                 }},
      model);
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header) {
  std::string text;
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c) text += ',';
      text += header[c];
    }
    text += '\n';
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) text += ',';
      text += format_double(m(r, c));
    }
    text += '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

Matrix read_matrix_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t row = 0;
  bool skipped = !has_header;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!skipped) {
      skipped = true;
      continue;
    }
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      double v = 0.0;
      const char* first = line.data() + start;
      const char* last = line.data() + end;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (first == last || ec != std::errc() || ptr != last) {
        throw Error(ErrorCode::kParse, path.string() + ": row " + std::to_string(row) +
                                           ": not a number: '" + std::string(first, last) + "'");
      }
      values.push_back(v);
      start = end + 1;
    }
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw Error(ErrorCode::kParse, path.string() + ": row " + std::to_string(row) +
                                         " has " + std::to_string(values.size()) + " cells");
    }
    rows.push_back(std::move(values));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

void save_model(const QuantModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json meta;
  meta["format"] = kModelFormat;
  meta["kind"] = model_kind(model);
  meta["fingerprint"] = model_fingerprint(model);

  std::visit(
      Overloaded{
          [&](const LrModel& m) {
            meta["gas_names"] = m.gas_names;
            meta["in_sample_rmse"] = m.in_sample_rmse;
            meta["condition_number"] = m.condition_number;
            save_basis(m.basis, dir / "basis");
            write_matrix_csv(dir / "lambda.csv", m.lambda);
            write_vector(dir / "kappa.csv", m.kappa);
          },
          [&](const DirectModel& m) {
            meta["gas_names"] = m.gas_names;
            meta["retain_counts"] = m.retain_counts;
            save_basis(m.basis, dir / "basis");
            write_matrix_csv(dir / "lambda.csv", m.lambda);
            write_matrix_csv(dir / "mask.csv", m.mask.cast<double>());
            write_vector(dir / "kappa.csv", m.kappa);
          },
          [&](const TfModel& m) {
            meta["gas_names"] = m.gas_names;
            meta["path_length_cm"] = m.path_length_cm;
            meta["condition_number"] = m.condition_number;
            meta["ridge"] = m.ridge;
            meta["library_fingerprint"] = m.library_fingerprint;
            save_basis(m.basis, dir / "basis");
            write_matrix_csv(dir / "beta_prime.csv", m.beta_prime);
            write_vector(dir / "eps_norms.csv", m.eps_norms);
            write_vector(dir / "noise_projection.csv", m.noise_projection);
          },
          [&](const PlsrModel& m) {
            meta["gas_names"] = m.gas_names;
            meta["iterations"] = m.iterations;
            write_matrix_csv(dir / "x_weights.csv", m.x_weights);
            write_matrix_csv(dir / "x_loadings.csv", m.x_loadings);
            write_matrix_csv(dir / "y_loadings.csv", m.y_loadings);
            write_matrix_csv(dir / "regression.csv", m.regression);
            write_vector(dir / "x_mean.csv", m.x_mean);
            write_vector(dir / "y_mean.csv", m.y_mean);
          },
          [&](const MeanModel& m) {
            meta["gas_names"] = m.gas_names;
            write_vector(dir / "mean.csv", m.mean);
          }},
      model);

  std::ofstream out(dir / "model.json", std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "model.json").string());
  out << meta.dump(2) << '\n';
}

QuantModel load_model(const std::filesystem::path& dir) {
  std::ifstream in(dir / "model.json", std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + (dir / "model.json").string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, (dir / "model.json").string() + ": " + e.what());
  }

  QuantModel model;
  try {
    if (meta.at("format").get<std::string>() != kModelFormat) {
      throw Error(ErrorCode::kVersion, "unsupported model format '" +
                                           meta["format"].get<std::string>() + "'");
    }
    const std::string kind = meta.at("kind").get<std::string>();
    const auto names = meta.at("gas_names").get<std::vector<std::string>>();
    if (kind == "lr") {
      LrModel m;
      m.basis = load_basis(dir / "basis");
      m.lambda = read_matrix_csv(dir / "lambda.csv", false);
      m.kappa = read_vector(dir / "kappa.csv");
      m.gas_names = names;
      m.in_sample_rmse = meta.at("in_sample_rmse").get<double>();
      m.condition_number = meta.at("condition_number").get<double>();
      model = std::move(m);
    } else if (kind == "direct") {
      DirectModel m;
      m.basis = load_basis(dir / "basis");
      m.lambda = read_matrix_csv(dir / "lambda.csv", false);
      m.mask = read_matrix_csv(dir / "mask.csv", false).array() != 0.0;
      m.kappa = read_vector(dir / "kappa.csv");
      m.retain_counts = meta.at("retain_counts").get<std::vector<int>>();
      m.gas_names = names;
      model = std::move(m);
    } else if (kind == "tf") {
      TfModel m;
      m.basis = load_basis(dir / "basis");
      m.beta_prime = read_matrix_csv(dir / "beta_prime.csv", false);
      m.eps_norms = read_vector(dir / "eps_norms.csv");
      m.noise_projection = read_vector(dir / "noise_projection.csv");
      m.path_length_cm = meta.at("path_length_cm").get<double>();
      m.condition_number = meta.at("condition_number").get<double>();
      m.ridge = meta.at("ridge").get<double>();
      m.library_fingerprint = meta.at("library_fingerprint").get<std::string>();
      m.gas_names = names;
      model = std::move(m);
    } else if (kind == "plsr") {
      PlsrModel m;
      m.x_weights = read_matrix_csv(dir / "x_weights.csv", false);
      m.x_loadings = read_matrix_csv(dir / "x_loadings.csv", false);
      m.y_loadings = read_matrix_csv(dir / "y_loadings.csv", false);
      m.regression = read_matrix_csv(dir / "regression.csv", false);
      m.x_mean = read_vector(dir / "x_mean.csv");
      m.y_mean = read_vector(dir / "y_mean.csv");
      m.iterations = meta.at("iterations").get<std::vector<int>>();
      m.gas_names = names;
      model = std::move(m);
    } else if (kind == "mean") {
      model = MeanModel{read_vector(dir / "mean.csv"), names};
    } else {
      throw Error(ErrorCode::kSchema, "unknown model kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, (dir / "model.json").string() + ": " + e.what());
  }

  const std::string expected = meta.value("fingerprint", std::string());
  if (expected != model_fingerprint(model)) {
    throw Error(ErrorCode::kFingerprint, "model in " + dir.string() + " does not match its fingerprint");
  }
  return model;
}

}  // namespace specquant
