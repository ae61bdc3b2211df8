#include "specquant/dataset_io.hpp"

#include "specquant/error.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace specquant {

namespace {

constexpr std::array<char, 8> kMagic = {'S', 'P', 'Q', 'D', 'S', 'E', 'T', '\0'};

static_assert(std::endian::native == std::endian::little,
              "dataset I/O assumes a little-endian host");

nlohmann::json scheme_to_json(const ConcentrationScheme& s) {
  return {{"mode", s.mode == ConcentrationMode::kUniform ? "uniform" : "log-uniform"},
          {"low", s.low},
          {"high", s.high},
          {"presence_prob", s.presence_prob}};
}

ConcentrationScheme scheme_from_json(const nlohmann::json& j) {
  ConcentrationScheme s;
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "uniform") {
    s.mode = ConcentrationMode::kUniform;
  } else if (mode == "log-uniform") {
    s.mode = ConcentrationMode::kLogUniform;
  } else {
    throw Error(ErrorCode::kSchema, "unknown concentration mode '" + mode + "'");
  }
  s.low = j.at("low").get<double>();
  s.high = j.at("high").get<double>();
  s.presence_prob = j.at("presence_prob").get<double>();
  return s;
}

void write_matrix(std::ofstream& out, const RowMatrix& m) {
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

}  // namespace

void save_dataset(const SpectraDataset& ds, const std::filesystem::path& path) {
  if (ds.absorbances.rows() != ds.concentrations.rows() ||
      static_cast<std::size_t>(ds.absorbances.cols()) != ds.grid->size() ||
      static_cast<std::size_t>(ds.concentrations.cols()) != ds.gas_names.size()) {
    throw Error(ErrorCode::kDimension, "dataset matrices are inconsistent with its metadata");
  }
  nlohmann::json header;
  header["format"] = "specquant-dataset";
  header["version"] = kDatasetFormatVersion;
  header["n"] = ds.size();
  header["m"] = ds.absorbances.cols();
  header["k"] = ds.gas_count();
  header["grid"] = ds.grid->points();
  header["spacing"] = ds.grid->spacing_mode() == SpacingMode::kUniform ? "uniform" : "explicit";
  header["gases"] = ds.gas_names;
  header["path_length_cm"] = ds.path_length_cm;
  if (ds.noise) {
    header["noise"] = {{"snr_db", ds.noise->snr_db()}, {"sigma", ds.noise->sigma()}};
  } else {
    header["noise"] = nullptr;
  }
  header["scheme"] = scheme_to_json(ds.scheme);
  header["library_fingerprint"] = ds.library_fingerprint;
  header["seed"] = ds.seed;
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  const std::uint64_t length = text.size();
  out.write(reinterpret_cast<const char*>(&length), sizeof(length));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_matrix(out, ds.absorbances);
  write_matrix(out, ds.concentrations);
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

SpectraDataset load_dataset(const std::filesystem::path& path, const GasLibrary* library) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open dataset " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != static_cast<std::streamsize>(magic.size())) {
    throw Error(ErrorCode::kTruncated, path.string() + ": file too short for a dataset header");
  }
  if (magic != kMagic) throw Error(ErrorCode::kParse, path.string() + ": not a specquant dataset");
  std::uint64_t length = 0;
  in.read(reinterpret_cast<char*>(&length), sizeof(length));
  if (in.gcount() != sizeof(length)) {
    throw Error(ErrorCode::kTruncated, path.string() + ": truncated header length");
  }
  const auto file_size = std::filesystem::file_size(path);
  if (length > file_size) throw Error(ErrorCode::kTruncated, path.string() + ": truncated header");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (static_cast<std::uint64_t>(in.gcount()) != length) {
    throw Error(ErrorCode::kTruncated, path.string() + ": truncated header");
  }

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": bad header: " + e.what());
  }

  SpectraDataset ds;
  std::size_t n = 0, m = 0, k = 0;
  try {
    if (header.at("format").get<std::string>() != "specquant-dataset") {
      throw Error(ErrorCode::kParse, path.string() + ": not a specquant dataset");
    }
    const int version = header.at("version").get<int>();
    if (version != kDatasetFormatVersion) {
      throw Error(ErrorCode::kVersion, path.string() + ": dataset format version " +
                                           std::to_string(version) + ", expected " +
                                           std::to_string(kDatasetFormatVersion));
    }
    n = header.at("n").get<std::size_t>();
    m = header.at("m").get<std::size_t>();
    k = header.at("k").get<std::size_t>();
    const auto mode = header.value("spacing", std::string("explicit")) == "uniform"
                          ? SpacingMode::kUniform
                          : SpacingMode::kExplicit;
    ds.grid = std::make_shared<const WavelengthGrid>(header.at("grid").get<std::vector<double>>(), mode);
    ds.gas_names = header.at("gases").get<std::vector<std::string>>();
    ds.path_length_cm = header.at("path_length_cm").get<double>();
    if (!header.at("noise").is_null()) {
      ds.noise = NoiseSpec::from_snr_db(header["noise"].at("snr_db").get<double>());
    }
    ds.scheme = scheme_from_json(header.at("scheme"));
    ds.library_fingerprint = header.at("library_fingerprint").get<std::string>();
    ds.seed = header.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, path.string() + ": bad header: " + e.what());
  }
  if (ds.grid->size() != m || ds.gas_names.size() != k) {
    throw Error(ErrorCode::kDimension, path.string() + ": header dimensions disagree");
  }

  const std::uint64_t offset = sizeof(kMagic) + sizeof(length) + length;
  const std::uint64_t payload = file_size - offset;
  const std::uint64_t row_bytes = (m + k) * sizeof(double);
  const std::uint64_t expected = n * row_bytes;
  if (payload != expected) {
    if (payload % row_bytes == 0 && payload > 0) {
      throw Error(ErrorCode::kDimension, path.string() + ": header declares " + std::to_string(n) +
                                             " rows but payload holds " +
                                             std::to_string(payload / row_bytes));
    }
    throw Error(ErrorCode::kTruncated, path.string() + ": payload has " + std::to_string(payload) +
                                           " bytes, expected " + std::to_string(expected));
  }
  ds.absorbances.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  ds.concentrations.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  in.read(reinterpret_cast<char*>(ds.absorbances.data()),
          static_cast<std::streamsize>(n * m * sizeof(double)));
  in.read(reinterpret_cast<char*>(ds.concentrations.data()),
          static_cast<std::streamsize>(n * k * sizeof(double)));
  if (!in) throw Error(ErrorCode::kTruncated, path.string() + ": short read");

  if (library) {
    if (library->fingerprint() != ds.library_fingerprint) {
      throw Error(ErrorCode::kFingerprint, path.string() + ": generated from library " +
                                               ds.library_fingerprint + ", not " +
                                               library->fingerprint());
    }
  }
  return ds;
}

}  // namespace specquant
