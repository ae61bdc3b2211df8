#include "specquant/spectra_csv.hpp"

#include "specquant/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace specquant {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
  cell = trim(cell);
  double value = 0.0;
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw Error(ErrorCode::kParse, "row " + std::to_string(row) + ", column " +
                                       std::to_string(col + 1) + ": not a number: '" +
                                       std::string(cell) + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

SpectraTable parse_spectra_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;

  std::vector<std::string> names;
  while (std::getline(in, line)) {
    ++row;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw Error(ErrorCode::kParse, "spectra CSV is empty");
  {
    const auto header = split_commas(trim(line));
    if (trim(header[0]) != "wavelength_um") {
      throw Error(ErrorCode::kParse, "row " + std::to_string(row) +
                                         ": first header column must be 'wavelength_um'");
    }
    for (std::size_t c = 1; c < header.size(); ++c) {
      const auto name = trim(header[c]);
      if (name.empty()) {
        throw Error(ErrorCode::kParse, "row " + std::to_string(row) + ": empty column name");
      }
      names.emplace_back(name);
    }
  }

  std::vector<double> wavelengths;
  std::vector<std::vector<double>> columns(names.size());
  while (std::getline(in, line)) {
    ++row;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto cells = split_commas(body);
    if (cells.size() != names.size() + 1) {
      throw Error(ErrorCode::kParse, "row " + std::to_string(row) + ": expected " +
                                         std::to_string(names.size() + 1) + " cells, found " +
                                         std::to_string(cells.size()));
    }
    const double wl = parse_cell(cells[0], row, 0);
    if (!wavelengths.empty() && !(wl > wavelengths.back())) {
      throw Error(ErrorCode::kParse,
                  "row " + std::to_string(row) + ": wavelengths must be strictly increasing");
    }
    wavelengths.push_back(wl);
    for (std::size_t c = 0; c < names.size(); ++c) {
      columns[c].push_back(parse_cell(cells[c + 1], row, c + 1));
    }
  }

  SpectraTable table;
  try {
    table.grid = std::make_shared<const WavelengthGrid>(std::move(wavelengths));
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, std::string("invalid wavelength column: ") + e.what());
  }
  table.names = std::move(names);
  for (auto& col : columns) {
    table.spectra.emplace_back(table.grid, Eigen::Map<const Vector>(col.data(), col.size()));
  }
  return table;
}

SpectraTable read_spectra_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_spectra_csv(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string format_spectra_csv(const SpectraTable& table) {
  if (!table.grid) throw Error(ErrorCode::kConfiguration, "spectra table without a grid");
  if (table.names.size() != table.spectra.size()) {
    throw Error(ErrorCode::kDimension, "spectra table: names and spectra differ in count");
  }
  std::string out = "wavelength_um";
  for (const auto& n : table.names) {
    out += ',';
    out += n;
  }
  out += '\n';
  const auto& pts = table.grid->points();
  for (std::size_t j = 0; j < pts.size(); ++j) {
    out += format_double(pts[j]);
    for (const auto& s : table.spectra) {
      require_same_grid(table.grid, s.grid(), "write_spectra_csv");
      out += ',';
      out += format_double(s.values()(static_cast<Eigen::Index>(j)));
    }
    out += '\n';
  }
  return out;
}

void write_spectra_csv(const std::filesystem::path& path, const SpectraTable& table) {
  const std::string text = format_spectra_csv(table);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

}  // namespace specquant
