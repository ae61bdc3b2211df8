#include "specquant/kernels.hpp"

#include "specquant/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace specquant::kernels {

void add_intensity_noise(double* row, std::size_t m, double sigma, std::uint64_t stream_key) {
  std::mt19937_64 engine(stream_key);
  std::normal_distribution<double> rho(0.0, sigma);
  for (std::size_t j = 0; j < m; ++j) {
    double r = rho(engine);
    while (!(1.0 + r > 0.0)) r = rho(engine);
    row[j] -= std::log1p(r) / std::numbers::ln10;
  }
}

void synthesize_row(const ForwardSetup& setup, std::size_t i, double* absorbance_row,
                    double* concentration_row) {
  const RowMatrix& shapes = *setup.shapes;
  const Eigen::Index k = shapes.rows();
  const Eigen::Index m = shapes.cols();
  for (Eigen::Index g = 0; g < k; ++g) {
    concentration_row[g] =
        sample_concentration(setup.scheme, setup.seed, i, static_cast<std::size_t>(g));
  }
  std::fill(absorbance_row, absorbance_row + m, 0.0);
  for (Eigen::Index g = 0; g < k; ++g) {
    const double scale = setup.scaled_norms(g) * concentration_row[g];
    if (scale == 0.0) continue;
    const double* shape = shapes.row(g).data();
    for (Eigen::Index j = 0; j < m; ++j) absorbance_row[j] += scale * shape[j];
  }
  if (setup.noise) {
    add_intensity_noise(absorbance_row, static_cast<std::size_t>(m), setup.noise->sigma(),
                        rng::key(setup.seed, rng::kNoise, i));
  }
}

void project_row(const double* x, const Vector& offset, const Vector& weights,
                 const Matrix& components, double* scores_row) {
  const Eigen::Index m = components.rows();
  const Eigen::Index l = components.cols();
  Eigen::Map<const Vector> row(x, m);
  const Vector weighted = (row - offset).cwiseProduct(weights);
  for (Eigen::Index c = 0; c < l; ++c) scores_row[c] = components.col(c).dot(weighted);
}

void reconstruct_row(const double* scores_row, const Matrix& components, const Vector& mean,
                     Eigen::Index count, double* x) {
  Eigen::Map<Vector> out(x, components.rows());
  out = mean;
  for (Eigen::Index c = 0; c < count; ++c) out += scores_row[c] * components.col(c);
}

namespace serial {

void synthesize_rows(const ForwardSetup& setup, std::size_t begin, RowMatrix& absorbances,
                     RowMatrix& concentrations) {
  for (Eigen::Index r = 0; r < absorbances.rows(); ++r) {
    synthesize_row(setup, begin + static_cast<std::size_t>(r), absorbances.row(r).data(),
                   concentrations.row(r).data());
  }
}

RowMatrix project_rows(const RowMatrix& x, const Vector& offset, const Vector& weights,
                       const Matrix& components) {
  RowMatrix scores(x.rows(), components.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    project_row(x.row(r).data(), offset, weights, components, scores.row(r).data());
  }
  return scores;
}

RowMatrix reconstruct_rows(const RowMatrix& scores, const Matrix& components, const Vector& mean,
                           Eigen::Index count) {
  RowMatrix x(scores.rows(), components.rows());
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    reconstruct_row(scores.row(r).data(), components, mean, count, x.row(r).data());
  }
  return x;
}

}  // namespace serial

namespace omp {

void synthesize_rows(const ForwardSetup& setup, std::size_t begin, RowMatrix& absorbances,
                     RowMatrix& concentrations) {
  const Eigen::Index n = absorbances.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < n; ++r) {
    synthesize_row(setup, begin + static_cast<std::size_t>(r), absorbances.row(r).data(),
                   concentrations.row(r).data());
  }
}

RowMatrix project_rows(const RowMatrix& x, const Vector& offset, const Vector& weights,
                       const Matrix& components) {
  RowMatrix scores(x.rows(), components.cols());
  const Eigen::Index n = x.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < n; ++r) {
    project_row(x.row(r).data(), offset, weights, components, scores.row(r).data());
  }
  return scores;
}

RowMatrix reconstruct_rows(const RowMatrix& scores, const Matrix& components, const Vector& mean,
                           Eigen::Index count) {
  RowMatrix x(scores.rows(), components.rows());
  const Eigen::Index n = scores.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < n; ++r) {
    reconstruct_row(scores.row(r).data(), components, mean, count, x.row(r).data());
  }
  return x;
}

}  // namespace omp

}  // namespace specquant::kernels
