#include "specquant/plsr.hpp"

#include "specquant/error.hpp"
#include "specquant/fingerprint.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace specquant {

namespace {

// Deflated X carries no more signal once its cross-covariance with Y falls
// this far below the first component's.
constexpr double kExhaustedRatio = 1e-12;

Vector initial_y_score(const Matrix& x, const Matrix& y, bool warm_start) {
  if (warm_start) {
    const Matrix cross = x.transpose() * y;  // M x K
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cross.transpose() * cross);
    const Vector v = eig.eigenvectors().col(eig.eigenvectors().cols() - 1);
    return y * v;
  }
  Eigen::Index best = 0;
  (y.colwise().squaredNorm()).maxCoeff(&best);
  return y.col(best);
}

}  // namespace

std::string PlsrModel::fingerprint() const {
  Fingerprint fp;
  fp.add("plsr");
  for (const Matrix* m : {&x_weights, &x_loadings, &y_loadings, &regression}) {
    fp.add(static_cast<std::uint64_t>(m->rows()));
    fp.add(std::span<const double>(m->data(), static_cast<std::size_t>(m->size())));
  }
  fp.add(std::span<const double>(x_mean.data(), static_cast<std::size_t>(x_mean.size())));
  fp.add(std::span<const double>(y_mean.data(), static_cast<std::size_t>(y_mean.size())));
  for (const auto& n : gas_names) fp.add(n);
  return fp.hex();
}

PlsrModel fit_plsr(const RowMatrix& x_in, const RowMatrix& y_in, const PlsrOptions& options) {
  const Eigen::Index n = x_in.rows();
  const Eigen::Index m = x_in.cols();
  const Eigen::Index k = y_in.cols();
  if (y_in.rows() != n) throw Error(ErrorCode::kDimension, "fit_plsr: X and Y differ in length");
  if (n < 2) throw Error(ErrorCode::kUnderdetermined, "fit_plsr needs at least 2 samples");
  if (options.components < 1 || options.components > std::min(n - 1, m)) {
    throw Error(ErrorCode::kBound, "PLSR component count must lie in [1, min(N - 1, M)] = [1, " +
                                       std::to_string(std::min(n - 1, m)) + "]");
  }
  if (!(options.tolerance > 0.0) || options.max_iterations < 1) {
    throw Error(ErrorCode::kConfiguration, "PLSR tolerance and iteration limit must be positive");
  }

  PlsrModel model;
  model.x_mean = x_in.colwise().mean().transpose();
  model.y_mean = y_in.colwise().mean().transpose();
  Matrix x = x_in.rowwise() - model.x_mean.transpose();
  Matrix y = y_in.rowwise() - model.y_mean.transpose();

  const Eigen::Index a_max = options.components;
  Matrix w_all(m, a_max), p_all(m, a_max), q_all(k, a_max), t_all(n, a_max);
  Eigen::Index a = 0;
  double first_strength = 0.0;
  for (; a < a_max; ++a) {
    Vector u = initial_y_score(x, y, options.warm_start);
    if (!(u.norm() > 0.0)) break;
    Vector w, t, q;
    Vector t_old;
    int iter = 0;
    bool converged = false;
    while (iter < options.max_iterations) {
      ++iter;
      w = x.transpose() * u;
      const double wn = w.norm();
      if (a == 0 && iter == 1) first_strength = wn / u.norm();
      if (!(wn / u.norm() > kExhaustedRatio * first_strength)) break;
      w /= wn;
      t = x * w;
      q = y.transpose() * t / t.squaredNorm();
      const double qq = q.squaredNorm();
      if (!(qq > 0.0)) {
        converged = true;
        break;
      }
      u = y * q / qq;
      if (t_old.size() && (t - t_old).norm() <= options.tolerance * t.norm()) {
        converged = true;
        break;
      }
      t_old = t;
    }
    if (t.size() == 0 || (!converged && iter < options.max_iterations)) break;  // X exhausted
    if (!converged) {
      throw Error(ErrorCode::kConvergence, "NIPALS did not converge for component " +
                                               std::to_string(a + 1) + " within " +
                                               std::to_string(options.max_iterations) +
                                               " iterations");
    }
    const double tt = t.squaredNorm();
    const Vector p = x.transpose() * t / tt;
    x.noalias() -= t * p.transpose();
    y.noalias() -= t * q.transpose();
    w_all.col(a) = w;
    p_all.col(a) = p;
    q_all.col(a) = q;
    t_all.col(a) = t;
    model.iterations.push_back(iter);
  }
  if (a == 0) throw Error(ErrorCode::kDegenerateLibrary, "PLSR: X carries no signal about Y");

  model.x_weights = w_all.leftCols(a);
  model.x_loadings = p_all.leftCols(a);
  model.y_loadings = q_all.leftCols(a);
  model.train_scores = t_all.leftCols(a);
  const Matrix pw = model.x_loadings.transpose() * model.x_weights;
  model.regression =
      model.x_weights * pw.partialPivLu().solve(model.y_loadings.transpose());
  return model;
}

PlsrModel fit_plsr(const SpectraDataset& training, const PlsrOptions& options) {
  PlsrModel model = fit_plsr(training.absorbances, training.concentrations, options);
  model.gas_names = training.gas_names;
  return model;
}

RowMatrix predict_plsr(const PlsrModel& model, const RowMatrix& spectra) {
  if (spectra.cols() != model.x_mean.size()) {
    throw Error(ErrorCode::kDimension, "predict_plsr: spectra width does not match the model");
  }
  RowMatrix out = (spectra.rowwise() - model.x_mean.transpose()) * model.regression;
  out.rowwise() += model.y_mean.transpose();
  return out;
}

}  // namespace specquant
