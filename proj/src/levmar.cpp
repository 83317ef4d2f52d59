#include "rotspec/levmar.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "rotspec/errors.hpp"

namespace rotspec {

namespace {

Eigen::VectorXd eval_residual(const ResidualFn& fn, const std::vector<double>& p, int n) {
  std::vector<double> r;
  fn(p, r);
  if (static_cast<int>(r.size()) != n)
    throw ValidationError("residual function returned wrong length");
  return Eigen::Map<const Eigen::VectorXd>(r.data(), n);
}

Eigen::MatrixXd eval_jacobian(const ResidualFn& residual,
                              const std::optional<JacobianFn>& jacobian,
                              const std::vector<double>& p, const Eigen::VectorXd& r0, int n) {
  const int np = static_cast<int>(p.size());
  Eigen::MatrixXd jac(n, np);
  if (jacobian) {
    std::vector<double> flat;
    (*jacobian)(p, flat);
    if (static_cast<int>(flat.size()) != n * np)
      throw ValidationError("jacobian function returned wrong size");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < np; ++j) jac(i, j) = flat[static_cast<std::size_t>(i) * np + j];
    return jac;
  }
  // Forward differences.
  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  std::vector<double> pj = p;
  for (int j = 0; j < np; ++j) {
    const double h = sqrt_eps * std::max(std::abs(p[static_cast<std::size_t>(j)]), 1.0);
    pj[static_cast<std::size_t>(j)] = p[static_cast<std::size_t>(j)] + h;
    const Eigen::VectorXd rj = eval_residual(residual, pj, n);
    jac.col(j) = (rj - r0) / h;
    pj[static_cast<std::size_t>(j)] = p[static_cast<std::size_t>(j)];
  }
  return jac;
}

}  // namespace

LevMarResult levmar(const ResidualFn& residual, const std::optional<JacobianFn>& jacobian,
                    std::vector<double> init, int n_residuals, const LevMarOptions& options) {
  const int np = static_cast<int>(init.size());
  if (np < 1) throw ValidationError("levmar: need at least one parameter");
  if (n_residuals < 1) throw ValidationError("levmar: need at least one residual");

  LevMarResult result;
  result.n_residuals = n_residuals;

  std::vector<double> p = std::move(init);
  Eigen::VectorXd r = eval_residual(residual, p, n_residuals);
  if (!r.allFinite()) {
    result.params = p;
    result.status = LevMarStatus::singular;
    return result;
  }
  double chi2 = r.squaredNorm();
  Eigen::MatrixXd jac = eval_jacobian(residual, jacobian, p, r, n_residuals);
  Eigen::VectorXd grad = jac.transpose() * r;
  Eigen::MatrixXd jtj = jac.transpose() * jac;

  double lambda = options.lambda0;
  LevMarStatus status = LevMarStatus::max_iter;
  int iter = 0;

  if (grad.lpNorm<Eigen::Infinity>() < options.gtol) status = LevMarStatus::converged;

  while (status == LevMarStatus::max_iter && iter < options.max_iter) {
    ++iter;
    // Marquardt scaling with a floor so columns with no leverage get a zero
    // step instead of a singular solve.
    const double max_diag = jtj.diagonal().maxCoeff();
    Eigen::VectorXd damp = jtj.diagonal();
    const double floor = std::max(1e-12 * std::max(max_diag, 0.0), 1e-300);
    for (int i = 0; i < np; ++i) damp(i) = std::max(damp(i), floor);

    Eigen::MatrixXd a = jtj;
    a.diagonal() += lambda * damp;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success) {
      status = LevMarStatus::singular;
      break;
    }
    const Eigen::VectorXd delta = ldlt.solve(-grad);
    if (!delta.allFinite()) {
      status = LevMarStatus::singular;
      break;
    }

    std::vector<double> p_try = p;
    for (int i = 0; i < np; ++i) p_try[static_cast<std::size_t>(i)] += delta(i);
    Eigen::VectorXd r_try;
    bool ok = true;
    try {
      r_try = eval_residual(residual, p_try, n_residuals);
      ok = r_try.allFinite();
    } catch (const Error&) {
      ok = false;
    }
    const double chi2_try = ok ? r_try.squaredNorm() : std::numeric_limits<double>::infinity();

    if (ok && chi2_try <= chi2) {
      const double rel_change = (chi2 - chi2_try) / std::max(chi2, 1e-300);
      p = std::move(p_try);
      r = std::move(r_try);
      chi2 = chi2_try;
      lambda = std::max(lambda * options.lambda_down, 1e-14);
      jac = eval_jacobian(residual, jacobian, p, r, n_residuals);
      grad = jac.transpose() * r;
      jtj = jac.transpose() * jac;
      if (grad.lpNorm<Eigen::Infinity>() < options.gtol || rel_change < options.ftol ||
          chi2 == 0.0)
        status = LevMarStatus::converged;
    } else {
      lambda *= options.lambda_up;
      if (lambda > 1e14) break;  // no acceptable step exists at this point
    }
  }

  result.params = p;
  result.chi2 = chi2;
  result.iterations = iter;
  result.grad_norm = grad.lpNorm<Eigen::Infinity>();
  result.status = status;

  // Covariance at the solution.
  result.covariance.assign(static_cast<std::size_t>(np) * np, 0.0);
  if (n_residuals > np && chi2 >= 0.0 && status != LevMarStatus::singular) {
    const double scale = chi2 / (n_residuals - np);
    Eigen::MatrixXd cov;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(jtj);
    if (ldlt.info() == Eigen::Success) {
      cov = ldlt.solve(Eigen::MatrixXd::Identity(np, np));
    } else {
      // Rank-deficient: pseudo-inverse keeps the well-determined directions.
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(jtj, Eigen::ComputeThinU | Eigen::ComputeThinV);
      svd.setThreshold(1e-12);
      cov = svd.solve(Eigen::MatrixXd::Identity(np, np));
    }
    if (cov.allFinite()) {
      for (int i = 0; i < np; ++i)
        for (int j = 0; j < np; ++j)
          result.covariance[static_cast<std::size_t>(i) * np + j] = scale * cov(i, j);
    }
  }
  return result;
}

}  // namespace rotspec
