#ifndef ROTSPEC_LEVMAR_HPP
#define ROTSPEC_LEVMAR_HPP

#include <functional>
#include <optional>
#include <vector>

namespace rotspec {

// Residual vector r(p); the objective is sum r_i^2.
using ResidualFn = std::function<void(const std::vector<double>&, std::vector<double>&)>;
// Row-major n_residuals x n_params Jacobian dr_i/dp_j.
using JacobianFn = std::function<void(const std::vector<double>&, std::vector<double>&)>;

struct LevMarOptions {
  double lambda0 = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 0.1;
  int max_iter = 200;
  double ftol = 1e-10;  // relative chi^2 change on accepted steps
  double gtol = 1e-8;   // infinity norm of the gradient
};

enum class LevMarStatus { converged, max_iter, singular };

struct LevMarResult {
  std::vector<double> params;
  double chi2 = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  LevMarStatus status = LevMarStatus::converged;
  // (J^T J)^-1 * chi2 / (n - p) at the solution, row-major p x p; zero when
  // the problem has no residual degrees of freedom.
  std::vector<double> covariance;
  int n_residuals = 0;
};

// Damped Gauss-Newton with multiplicative lambda control; accepted steps
// never increase chi^2. Uses forward-difference Jacobians when no analytic
// one is given.
LevMarResult levmar(const ResidualFn& residual, const std::optional<JacobianFn>& jacobian,
                    std::vector<double> init, int n_residuals,
                    const LevMarOptions& options = {});

}  // namespace rotspec

#endif
