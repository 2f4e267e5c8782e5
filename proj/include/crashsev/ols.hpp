#pragma once

#include <Eigen/Dense>

namespace crashsev {

/// Least-squares fit of target on [1 | regressors].
struct OlsFit {
    double alpha = 0.0;          // intercept
    Eigen::VectorXd coeffs;      // one per regressor column
    Eigen::VectorXd residuals;   // target - prediction
    double rss = 0.0;
    double resid_var = 0.0;      // rss / n_eff
    std::int64_t n_eff = 0;      // usable rows
    int k = 0;                   // coefficient count including intercept
    bool used_ridge = false;
};

/// Solves the normal equations with a Cholesky factorization. When the Gram
/// matrix is not positive definite, retries once with a ridge term
/// 1e-8 * trace / k on the diagonal; a second failure raises
/// SingularityError. Requires rows >= columns + 1.
OlsFit fit_ols(const Eigen::VectorXd& target, const Eigen::MatrixXd& regressors);

}  // namespace crashsev
