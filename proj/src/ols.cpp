#include "crashsev/ols.hpp"

#include <Eigen/Cholesky>

#include "crashsev/error.hpp"

namespace crashsev {

OlsFit fit_ols(const Eigen::VectorXd& target, const Eigen::MatrixXd& regressors) {
    const std::int64_t n = target.size();
    if (regressors.rows() != n)
        throw ValueError("regressor rows do not match target length");
    const int k = static_cast<int>(regressors.cols()) + 1;
    if (n < k)
        throw InsufficientDataError("need at least " + std::to_string(k) + " rows for " +
                                    std::to_string(k) + " coefficients, have " + std::to_string(n));

    Eigen::MatrixXd design(n, k);
    design.col(0).setOnes();
    if (k > 1) design.rightCols(k - 1) = regressors;

    Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::VectorXd rhs = design.transpose() * target;

    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    bool used_ridge = false;
    if (llt.info() != Eigen::Success) {
        const double ridge = 1e-8 * gram.trace() / static_cast<double>(k);
        gram.diagonal().array() += ridge;
        llt.compute(gram);
        used_ridge = true;
        if (llt.info() != Eigen::Success)
            throw SingularityError("design matrix is rank-deficient even after ridge retry");
    }
    const Eigen::VectorXd coef = llt.solve(rhs);

    OlsFit fit;
    fit.alpha = coef(0);
    fit.coeffs = coef.tail(k - 1);
    fit.residuals = target - design * coef;
    fit.rss = fit.residuals.squaredNorm();
    fit.n_eff = n;
    fit.resid_var = fit.rss / static_cast<double>(n);
    fit.k = k;
    fit.used_ridge = used_ridge;
    return fit;
}

}  // namespace crashsev
