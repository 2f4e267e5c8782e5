#include "crashsev/standardize.hpp"

#include "crashsev/error.hpp"

namespace crashsev {

void Standardizer::fit(const Eigen::MatrixXd& X) {
    if (X.rows() < 1) throw ValueError("cannot standardize an empty matrix");
    const double n = static_cast<double>(X.rows());
    mean = X.colwise().mean();
    sd.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        sd(j) = std::sqrt((X.col(j).array() - mean(j)).square().sum() / n);
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& X) const {
    if (X.cols() != mean.size()) throw ValueError("column count does not match the fit");
    Eigen::MatrixXd out(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double divisor = sd(j) > 0.0 ? sd(j) : 1.0;
        out.col(j) = (X.col(j).array() - mean(j)) / divisor;
    }
    return out;
}

Eigen::VectorXd Standardizer::transform_row(const Eigen::VectorXd& x) const {
    if (x.size() != mean.size()) throw ValueError("column count does not match the fit");
    Eigen::VectorXd out(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double divisor = sd(j) > 0.0 ? sd(j) : 1.0;
        out(j) = (x(j) - mean(j)) / divisor;
    }
    return out;
}

}  // namespace crashsev
