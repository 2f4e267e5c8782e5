#pragma once

#include <Eigen/Dense>

namespace crashsev {

/// Per-column z-score transform. Fitted once (usually on a training split)
/// and applied elsewhere. Constant columns map to zero rather than dividing
/// by a zero spread.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;  ///< population form (divisor n)

    void fit(const Eigen::MatrixXd& X);
    Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
    Eigen::VectorXd transform_row(const Eigen::VectorXd& x) const;
};

}  // namespace crashsev
