#pragma once

#include <functional>

#include <Eigen/Dense>

namespace nel::oracle {

/// Damped Newton ascent with central finite-difference derivatives. Falls
/// back to gradient steps where the Hessian is not negative definite.
Eigen::VectorXd maximize(const std::function<double(const Eigen::VectorXd&)>& f,
                         Eigen::VectorXd start, int max_iter = 500);

/// Brent search over log(x) in [lo, hi] for a positive scalar.
double maximize_positive(const std::function<double(double)>& f, double lo, double hi);

/// Symmetric positive-definite matrix from an unconstrained vector: a lower
/// triangular factor with log-diagonal, filled column by column.
Eigen::MatrixXd spd_from_params(const Eigen::VectorXd& theta, int d);
Eigen::VectorXd params_from_spd(const Eigen::MatrixXd& a);

/// Maximizer over symmetric positive-definite matrices.
Eigen::MatrixXd maximize_spd(const std::function<double(const Eigen::MatrixXd&)>& f,
                             const Eigen::MatrixXd& start);

}  // namespace nel::oracle
