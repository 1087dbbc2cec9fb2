#pragma once

#include <Eigen/Dense>
#include <functional>

namespace srcimg {

struct BoundedLMOptions {
    int max_iter = 100;
    double ftol = 1e-12;  // relative cost decrease
    double xtol = 1e-12;  // step norm relative to |x| + xtol
    double fd_step = 1e-7;
};

struct BoundedLMResult {
    Eigen::VectorXd x;
    double cost = 0.0;  // 0.5 |r|^2
    int iterations = 0;
};

// Levenberg-Marquardt with box constraints by projection: each trial step is clipped to
// [lo, hi]; the Jacobian is a one-sided finite difference that steps away from the nearer
// bound. Suited to the small problems here (a few dozen parameters).
BoundedLMResult bounded_lm(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
                           Eigen::VectorXd x0, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           const BoundedLMOptions& opt = {});

}  // namespace srcimg
