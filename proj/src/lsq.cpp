#include "srcimg/lsq.hpp"

#include <algorithm>
#include <cmath>

namespace srcimg {

BoundedLMResult bounded_lm(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
                           Eigen::VectorXd x0, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           const BoundedLMOptions& opt) {
    const Eigen::Index n = x0.size();
    Eigen::VectorXd x = x0.cwiseMax(lo).cwiseMin(hi);
    Eigen::VectorXd r = residual(x);
    double cost = 0.5 * r.squaredNorm();
    double lambda = -1.0;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        Eigen::MatrixXd J(r.size(), n);
        for (Eigen::Index j = 0; j < n; ++j) {
            double h = opt.fd_step * std::max(1.0, std::abs(x[j]));
            if (x[j] + h > hi[j]) h = -h;
            Eigen::VectorXd xp = x;
            xp[j] += h;
            J.col(j) = (residual(xp) - r) / h;
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        if (lambda < 0) lambda = 1e-3 * std::max(JtJ.diagonal().maxCoeff(), 1e-300);
        bool improved = false;
        for (int tries = 0; tries < 30; ++tries) {
            Eigen::MatrixXd A = JtJ;
            for (Eigen::Index j = 0; j < n; ++j) A(j, j) += lambda * std::max(JtJ(j, j), 1e-12);
            Eigen::VectorXd step = A.ldlt().solve(-g);
            Eigen::VectorXd xn = (x + step).cwiseMax(lo).cwiseMin(hi);
            Eigen::VectorXd rn = residual(xn);
            const double cn = 0.5 * rn.squaredNorm();
            if (cn < cost) {
                const double dc = cost - cn;
                const double dx = (xn - x).norm();
                x = xn;
                r = rn;
                const double old = cost;
                cost = cn;
                lambda = std::max(lambda / 3.0, 1e-12);
                improved = true;
                if (dc <= opt.ftol * old || dx <= opt.xtol * (x.norm() + opt.xtol)) return {x, cost, it + 1};
                break;
            }
            lambda *= 4.0;
        }
        if (!improved) break;
    }
    return {x, cost, it};
}

}  // namespace srcimg
