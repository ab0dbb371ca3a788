#include "sinefit.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "errors.hpp"

namespace spdcsim {

SineFit fit_fringe(const std::vector<double>& theta_rad, const std::vector<double>& y,
                   const std::vector<double>& sigma) {
    const std::size_t n = theta_rad.size();
    if (n < 3 || y.size() != n || sigma.size() != n) {
        throw std::invalid_argument("fit_fringe: need >= 3 points with matching y and sigma sizes");
    }

    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = sigma[i] > 0.0 ? 1.0 / sigma[i] : 1.0;
        design(i, 0) = w;
        design(i, 1) = w * std::cos(2.0 * theta_rad[i]);
        design(i, 2) = w * std::sin(2.0 * theta_rad[i]);
        rhs(i) = w * y[i];
    }

    const Eigen::Matrix3d normal = design.transpose() * design;
    const Eigen::Vector3d beta = normal.ldlt().solve(design.transpose() * rhs);
    const Eigen::Matrix3d cov = normal.inverse();

    const double a = beta(0);
    const double p = beta(1);
    const double q = beta(2);
    const double b = std::hypot(p, q);

    SineFit fit;
    fit.offset = a;
    fit.amplitude = b;
    // a + p cos2t + q sin2t = a + b cos(2t + c) with p = b cos c, q = -b sin c.
    fit.phase_rad = std::atan2(-q, p);
    if (a <= 0.0) {
        throw UndefinedResultError("fit_fringe: nonpositive fringe offset, visibility undefined");
    }
    fit.visibility = b / a;

    // Delta method on V = hypot(p,q)/a.
    if (b > 0.0) {
        Eigen::Vector3d grad;
        grad << -b / (a * a), p / (b * a), q / (b * a);
        const double var = grad.transpose() * cov * grad;
        fit.visibility_err = var > 0.0 ? std::sqrt(var) : 0.0;
    } else {
        fit.visibility_err = std::sqrt(std::max(0.0, (cov(1, 1) + cov(2, 2)))) / a;
    }
    return fit;
}

} // namespace spdcsim
