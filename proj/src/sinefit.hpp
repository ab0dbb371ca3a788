#ifndef SPDCSIM_SINEFIT_HPP
#define SPDCSIM_SINEFIT_HPP

// Weighted least-squares fit of fringe data to a + b cos(2 theta + c),
// linearized over the basis {1, cos 2theta, sin 2theta}. The fringe
// visibility is |b| / a.

#include <vector>

namespace spdcsim {

struct SineFit {
    double offset = 0.0;      // a
    double amplitude = 0.0;   // |b|
    double phase_rad = 0.0;   // c
    double visibility = 0.0;  // |b| / a
    double visibility_err = 0.0;
};

/// theta_rad, y and sigma must have equal sizes (>= 3 points); sigma
/// entries <= 0 are treated as unit weights.
SineFit fit_fringe(const std::vector<double>& theta_rad, const std::vector<double>& y,
                   const std::vector<double>& sigma);

} // namespace spdcsim

#endif
