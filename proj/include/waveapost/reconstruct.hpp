#pragma once

#include "waveapost/stepper.hpp"

#include <optional>

namespace waveapost {

/// mu^n(t) = -6/k_n (t - midpoint of the n-th interval).
double mu(const TimeGrid& grid, int n, double t);

/// Second backward difference (dU^n - dU^{n-1}) / k_n, n >= 1.
Field second_difference(const Trajectory& traj, int n);

/// Time reconstruction U_hat and its first two time derivatives at t, using the
/// formula of the interval (t^{n-1}, t^n]. `deriv` in {0, 1, 2}.
Field eval_U_hat_on(const Trajectory& traj, int n, double t, int deriv = 0);
/// As above, with n chosen so that t lies in (t^{n-1}, t^n]; at t = 0 the
/// initial data U^0, V^0 and the right limit of the second derivative are used.
Field eval_U_hat(const Trajectory& traj, double t, int deriv = 0);

/// Data of the elliptic-reconstruction correction G. Index n runs over 0..N;
/// d2g[0] is empty.
struct GData {
    std::vector<FeFunction> AU;   ///< discrete elliptic operator of U^n
    std::vector<FeFunction> Pf;   ///< L2 projection of the step data f^n
    std::optional<FeFunction> AV0;  ///< discrete elliptic operator of V^0
    std::vector<Field> g;         ///< A U^n - P f^n + f_bar^n
    std::vector<Field> dg;        ///< dg[0] = A V^0 - P f^0 + f^0
    std::vector<Field> d2g;
    std::vector<Field> gamma;
};

GData build_g_data(const Trajectory& traj);

/// G on (t^{j-1}, t^j] by the formula of interval j.
Field eval_G_on(const GData& data, const TimeGrid& grid, int j, double t);
Field eval_G(const GData& data, const TimeGrid& grid, double t);

}  // namespace waveapost
