#pragma once

#include "waveapost/verify.hpp"

#include <iosfwd>
#include <string>

namespace waveapost::cli {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct CheckOptions {
    std::string filter;
    /// Seeded fault: use mu shifted by the interval midpoint the wrong way.
    bool inject_mu_sign_flip = false;
};

/// mu^n or, with the fault, -6/k (t + midpoint).
double checked_mu(const TimeGrid& grid, int n, double t, bool flipped);

/// Ten steps with strongly varying sizes on [0, 1].
TimeGrid nonuniform_grid();

CheckResult check_vanishing_moment(const TimeGrid& grid, bool flipped = false);
/// Knot continuity of G and G(0+) = 0 on the given trajectory.
CheckResult check_G_continuity(const Trajectory& traj);
CheckResult check_galerkin_orthogonality(const Trajectory& traj);
CheckResult check_scheme_residual(const Trajectory& traj);
CheckResult check_eta1_fixed_mesh(const Trajectory& traj);
/// Every full-interval eta4 term against sqrt(3) k^2 |dU2|.
CheckResult check_eta4_closed_form(const Trajectory& traj);
CheckResult check_energy_decay(const Trajectory& traj);

/// Trajectories used by the suite.
Trajectory manufactured_run(const std::string& case_name, int n, int steps, const MeshSchedule& schedule = {},
                            int degree = 1);
/// Uniform mesh refined once in [0, 1/2] then coarsened back at half time.
Trajectory refine_coarsen_run(int n, int steps);

/// Runs every check whose name contains the filter and prints one line per
/// check. Returns the results in order.
std::vector<CheckResult> run_checks(const CheckOptions& options, std::ostream& out);

}  // namespace waveapost::cli
