#pragma once

#include "waveapost/stepper.hpp"

#include <iosfwd>

namespace waveapost {

/// Per step: `step n t k mesh m dofs d`, then one line of coefficients of U^n.
/// Distinct meshes are numbered in order of first use; with `with_meshes` each
/// new mesh is written (write_mesh format) before the first step using it.
void write_trajectory(std::ostream& os, const Trajectory& traj, bool with_meshes = false);

}  // namespace waveapost
