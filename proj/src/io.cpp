#include "waveapost/io.hpp"

#include <iomanip>
#include <ostream>

namespace waveapost {

void write_trajectory(std::ostream& os, const Trajectory& traj, bool with_meshes) {
    std::vector<Mesh> seen;
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << "# wave-apost trajectory\n";
    os << "steps " << traj.steps() << " degree " << traj.options.degree << '\n';
    for (int n = 0; n <= traj.steps(); ++n) {
        const StepRecord& rec = traj[n];
        auto it = std::find(seen.begin(), seen.end(), rec.mesh());
        const auto mesh_index = static_cast<std::size_t>(it - seen.begin());
        if (it == seen.end()) {
            seen.push_back(rec.mesh());
            if (with_meshes) {
                os << "mesh " << mesh_index << '\n';
                write_mesh(os, rec.mesh());
            }
        }
        os << std::setprecision(17);
        os << "step " << n << " t " << rec.t << " k " << rec.k << " mesh " << mesh_index << " dofs "
           << rec.space.dimension() << '\n';
        const Vector& c = rec.U.coefficients();
        for (Eigen::Index i = 0; i < c.size(); ++i) os << (i ? " " : "") << c(i);
        os << '\n';
    }
    os.flags(flags);
    os.precision(prec);
}

}  // namespace waveapost
