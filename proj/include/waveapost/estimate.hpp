#pragma once

#include "waveapost/reconstruct.hpp"

#include <iosfwd>
#include <optional>

namespace waveapost {

struct EstimatorConfig {
    double c_el = 1.0;
    /// Poincare-Friedrichs constant; the sharp domain value when empty.
    std::optional<double> c_omega;
    /// Lower bound of a; taken from the coefficient when not positive.
    double alpha_min = 0.0;
    /// Gauss points per time interval.
    int time_quad_points = 5;
    /// Spatial quadrature degree (-1: 2p + 2).
    int space_quad_degree = -1;
};

/// Residual estimator value with its squared contributions per element of the
/// mesh that provides h. Jump terms are split evenly between the two sides.
struct EllipticResidual {
    double value = 0.0;
    Mesh mesh;
    std::vector<double> element_sq;
};

/// ( sum_K |h^2 (r + div(a grad Z))|_K^2 + sum_e |h^{3/2} [a grad Z . n]|_e^2 )^{1/2}
/// with h taken from `h_mesh`. Z may combine FE terms on several meshes of the
/// forest; it must not carry analytic terms. Everything is evaluated on the
/// common refinement of h_mesh and all meshes of Z and r.
EllipticResidual elliptic_residual(const Field& z, const Field& r, const Mesh& h_mesh, const Coefficient& a,
                                   int quad_degree = -1);
inline EllipticResidual elliptic_residual(const FeFunction& z, const Field& r, const Mesh& h_mesh,
                                          const Coefficient& a, int quad_degree = -1) {
    return elliptic_residual(Field(z), r, h_mesh, a, quad_degree);
}

struct Eta1 {
    double first = 0.0;   ///< time integral of |(I - P^j) U_hat_t|
    double second = 0.0;  ///< projection changes of dU^j plus |(I - P^0) V^0|
    double total() const { return first + second; }
};

Eta1 eta1(const Trajectory& traj, const EstimatorConfig& cfg = {});
double eta2(const Trajectory& traj, const GData& data, const EstimatorConfig& cfg = {});
double eta3(const Trajectory& traj, const EstimatorConfig& cfg = {});
double eta4(const Trajectory& traj, const EstimatorConfig& cfg = {});
/// Per-interval time integral sqrt(int k^3 |mu dU2|^2) by quadrature, without the 1/(2 pi) weights.
std::vector<double> eta4_interval_terms(const Trajectory& traj, const EstimatorConfig& cfg = {});

double delta1(const Trajectory& traj, const GData& data, const EstimatorConfig& cfg = {});
double delta2(const Trajectory& traj, const GData& data, const EstimatorConfig& cfg = {});

/// E(U^j, A^j U^j - P^j f^j + f^j, T^j).
EllipticResidual step_residual(const Trajectory& traj, const GData& data, int j, const EstimatorConfig& cfg = {});
/// E(V^0, dg^0, T^0).
EllipticResidual initial_velocity_residual(const Trajectory& traj, const GData& data, const EstimatorConfig& cfg = {});
/// Residual of the divided differences on the finest common coarsening of T^j and T^{j-1}, j >= 1.
EllipticResidual difference_residual(const Trajectory& traj, const GData& data, int j, const EstimatorConfig& cfg = {});

struct EstimatorBreakdown {
    double eta1_1 = 0.0;
    double eta1_2 = 0.0;
    double eta2 = 0.0;
    double eta3 = 0.0;
    double eta4 = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double E0 = 0.0;
    double E0_term = 0.0;
    double init_u0 = 0.0;
    double init_u0_term = 0.0;
    double init_u1 = 0.0;
    double init_u1_term = 0.0;
    double C_aN = 0.0;
    double C_el = 1.0;
    double C_omega = 0.0;
    double alpha_min = 0.0;
    double total = 0.0;
    /// E^j per step, j = 0..N, with element maps.
    std::vector<EllipticResidual> step_residuals;

    double eta1() const { return eta1_1 + eta1_2; }
    double eta_sum() const { return eta1() + eta2 + eta3 + eta4; }
    /// Re-adds the terms; equals `total`.
    double assemble() const;
};

double c_omega(const Trajectory& traj, const EstimatorConfig& cfg);
double alpha_min(const Trajectory& traj, const EstimatorConfig& cfg);

EstimatorBreakdown total_bound(const Trajectory& traj, const EstimatorConfig& cfg = {});
EstimatorBreakdown total_bound(const Trajectory& traj, const GData& data, const EstimatorConfig& cfg = {});

/// Header and one row with every named term.
void write_breakdown_csv(std::ostream& os, const EstimatorBreakdown& b, bool header = true);
/// `step element cx cy value_sq` per element of each step residual.
void write_element_map(std::ostream& os, const EstimatorBreakdown& b);

}  // namespace waveapost
