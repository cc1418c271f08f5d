#include "waveapost/reconstruct.hpp"

namespace waveapost {

double mu(const TimeGrid& grid, int n, double t) {
    const double k = grid.k(n);
    const double mid = 0.5 * (grid.t(n - 1) + grid.t(n));
    return -6.0 / k * (t - mid);
}

Field second_difference(const Trajectory& traj, int n) {
    if (n < 1 || n > traj.steps()) throw std::out_of_range("second_difference: step out of range");
    return (traj[n].dU - traj[n - 1].dU) / traj.grid.k(n);
}

Field eval_U_hat_on(const Trajectory& traj, int n, double t, int deriv) {
    if (n < 1 || n > traj.steps()) throw std::out_of_range("eval_U_hat_on: step out of range");
    const double k = traj.grid.k(n);
    const double s = t - traj.grid.t(n - 1);
    const double r = traj.grid.t(n) - t;
    switch (deriv) {
    case 0:
        return (s / k) * Field(traj[n].U) + (r / k) * Field(traj[n - 1].U) - (s * r * r / k) * second_difference(traj, n);
    case 1:
        return traj[n].dU - ((r * r - 2.0 * s * r) / k) * second_difference(traj, n);
    case 2:
        return (1.0 + mu(traj.grid, n, t)) * second_difference(traj, n);
    default:
        throw std::invalid_argument("eval_U_hat: derivative order must be 0, 1 or 2");
    }
}

Field eval_U_hat(const Trajectory& traj, double t, int deriv) {
    const int n = traj.grid.interval_of(t);
    if (n > 0) return eval_U_hat_on(traj, n, t, deriv);
    if (deriv == 0) return Field(traj[0].U);
    if (deriv == 1) return traj[0].dU;
    return eval_U_hat_on(traj, 1, t, deriv);
}

GData build_g_data(const Trajectory& traj) {
    const int N = traj.steps();
    const auto& opts = traj.options;
    const int qd = opts.space_degree();
    GData d;
    d.AU.reserve(static_cast<std::size_t>(N) + 1);
    d.Pf.reserve(static_cast<std::size_t>(N) + 1);
    for (int n = 0; n <= N; ++n) {
        const StepRecord& rec = traj[n];
        d.AU.push_back(discrete_elliptic(rec.U, traj.problem.a, opts.solver));
        d.Pf.push_back(l2_project(*traj.load(n), rec.space, qd, opts.solver));
        d.g.push_back(Field(d.AU.back()) - Field(d.Pf.back()) + Field::analytic(traj.f_bar[static_cast<std::size_t>(n)]));
    }
    const FeFunction v0 = l2_project(traj[0].dU, traj[0].space, qd, opts.solver);
    d.AV0 = discrete_elliptic(v0, traj.problem.a, opts.solver);
    d.dg.push_back(Field(*d.AV0) - Field(d.Pf[0]) + Field::analytic(traj.f_knot[0]));
    d.d2g.emplace_back();
    d.gamma.emplace_back();
    for (int n = 1; n <= N; ++n) {
        const double k = traj.grid.k(n);
        const auto i = static_cast<std::size_t>(n);
        d.dg.push_back((d.g[i] - d.g[i - 1]) / k);
        d.d2g.push_back((d.dg[i] - d.dg[i - 1]) / k);
        d.gamma.push_back(d.gamma[i - 1] + (0.5 * k * k) * d.dg[i] + (k * k * k / 12.0) * d.d2g[i]);
    }
    return d;
}

Field eval_G_on(const GData& data, const TimeGrid& grid, int j, double t) {
    if (j < 1 || j > grid.steps()) throw std::out_of_range("eval_G_on: step out of range");
    const double k = grid.k(j);
    const double r = grid.t(j) - t;
    const auto i = static_cast<std::size_t>(j);
    const double r2 = r * r, r3 = r2 * r, r4 = r3 * r;
    return (0.5 * r2) * data.dg[i] - (r4 / (4.0 * k) - r3 / 3.0) * data.d2g[i] - data.gamma[i];
}

Field eval_G(const GData& data, const TimeGrid& grid, double t) {
    const int j = grid.interval_of(t);
    if (j == 0) return Field();
    return eval_G_on(data, grid, j, t);
}

}  // namespace waveapost
