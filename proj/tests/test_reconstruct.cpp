#include "oracles.hpp"

#include "waveapost/reconstruct.hpp"

#include <doctest.h>

#include <numbers>

using namespace waveapost;

namespace {

constexpr double pi = std::numbers::pi;

ProblemSpec forced_problem() {
    ProblemSpec p;
    p.domain = Domain::interval(1.0);
    p.u0 = [](const Point& x) { return std::sin(pi * x.x()); };
    p.u1 = [](const Point& x) { return x.x() * (1 - x.x()); };
    p.f = [](const Point& x, double t) { return x.x() * std::cos(3 * t); };
    return p;
}

Trajectory changing_run() {
    MeshSchedule sched;
    sched.add(2, {MeshAction::Kind::Refine, Point(0, 0), Point(0.5, 0)});
    sched.add(4, {MeshAction::Kind::Coarsen, Point(0, 0), Point(0.5, 0)});
    const std::vector<double> knots{0.0, 0.1, 0.25, 0.3, 0.45, 0.6, 0.8};
    return run(forced_problem(), TimeGrid(knots), uniform_mesh(Domain::interval(1.0), 6), sched);
}

double gap(const Field& a, const Field& b) { return l2_norm(a - b); }

}  // namespace

TEST_CASE("mu") {
    const TimeGrid g({0.0, 0.5, 0.7});
    CHECK(mu(g, 2, 0.6) == doctest::Approx(0.0));
    CHECK(mu(g, 2, 0.7) == doctest::Approx(-3.0));
    CHECK(mu(g, 2, 0.5) == doctest::Approx(3.0));
    CHECK(mu(g, 1, 0.0) == doctest::Approx(3.0));
    const auto [x, w] = oracle::gauss(3, 0.5, 0.7);
    double integral = 0.0;
    for (int q = 0; q < 3; ++q) integral += w(q) * mu(g, 2, x(q));
    CHECK(std::abs(integral) < 1e-14);
}

TEST_CASE("interpolation and smoothness of the time reconstruction") {
    const Trajectory t = changing_run();
    for (int n = 1; n <= t.steps(); ++n) {
        const double tn = t.grid.t(n), tp = t.grid.t(n - 1);
        CHECK(gap(eval_U_hat_on(t, n, tn, 0), Field(t[n].U)) < 1e-14);
        CHECK(gap(eval_U_hat_on(t, n, tp, 0), Field(t[n - 1].U)) < 1e-14);
        CHECK(gap(eval_U_hat_on(t, n, tn, 1), t[n].dU) < 1e-13);
        CHECK(gap(eval_U_hat_on(t, n, tp, 1), t[n - 1].dU) < 1e-13);

        // Derivatives against central differences inside the interval.
        const double tm = tp + 0.37 * (tn - tp), h = 1e-5;
        const Field fd1 = (eval_U_hat_on(t, n, tm + h, 0) - eval_U_hat_on(t, n, tm - h, 0)) / (2 * h);
        const Field fd2 = (eval_U_hat_on(t, n, tm + h, 1) - eval_U_hat_on(t, n, tm - h, 1)) / (2 * h);
        CHECK(gap(fd1, eval_U_hat_on(t, n, tm, 1)) < 1e-7);
        CHECK(gap(fd2, eval_U_hat_on(t, n, tm, 2)) < 1e-7);
    }
    CHECK(gap(eval_U_hat(t, 0.0, 0), Field(t[0].U)) == 0.0);
    CHECK(gap(eval_U_hat(t, 0.0, 1), t[0].dU) == 0.0);
    CHECK_THROWS(eval_U_hat_on(t, 1, 0.05, 3));
}

TEST_CASE("constant trajectory") {
    // With f = A U^0 and zero velocity the scheme keeps U^n = U^0.
    const Mesh m = uniform_mesh(Domain::interval(1.0), 8);
    ProblemSpec p;
    p.domain = m.domain();
    p.u0 = [](const Point& x) { return x.x() * (1 - x.x()); };
    p.u1 = [](const Point&) { return 0.0; };
    const FeFunction u0 = l2_project(p.u0, FeSpace(m));
    const FeFunction au0 = discrete_elliptic(u0, p.a);
    p.f = [au0, m](const Point& x, double) {
        for (int e = 0; e < m.num_elements(); ++e)
            if (oracle::point_inside(oracle::corners(*m.forest(), m.element_id(e)), x)) return au0.value_at(e, x);
        return 0.0;
    };
    const Trajectory t = run(p, TimeGrid::uniform(1.0, 4), m);
    for (double s : {0.1, 0.3, 0.55, 0.9}) {
        CHECK(gap(eval_U_hat(t, s, 0), Field(u0)) < 1e-12);
        CHECK(l2_norm(eval_U_hat(t, s, 1)) < 1e-12);
        CHECK(l2_norm(eval_U_hat(t, s, 2)) < 1e-12);
    }
}

TEST_CASE("G data of the zero trajectory") {
    ProblemSpec p;
    p.domain = Domain::interval(1.0);
    p.u0 = p.u1 = [](const Point&) { return 0.0; };
    p.f = [](const Point&, double) { return 0.0; };
    const Trajectory t = run(p, TimeGrid::uniform(1.0, 3), uniform_mesh(p.domain, 4));
    const GData d = build_g_data(t);
    for (int n = 0; n <= 3; ++n) {
        CHECK(l2_norm(d.g[static_cast<std::size_t>(n)], t[n].mesh(), 4) == 0.0);
        CHECK(l2_norm(d.gamma[static_cast<std::size_t>(n)], t[n].mesh(), 4) == 0.0);
    }
    CHECK(d.d2g[0].empty());
    CHECK(l2_norm(eval_G(d, t.grid, 0.4), t[0].mesh(), 4) == 0.0);
}

TEST_CASE("g differences on a fixed mesh with time-constant data") {
    ProblemSpec p = forced_problem();
    p.f = [](const Point& x, double) { return std::exp(x.x()); };
    const Trajectory t = run(p, TimeGrid::uniform(1.0, 4), uniform_mesh(p.domain, 8));
    const GData d = build_g_data(t);
    for (int n = 1; n <= 4; ++n) {
        const auto i = static_cast<std::size_t>(n);
        const Field fe_only = Field(d.AU[i]) - Field(d.AU[i - 1]);
        CHECK(gap(d.g[i] - d.g[i - 1], fe_only) < 1e-12);
        CHECK(gap(t.grid.k(n) * d.dg[i], fe_only) < 1e-12);
    }
}

TEST_CASE("G is continuous and starts at zero") {
    const Trajectory t = changing_run();
    const GData d = build_g_data(t);
    double scale = 0.0;
    for (int j = 1; j <= t.steps(); ++j) scale = std::max(scale, l2_norm(eval_G_on(d, t.grid, j, t.grid.t(j)), 8));
    REQUIRE(scale > 0);
    CHECK(l2_norm(eval_G_on(d, t.grid, 1, 0.0), 8) <= 1e-12 * scale);
    CHECK(eval_G(d, t.grid, 0.0).empty());
    for (int j = 1; j < t.steps(); ++j) {
        const double tj = t.grid.t(j);
        CHECK(l2_norm(eval_G_on(d, t.grid, j, tj) - eval_G_on(d, t.grid, j + 1, tj), 8) <= 1e-12 * scale);
    }

    // gamma telescopes into the closed-form increments.
    Field sum;
    for (int j = 1; j <= t.steps(); ++j) {
        const double k = t.grid.k(j);
        sum += 0.5 * k * k * d.dg[static_cast<std::size_t>(j)] + k * k * k / 12.0 * d.d2g[static_cast<std::size_t>(j)];
    }
    CHECK(l2_norm(sum - d.gamma.back(), 8) < 1e-12 * l2_norm(sum, 8));

    // G'' on interval j is dg^j - (3 r^2 / k - 2 r) d2g^j with r = t^j - t,
    // which takes the values dg^j and dg^(j-1) at the ends.
    const int j = 3;
    const double k = t.grid.k(j);
    const double tm = t.grid.t(j - 1) + 0.4 * k, h = 1e-4, r = t.grid.t(j) - tm;
    const Field fd = (eval_G_on(d, t.grid, j, tm + h) - 2.0 * eval_G_on(d, t.grid, j, tm) + eval_G_on(d, t.grid, j, tm - h)) / (h * h);
    const Field expect = d.dg[j] - (3 * r * r / k - 2 * r) * d.d2g[j];
    CHECK(l2_norm(fd - expect, 8) < 1e-5 * l2_norm(expect, 8));
}

TEST_CASE("Galerkin property of g") {
    const Trajectory t = changing_run();
    const GData d = build_g_data(t);
    for (int n = 0; n <= t.steps(); ++n) {
        const auto i = static_cast<std::size_t>(n);
        const FeSpace& s = t[n].space;
        const Vector lhs = load_vector(d.g[i], s, 8);
        const Vector ku = assemble_stiffness(s, t.problem.a) * t[n].U.coefficients();
        const Vector osc = load_vector(s, *t.f_bar[i], 8) - load_vector(s, *t.load(n), 8);
        CHECK((lhs - ku - osc).norm() < 1e-10 * std::max(1.0, ku.norm()));
    }
}
