#include "oracles.hpp"

#include "waveapost/field.hpp"

#include <doctest.h>

#include <numbers>

using namespace waveapost;

namespace {

constexpr double pi = std::numbers::pi;

/// P1 function on a 1D mesh with the given nodal values at interior nodes.
FeFunction nodal(const FeSpace& s, const std::function<double(double)>& f) {
    Vector c(s.dimension());
    for (int i = 0; i < s.dimension(); ++i) c(i) = f(s.node(i).x());
    return FeFunction(s, c);
}

}  // namespace

TEST_CASE("norm examples") {
    const Mesh m = uniform_mesh(Domain::interval(1.0), 4);
    const Field one = Field::analytic(make_shared_fn([](const Point&) { return 1.0; }));
    CHECK(l2_norm(one, m, 2) == doctest::Approx(1.0).epsilon(1e-14));

    const FeSpace s(m);
    const FeFunction hat = nodal(s, [](double x) { return std::abs(x - 0.5) < 1e-12 ? 1.0 : 0.0; });
    CHECK(l2_norm(Field(hat)) == doctest::Approx(std::sqrt(2.0 * 0.25 / 3.0)).epsilon(1e-14));

    const Field sine = Field::analytic(make_shared_fn([](const Point& x) { return std::sin(pi * x.x()); }));
    CHECK(std::abs(l2_norm(sine, m, 10) - 1.0 / std::sqrt(2.0)) < 1e-10);
    CHECK(l2_norm(Field(), m, 4) == 0.0);
}

TEST_CASE("arithmetic merges terms") {
    const FeSpace s(uniform_mesh(Domain::interval(1.0), 4));
    const FeFunction u = nodal(s, [](double x) { return x * (1 - x); });
    const SharedFn f = make_shared_fn([](const Point& x) { return x.x(); });
    Field a = Field(u) + Field::analytic(f);
    a += 2.0 * Field(u) - Field::analytic(f, 0.5);
    CHECK(a.fe_terms().size() == 1);
    CHECK(a.analytic_terms().size() == 1);
    CHECK(a.analytic_terms()[0].weight == doctest::Approx(0.5));
    CHECK((a.fe_terms()[0].coefficients() - 3.0 * u.coefficients()).norm() < 1e-15);
    CHECK(l2_norm(Field(u) - Field(u)) == 0.0);
}

TEST_CASE("mixed-mesh norm matches a brute-force integral") {
    const Mesh coarse = uniform_mesh(Domain::interval(1.0), 4);
    const Mesh fine = refine(coarse, std::vector<ElemId>{coarse.element_id(2)});
    const FeSpace sc(coarse), sf(fine);
    const auto fa = [](double x) { return std::sin(3 * x); };
    const auto fb = [](double x) { return x * x; };
    const FeFunction a = nodal(sc, fa), b = nodal(sf, fb);
    const SharedFn g = make_shared_fn([](const Point& x) { return std::cos(x.x()); });
    const Field diff = Field(a) - Field(b) + Field::analytic(g);

    const auto interp = [](const Mesh& m, const std::function<double(double)>& f, double x) {
        for (int e = 0; e < m.num_elements(); ++e) {
            const auto c = oracle::corners(*m.forest(), m.element_id(e));
            const double x0 = std::min(c[0].x(), c[1].x()), x1 = std::max(c[0].x(), c[1].x());
            if (x >= x0 && x <= x1) {
                const double v0 = (x0 == 0.0 || x0 == 1.0) ? 0.0 : f(x0);
                const double v1 = (x1 == 0.0 || x1 == 1.0) ? 0.0 : f(x1);
                return v0 + (v1 - v0) * (x - x0) / (x1 - x0);
            }
        }
        return 0.0;
    };
    const double ref = std::sqrt(oracle::integrate_cells(
        [&](double x) {
            const double v = interp(coarse, fa, x) - interp(fine, fb, x) + std::cos(x);
            return v * v;
        },
        0.0, 1.0, 64));
    CHECK(std::abs(l2_norm(diff, 12) - ref) < 1e-11);

    const Mesh q = quadrature_mesh(std::array<Field, 1>{diff}, coarse);
    CHECK(q == fine);

    const FieldSampler sampler(q, 12);
    const std::array<Field, 2> fields{Field(a), Field(b)};
    const Eigen::MatrixXd gm = gram(fields, sampler);
    CHECK(gm(0, 1) == doctest::Approx(inner(Field(a), Field(b), sampler)));
    CHECK(gm(0, 0) == doctest::Approx(l2_norm(Field(a), sampler) * l2_norm(Field(a), sampler)));
}

TEST_CASE("field load vectors and projection") {
    const Mesh coarse = uniform_mesh(Domain::rectangle(1.0, 1.0), 2);
    const Mesh fine = refine_all(refine_all(coarse));
    const FeSpace sc(coarse), sf(fine);
    const SpatialFn f = [](const Point& x) { return x.x() * std::sin(x.y()); };
    const Field analytic = Field::analytic(make_shared_fn(f));
    CHECK((load_vector(analytic, sf, 8) - load_vector(sf, f, 8)).norm() < 1e-15);

    Vector c(sc.dimension());
    c.setLinSpaced(1.0, 2.0);
    const FeFunction u(sc, c);
    const FeFunction pu = l2_project(Field(u), sc);
    CHECK((pu.coefficients() - c).norm() == 0.0);

    // Prolongation to a finer space is exact: projecting back recovers u.
    const FeFunction up = l2_project(Field(u), sf);
    CHECK(l2_norm(Field(up) - Field(u)) < 1e-13);
    CHECK((l2_project(Field(up), sc).coefficients() - c).norm() < 1e-12);
}

TEST_CASE("pointwise evaluation") {
    const Mesh m = uniform_mesh(Domain::interval(1.0), 2);
    const FeSpace s(m);
    const FeFunction u = nodal(s, [](double) { return 1.0; });
    const Mesh fine = refine_all(m);
    const Field f = Field(u) + Field::analytic(make_shared_fn([](const Point& x) { return x.x(); }));
    CHECK(f.value(Point(0.25, 0), fine.element_id(0)) == doctest::Approx(0.5 + 0.25));
    CHECK(f.value(Point(0.5, 0), m.element_id(1)) == doctest::Approx(1.5));
}
