#include "oracles.hpp"

#include "waveapost/field.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <numbers>
#include <random>

using namespace waveapost;

namespace {

constexpr double pi = std::numbers::pi;

/// Permutation from library dofs to grid node index (1..n-1) for 1D P1.
std::vector<int> node_index(const FeSpace& s, int n, double L) {
    std::vector<int> out(static_cast<std::size_t>(s.dimension()));
    for (int i = 0; i < s.dimension(); ++i) out[static_cast<std::size_t>(i)] = static_cast<int>(std::lround(s.node(i).x() * n / L));
    return out;
}

/// Library matrix reordered to grid node order.
Eigen::MatrixXd reorder(const SparseMatrix& a, const std::vector<int>& idx) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(a.rows(), a.cols());
    const Eigen::MatrixXd dense(a);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out(idx[static_cast<std::size_t>(i)] - 1, idx[static_cast<std::size_t>(j)] - 1) = dense(i, j);
    return out;
}

double sym_gap(const SparseMatrix& a) {
    const Eigen::MatrixXd d(a);
    return (d - d.transpose()).norm() / d.norm();
}

}  // namespace

TEST_CASE("1D P1 mass and stiffness") {
    const int n = 4;
    const FeSpace s(uniform_mesh(Domain::interval(1.0), n));
    const auto idx = node_index(s, n, 1.0);
    CHECK((reorder(assemble_mass(s), idx) - oracle::p1_mass_1d(n, 1.0)).norm() < 1e-14);
    CHECK((reorder(assemble_stiffness(s, Coefficient::constant(1.0)), idx) - oracle::p1_stiffness_1d(n, 1.0)).norm() < 1e-12);
    const Eigen::MatrixXd k1(assemble_stiffness(s, Coefficient::constant(1.0)));
    const Eigen::MatrixXd k3(assemble_stiffness(s, Coefficient::constant(3.5)));
    CHECK((k3 - 3.5 * k1).norm() < 1e-12);
}

TEST_CASE("matrices are symmetric and positive") {
    std::mt19937 rng(3);
    std::normal_distribution<double> g;
    for (int degree : {1, 2}) {
        const FeSpace s(refine(uniform_mesh(Domain::rectangle(1.0, 2.0), 3), std::vector<ElemId>{0, 5}), degree);
        const SparseMatrix m = assemble_mass(s);
        Coefficient a;
        a.value = [](const Point& x) { return 1.0 + x.x() * x.y(); };
        a.alpha_min = 1.0;
        a.alpha_max = 3.0;
        const SparseMatrix k = assemble_stiffness(s, a);
        CHECK(sym_gap(m) < 1e-14);
        CHECK(sym_gap(k) < 1e-14);
        for (int t = 0; t < 5; ++t) {
            Vector x(s.dimension());
            for (int i = 0; i < x.size(); ++i) x(i) = g(rng);
            CHECK(x.dot(m * x) > 0);
            CHECK(x.dot(k * x) > 0);
        }
    }
}

TEST_CASE("2D P1 mass against the closed-form element matrix") {
    const FeSpace s(uniform_mesh(Domain::rectangle(1.0, 1.0), 3));
    const Mesh& m = s.mesh();
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(s.dimension(), s.dimension());
    for (int e = 0; e < m.num_elements(); ++e) {
        const auto dofs = s.element_dofs(e);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (dofs[static_cast<std::size_t>(i)] >= 0 && dofs[static_cast<std::size_t>(j)] >= 0)
                    expected(dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(j)]) += m.measure(e) / 12.0 * (i == j ? 2.0 : 1.0);
    }
    CHECK((Eigen::MatrixXd(assemble_mass(s)) - expected).norm() < 1e-14);
}

TEST_CASE("variable coefficient stiffness against a Gauss oracle") {
    const int n = 5;
    const FeSpace s(uniform_mesh(Domain::interval(1.0), n));
    Coefficient a;
    a.value = [](const Point& x) { return 1.0 + x.x(); };
    a.alpha_min = 1.0;
    a.alpha_max = 2.0;
    const auto idx = node_index(s, n, 1.0);
    const Eigen::MatrixXd k = reorder(assemble_stiffness(s, a), idx);
    const double h = 1.0 / n;
    const auto slope = [&](int i, double x) {
        if (x > (i - 1) * h && x < i * h) return 1.0 / h;
        if (x > i * h && x < (i + 1) * h) return -1.0 / h;
        return 0.0;
    };
    for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j) {
            const double ref = oracle::integrate_cells([&](double x) { return (1.0 + x) * slope(i, x) * slope(j, x); }, 0.0, 1.0, n);
            CHECK(std::abs(k(i - 1, j - 1) - ref) < 1e-12);
        }
}

TEST_CASE("non-positive coefficient is rejected") {
    const FeSpace s(uniform_mesh(Domain::interval(1.0), 4));
    Coefficient a;
    a.value = [](const Point& x) { return x.x() - 0.5; };
    CHECK_THROWS_AS(assemble_stiffness(s, a), std::domain_error);
}

TEST_CASE("L2 projection") {
    const int n = 4;
    const FeSpace s(uniform_mesh(Domain::interval(1.0), n));

    SUBCASE("zero") { CHECK(l2_project([](const Point&) { return 0.0; }, s).coefficients().norm() == 0.0); }

    SUBCASE("sin(pi x) against a dense solve") {
        const auto idx = node_index(s, n, 1.0);
        Eigen::VectorXd b(n - 1);
        for (int i = 1; i < n; ++i)
            b(i - 1) = oracle::integrate_cells([&](double x) { return std::sin(pi * x) * oracle::hat(i, n, 1.0, x); }, 0.0, 1.0, n);
        const Eigen::VectorXd ref = oracle::p1_mass_1d(n, 1.0).ldlt().solve(b);
        const FeFunction p = l2_project([](const Point& x) { return std::sin(pi * x.x()); }, s, 19);
        for (int i = 0; i < s.dimension(); ++i)
            CHECK(std::abs(p.coefficients()(i) - ref(idx[static_cast<std::size_t>(i)] - 1)) < 1e-12);
    }

    SUBCASE("idempotent and orthogonal") {
        const FeSpace s2(refine(uniform_mesh(Domain::rectangle(1.0, 1.0), 3), std::vector<ElemId>{2}), 2);
        std::mt19937 rng(9);
        std::uniform_real_distribution<double> u(-1, 1);
        Vector c(s2.dimension());
        for (int i = 0; i < c.size(); ++i) c(i) = u(rng);
        const FeFunction v(s2, c);
        const FeFunction p = l2_project([&](const Point& x) {
            for (int e = 0; e < s2.mesh().num_elements(); ++e)
                if (oracle::point_inside(oracle::corners(*s2.mesh().forest(), s2.mesh().element_id(e)), x)) return v.value_at(e, x);
            return 0.0;
        }, s2, 6);
        CHECK((p.coefficients() - c).norm() < 1e-12);

        const auto f = [](const Point& x) { return std::exp(x.x()) * std::cos(3 * x.y()); };
        const FeFunction pf = l2_project(f, s2, 10);
        const Vector lhs = assemble_mass(s2) * pf.coefficients();
        const Vector rhs = load_vector(s2, f, 10);
        CHECK((lhs - rhs).norm() < 1e-12 * rhs.norm());
    }
}

TEST_CASE("discrete elliptic operator") {
    const int n = 8;
    const FeSpace s(uniform_mesh(Domain::interval(1.0), n));
    const Coefficient one = Coefficient::constant(1.0);
    CHECK(discrete_elliptic(FeFunction(s), one).coefficients().norm() == 0.0);

    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    Vector c(s.dimension());
    for (int i = 0; i < c.size(); ++i) c(i) = u(rng);
    const FeFunction q = discrete_elliptic(FeFunction(s, c), one);
    const Vector gap = assemble_mass(s) * q.coefficients() - assemble_stiffness(s, one) * c;
    CHECK(gap.norm() < 1e-10 * c.norm());

    // The first discrete sine mode is an eigenvector of M^{-1} K.
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::p1_stiffness_1d(n, 1.0), oracle::p1_mass_1d(n, 1.0));
    const double lambda = es.eigenvalues()(0);
    const auto idx = node_index(s, n, 1.0);
    Vector mode(s.dimension());
    for (int i = 0; i < s.dimension(); ++i) mode(i) = std::sin(pi * idx[static_cast<std::size_t>(i)] / n);
    const FeFunction am = discrete_elliptic(FeFunction(s, mode), one);
    CHECK((am.coefficients() - lambda * mode).norm() < 1e-10 * lambda * mode.norm());
}

TEST_CASE("cross mass") {
    const Mesh coarse = uniform_mesh(Domain::interval(1.0), 4);
    const Mesh fine = refine(coarse, std::vector<ElemId>{coarse.element_id(1)});
    const FeSpace sc(coarse), sf(fine);

    CHECK((Eigen::MatrixXd(cross_mass(sc, sc)) - Eigen::MatrixXd(assemble_mass(sc))).norm() < 1e-15);

    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(-1, 1);
    Vector v(sc.dimension()), w(sf.dimension());
    for (int i = 0; i < v.size(); ++i) v(i) = u(rng);
    for (int i = 0; i < w.size(); ++i) w(i) = u(rng);
    const FeFunction fv(sc, v), fw(sf, w);
    const auto eval = [](const FeFunction& f, double x) {
        const Mesh& m = f.space().mesh();
        for (int e = 0; e < m.num_elements(); ++e) {
            const auto c = oracle::corners(*m.forest(), m.element_id(e));
            if (oracle::point_inside(c, Point(x, 0))) return f.value_at(e, Point(x, 0));
        }
        return 0.0;
    };
    const double direct = w.dot(cross_mass(sc, sf) * v);
    const double quad = oracle::integrate_cells([&](double x) { return eval(fv, x) * eval(fw, x); }, 0.0, 1.0, 16);
    CHECK(std::abs(direct - quad) < 1e-12);

    // Projecting v onto the fine space and integrating agrees with the direct value.
    const FeFunction pv = l2_project(Field(fv), sf);
    CHECK(std::abs(w.dot(assemble_mass(sf) * pv.coefficients()) - direct) < 1e-12);

    CHECK_THROWS_AS(cross_mass(sc, FeSpace(uniform_mesh(Domain::interval(1.0), 4))), IncompatibleMeshes);
}

TEST_CASE("cross mass of a single bubble") {
    const FeSpace p2(uniform_mesh(Domain::interval(1.0), 1), 2);
    const SparseMatrix self = cross_mass(p2, p2);
    REQUIRE(self.rows() == 1);
    CHECK(self.coeff(0, 0) == doctest::Approx(8.0 / 15.0));

    // The bubble against hats of the once-refined P1 space: each hat on a half
    // interval integrates to 5/24 against 4x(1-x).
    const FeSpace p1(refine_all(p2.mesh()), 1);
    const SparseMatrix b = cross_mass(p2, p1);
    REQUIRE(b.rows() == 1);
    CHECK(b.coeff(0, 0) == doctest::Approx(5.0 / 12.0));
}

TEST_CASE("solve_spd") {
    SparseMatrix d(3, 3);
    d.insert(0, 0) = 2.0;
    d.insert(1, 1) = 4.0;
    d.insert(2, 2) = 8.0;
    d.makeCompressed();
    const Vector b = Vector::Constant(3, 8.0);
    for (auto method : {SolverOptions::Method::Cholesky, SolverOptions::Method::ConjugateGradient}) {
        SolverOptions opts;
        opts.method = method;
        CHECK((solve_spd(d, b, opts) - Vector(Eigen::Vector3d(4.0, 2.0, 1.0))).norm() < 1e-14);
        CHECK(solve_spd(d, Vector::Zero(3), opts).norm() == 0.0);
    }

    std::mt19937 rng(1);
    std::normal_distribution<double> g;
    Eigen::MatrixXd r(5, 5);
    for (int i = 0; i < 25; ++i) r.data()[i] = g(rng);
    const Eigen::MatrixXd spd = r * r.transpose() + 5 * Eigen::MatrixXd::Identity(5, 5);
    Vector rhs(5);
    for (int i = 0; i < 5; ++i) rhs(i) = g(rng);
    const Vector ref = spd.llt().solve(rhs);
    const SparseMatrix s = spd.sparseView();
    SolverOptions cg;
    cg.method = SolverOptions::Method::ConjugateGradient;
    CHECK((solve_spd(s, rhs) - ref).norm() < 1e-12 * ref.norm());
    CHECK((solve_spd(s, rhs, cg) - ref).norm() < 1e-10 * ref.norm());

    cg.max_iterations = 1;
    cg.tolerance = 1e-15;
    CHECK_THROWS_AS(solve_spd(s, rhs, cg), SolverError);
}
