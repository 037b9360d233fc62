#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pmc/rb9d.hpp"

using namespace pmc;

namespace {

CVec random_xi(std::mt19937_64& rng, int m) {
    std::uniform_real_distribution<double> u(-1, 1);
    CVec x(m);
    for (int i = 0; i < m; ++i) x[i] = cplx(u(rng), u(rng));
    return x;
}

double rk4_error(double dt) {
    IntegrateOptions o;
    o.dt = dt;
    o.steps = std::lround(1.0 / dt);
    auto r = integrate_rk4([](const CVec& x) { return CVec(-x); }, CVec::Ones(1), o);
    return std::abs(r.traj.samples(0, r.traj.count() - 1) - std::exp(-1.0));
}

}  // namespace

TEST_SUITE("closure-engine") {
    TEST_CASE("reduced field is the projected full field at the lifted state") {
        std::mt19937_64 rng(61);
        EigenModel em = oracle::random_eigen_model(rng, 6, 3, true);
        for (Family f : {Family::LIA, Family::QSA, Family::KTAU}) {
            Parameterization p = family_build(f, em, {0.3, 0.8, 1.7});
            ClosureField cf(em, p);
            for (int s = 0; s < 100; ++s) {
                CVec x = random_xi(rng, 3);
                CVec ref = em.rhs(p.lift(x)).head(3);
                CHECK((cf.rhs(x) - ref).norm() < 1e-10 * (1 + ref.norm()));
                CHECK((cf.linear_diagonal().cwiseProduct(x) + cf.nonlinear(x) - cf.rhs(x)).norm() < 1e-14 * (1 + ref.norm()));
            }
        }
    }

    TEST_CASE("zero parameterization gives the Galerkin truncation") {
        std::mt19937_64 rng(63);
        EigenModel em = oracle::random_eigen_model(rng, 5, 2, true);
        Parameterization z = zero_build(em);
        ClosureField cf(em, z);
        CVec x = random_xi(rng, 2);
        CVec full = CVec::Zero(5);
        full.head(2) = x;
        CHECK((cf.rhs(x) - em.rhs(full).head(2)).norm() < 1e-13);
    }

    TEST_CASE("cutoff mismatch is rejected") {
        std::mt19937_64 rng(65);
        EigenModel em = oracle::random_eigen_model(rng, 5, 2, true);
        EigenModel other = oracle::random_eigen_model(rng, 5, 3, true);
        Parameterization z = zero_build(other);
        CHECK_THROWS_AS(ClosureField(em, z), Error);
    }

    TEST_CASE("RK4 accuracy and order") {
        CHECK(rk4_error(0.01) < 1e-6);
        std::vector<double> e;
        for (double dt : {0.1, 0.05, 0.025, 0.0125}) e.push_back(rk4_error(dt));
        CHECK(oracle::observed_order(e) >= 3.9);
    }

    TEST_CASE("semi-implicit Euler is exact on linear problems") {
        CVec L(2);
        L << cplx(-3.0, 1.0), cplx(0.5, 0.0);
        CVec x0(2);
        x0 << 1.0, cplx(0.2, -0.4);
        IntegrateOptions o;
        o.dt = 0.05;
        o.steps = 40;
        auto r = integrate_semi_implicit(L, [](const CVec& x) { return CVec(CVec::Zero(x.size())); }, x0, o);
        for (int j = 0; j < 2; ++j) {
            cplx ref = std::pow(1.0 - o.dt * L[j], -40) * x0[j];
            CHECK(std::abs(r.traj.samples(j, 40) - ref) < 1e-13 * std::abs(ref));
        }
    }

    TEST_CASE("semi-implicit Euler order") {
        CVec L = CVec::Constant(1, -2.0);
        auto N = [](const CVec& x) { return CVec(x.cwiseProduct(x) * 0.5 + CVec::Constant(1, 1.0)); };
        auto full = [&](const CVec& x) { return CVec(L.cwiseProduct(x) + N(x)); };
        IntegrateOptions ro;
        ro.dt = 1e-4;
        ro.steps = 10000;
        cplx ref = integrate_rk4(full, CVec::Constant(1, 0.3), ro).traj.samples(0, 10000);
        std::vector<double> e;
        for (double dt : {0.02, 0.01, 0.005, 0.0025}) {
            IntegrateOptions o;
            o.dt = dt;
            o.steps = std::lround(1.0 / dt);
            auto r = integrate_semi_implicit(L, N, CVec::Constant(1, 0.3), o);
            e.push_back(std::abs(r.traj.samples(0, r.traj.count() - 1) - ref));
        }
        CHECK(oracle::observed_order(e) >= 0.9);
    }

    TEST_CASE("blow-up is detected and located") {
        IntegrateOptions o;
        o.dt = 1e-3;
        o.steps = 2000;
        auto r = integrate_rk4([](const CVec& x) { return CVec(x.cwiseProduct(x)); }, CVec::Ones(1), o);
        CHECK(r.blew_up);
        CHECK(r.fail_step > 900);
        CHECK(r.fail_step <= 1001);  // exact solution is singular at t = 1
        CHECK(r.traj.count() == r.fail_step);
    }

    TEST_CASE("save stride and observer") {
        IntegrateOptions o;
        o.dt = 0.1;
        o.steps = 10;
        o.save_stride = 5;
        o.t0 = 2.0;
        std::vector<double> ts;
        o.observer = [&](double t, const CVec&) { ts.push_back(t); };
        auto r = integrate_rk4([](const CVec& x) { return CVec(-x); }, CVec::Ones(1), o);
        CHECK(r.traj.count() == 3);
        CHECK(r.traj.dt == doctest::Approx(0.5));
        REQUIRE(ts.size() == 3);
        CHECK(ts[2] == doctest::Approx(3.0));
    }

    TEST_CASE("reconstruction of real states stays real") {
        QuadraticModel full = rb9d_build({});
        CVec mean = oracle::rb_convective_state();
        QuadraticModel fl = fluctuation_model(full, mean);
        SpectralBasis b = decompose(fl, 5);
        EigenModel em = to_eigen_model(fl, b);
        Parameterization k = qsa_limit_build(em);
        std::mt19937_64 rng(67);
        std::uniform_real_distribution<double> u(-1, 1);
        Trajectory red;
        red.dt = 1;
        red.samples.resize(5, 20);
        for (int s = 0; s < 20; ++s) {
            CVec x(9);
            for (int i = 0; i < 9; ++i) x[i] = u(rng);
            red.samples.col(s) = b.to_eigen(x).head(5);
        }
        Trajectory phys = reconstruct(k, red, &b, &mean);
        CHECK(phys.samples.imag().cwiseAbs().maxCoeff() < 1e-9);
    }

    TEST_CASE("steady state is a rest point of the reduced field") {
        QuadraticModel full = rb9d_build({});
        CVec mean = oracle::rb_convective_state();
        QuadraticModel fl = fluctuation_model(full, mean);
        EigenModel em = to_eigen_model(fl, decompose(fl, 5));
        Parameterization p = lia_build(em, {0.2, 0.4, 0.6, 0.6});
        ClosureField cf(em, p);
        CHECK(cf.rhs(CVec::Zero(5)).norm() < 1e-10);
    }
}
