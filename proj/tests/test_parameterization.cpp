#include <cmath>
#include <limits>
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

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b))); }

// RB 9D fluctuation model about a steady state, forcing dropped.
EigenModel rb_about_fixed_point(int m) {
    QuadraticModel full = rb9d_build({});
    CVec y = oracle::rb_convective_state();
    QuadraticModel fl = fluctuation_model(full, y);
    fl.forcing.setZero();
    return to_eigen_model(fl, decompose(fl, m));
}

}  // namespace

TEST_SUITE("parameterizations") {
    TEST_CASE("exponential moments match quadrature") {
        for (int k = 0; k <= 4; ++k)
            for (cplx z : {cplx(0, 0), cplx(1e-7, 0), cplx(0.3, -0.2), cplx(-2.5, 1.0), cplx(8.0, 3.0), cplx(-12, 0),
                           cplx(40, -5)}) {
                cplx ref = oracle::integrate([&](double u) { return std::pow(u, k) * std::exp(-z * u); }, 0, 1);
                CHECK(rel(exp_moment(k, z), ref) < 1e-11);
            }
    }

    TEST_CASE("scalar coefficients match quadrature") {
        for (double tau : {0.05, 0.7, 3.0})
            for (cplx bn : {cplx(-1.3, 0.4), cplx(-0.01, 0), cplx(0.2, -1)}) {
                cplx d = oracle::integrate([&](double s) { return std::exp(-bn * s); }, -tau, 0);
                CHECK(rel(qsa_delta(bn, tau), d) < 1e-11);
                CHECK(rel(forcing_coeff(bn, tau), d) < 1e-11);
                const double h = 1e-6;
                CHECK(rel(qsa_delta_prime(bn, tau), (qsa_delta(bn, tau + h) - qsa_delta(bn, tau - h)) / (2 * h)) < 1e-7);
                CHECK(rel(ktau_coeff(bn, tau), tau / (1.0 - bn * tau)) < 1e-15);
                CHECK(rel(ktau_coeff_prime(bn, tau), (ktau_coeff(bn, tau + h) - ktau_coeff(bn, tau - h)) / (2 * h)) <
                      1e-7);
            }
    }

    TEST_CASE("U coefficient with both low eigenvalues zero") {
        // y_k(s) = y_l(s) = s F, so the constant term integrates s^2 exp(-beta_n s).
        for (double tau : {0.3, 2.0})
            for (cplx bn : {cplx(-1.5, 0.5), cplx(-0.2, 0)}) {
                cplx ref = oracle::integrate([&](double s) { return s * s * std::exp(-bn * s); }, -tau, 0);
                cplx got = lia_coeff_U(0.0, 0.0, bn, tau);
                CHECK(rel(got, ref) < 1e-10);
                // closed form with e^{z}, z = beta_n tau
                cplx ez = std::exp(bn * tau);
                cplx closed = ez * tau * tau / bn - 2.0 * tau * ez / (bn * bn) + 2.0 * (ez - 1.0) / (bn * bn * bn);
                CHECK(rel(closed, ref) < 1e-10);
                // the variant with a negative tau^2 term is not the integral
                cplx variant = -ez * tau * tau / bn - 2.0 * tau * ez / (bn * bn) + 2.0 * (ez - 1.0) / (bn * bn * bn);
                CHECK(rel(variant, ref) > 1e-3);
            }
    }

    TEST_CASE("LIA coefficients match the backward-forward integral by quadrature") {
        std::mt19937_64 rng(21);
        for (int trial = 0; trial < 6; ++trial) {
            EigenModel em = oracle::random_eigen_model(rng, 5, 2 + trial % 2, true);
            for (double tau : {0.1, 1.0, 4.0}) {
                Parameterization p = lia_build(em, std::vector<double>(em.unresolved(), tau));
                for (int n = em.cutoff; n < em.dim; ++n) {
                    oracle::Poly ref = oracle::lia_by_quadrature(em, n, tau);
                    for (int s = 0; s < 5; ++s) {
                        CVec xi = random_xi(rng, em.cutoff);
                        CHECK(rel(p.eval_mode(n, xi), ref.eval(xi)) < 1e-10);
                    }
                }
            }
        }
    }

    TEST_CASE("LIA matches the backward-forward oracle") {
        std::mt19937_64 rng(23);
        EigenModel em = oracle::random_eigen_model(rng, 6, 3, true);
        Parameterization p = lia_build(em, {0.5, 2.0, 6.0});
        for (int s = 0; s < 10; ++s) {
            CVec xi = random_xi(rng, 3);
            for (int n = 3; n < 6; ++n) CHECK(rel(p.eval_mode(n, xi), bf_oracle(em, n, p.taus[n - 3], xi, 2000)) < 1e-8);
        }
    }

    TEST_CASE("LIA at tau = 0 vanishes") {
        std::mt19937_64 rng(25);
        EigenModel em = oracle::random_eigen_model(rng, 4, 2, true);
        Parameterization p = lia_build(em, {0.0, 0.0});
        CHECK(p.eval(random_xi(rng, 2)).norm() == 0.0);
    }

    TEST_CASE("invariant-manifold h2 solves the homological equation") {
        std::mt19937_64 rng(27);
        for (int which = 0; which < 2; ++which) {
            EigenModel em = which == 0 ? rb_about_fixed_point(5) : oracle::random_eigen_model(rng, 6, 3, false);
            Parameterization h = im_build(em, 2);
            const int m = em.cutoff;
            for (int s = 0; s < 20; ++s) {
                CVec xi = random_xi(rng, m);
                // D h(xi) A_c xi by central differences (exact for quadratic h up to rounding)
                CVec v = em.beta.head(m).cwiseProduct(xi);
                const double eps = 1e-3;
                CVec dh = (h.eval(xi + eps * v) - h.eval(xi - eps * v)) / (2 * eps);
                CVec full = CVec::Zero(em.dim);
                full.head(m) = xi;
                CVec bxx = em.B(full, full).tail(em.unresolved());
                CVec res = dh - em.beta.tail(em.unresolved()).cwiseProduct(h.eval(xi)) - bxx;
                CHECK(res.norm() < 1e-9 * (1 + bxx.norm()));
            }
        }
    }

    TEST_CASE("resonant tuples are reported") {
        EigenModel em;
        em.dim = 2;
        em.cutoff = 1;
        em.beta = CVec(2);
        em.beta << -1.0, -2.0;
        em.forcing = CVec::Zero(2);
        em.terms.assign(2, {});
        em.terms[1].push_back({0, 0, 1.0});
        try {
            im_build(em, 2);
            FAIL("expected ResonanceViolation");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::ResonanceViolation);
        }
    }

    TEST_CASE("LIA large-tau limit is h2 under the spectral condition") {
        std::mt19937_64 rng(29);
        EigenModel em = oracle::random_eigen_model(rng, 5, 2, false);
        for (int n = 2; n < 5; ++n)
            for (const auto& t : em.terms[n])
                if (t.k < 2 && t.l < 2) REQUIRE((em.beta[t.k] + em.beta[t.l] - em.beta[n]).real() > 0);
        Parameterization h = im_build(em, 2);
        Parameterization l = lia_build(em, std::vector<double>(3, 200.0));
        for (int s = 0; s < 10; ++s) {
            CVec xi = random_xi(rng, 2);
            CHECK((l.eval(xi) - h.eval(xi)).norm() < 1e-9 * h.eval(xi).norm());
            for (int n = 2; n < 5; ++n)
                CHECK(rel(oracle::lia_limit_by_quadrature(em, n).eval(xi), h.eval_mode(n, xi)) < 1e-9);
        }
    }

    TEST_CASE("QSA large-tau limit is the balance parameterization") {
        std::mt19937_64 rng(31);
        EigenModel em = oracle::random_eigen_model(rng, 5, 2, true);
        Parameterization k = qsa_limit_build(em);
        Parameterization q = qsa_build(em, std::vector<double>(3, 100.0));
        Parameterization kt = ktau_build(em, std::vector<double>(3, 1e9));
        for (int s = 0; s < 10; ++s) {
            CVec xi = random_xi(rng, 2);
            CVec full = CVec::Zero(5);
            full.head(2) = xi;
            CVec bal = (em.B(full, full) + em.forcing).tail(3);
            CVec ref = -bal.cwiseQuotient(em.beta.tail(3));
            CHECK((k.eval(xi) - ref).norm() < 1e-12 * ref.norm());
            CHECK((q.eval(xi) - ref).norm() < 1e-12 * ref.norm());
            CHECK((kt.eval(xi) - ref).norm() < 1e-8 * ref.norm());
        }
    }

    TEST_CASE("QSA(tau) scales the balance by delta") {
        std::mt19937_64 rng(33);
        EigenModel em = oracle::random_eigen_model(rng, 4, 2, true);
        Parameterization q = qsa_build(em, {0.3, 1.1});
        CVec xi = random_xi(rng, 2);
        CVec full = CVec::Zero(4);
        full.head(2) = xi;
        CVec bal = (em.B(full, full) + em.forcing).tail(2);
        CHECK(rel(q.eval_mode(2, xi), qsa_delta(em.beta[2], 0.3) * bal[0]) < 1e-13);
        CHECK(rel(q.eval_mode(3, xi), qsa_delta(em.beta[3], 1.1) * bal[1]) < 1e-13);
    }

    TEST_CASE("negative tau is rejected") {
        std::mt19937_64 rng(35);
        EigenModel em = oracle::random_eigen_model(rng, 4, 2, true);
        CHECK_THROWS_AS(lia_build(em, {-1.0, 1.0}), Error);
    }

    TEST_CASE("family names round trip") {
        for (Family f : {Family::LIA, Family::QSA, Family::KTAU, Family::IM2, Family::IM3, Family::ZERO})
            CHECK(parse_family(family_name(f)) == f);
        CHECK_THROWS_AS(parse_family("nope"), Error);
    }

    TEST_CASE("lift places xi then the parameterized modes") {
        std::mt19937_64 rng(37);
        EigenModel em = oracle::random_eigen_model(rng, 4, 2, true);
        Parameterization p = lia_build(em, {0.4, 0.9});
        CVec xi = random_xi(rng, 2);
        CVec y = p.lift(xi);
        CHECK(y.head(2) == xi);
        CHECK(y.tail(2) == p.eval(xi));
    }
}
