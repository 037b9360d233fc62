#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pmc/rb9d.hpp"

using namespace pmc;

namespace {

QuadraticModel random_model(std::mt19937_64& rng, int N) {
    std::uniform_real_distribution<double> u(-1, 1);
    QuadraticModel m(N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) m.linear(i, j) = cplx(u(rng), u(rng));
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k) m.bilinear.push_back({i, j, k, u(rng)});
    for (int i = 0; i < N; ++i) m.forcing[i] = u(rng);
    return m;
}

CVec random_vec(std::mt19937_64& rng, int N, bool complex = true) {
    std::uniform_real_distribution<double> u(-1, 1);
    CVec v(N);
    for (int i = 0; i < N; ++i) v[i] = cplx(u(rng), complex ? u(rng) : 0.0);
    return v;
}

}  // namespace

TEST_SUITE("quad-model") {
    TEST_CASE("decompose orders eigenvalues and is biorthogonal") {
        QuadraticModel m(3);
        m.linear << -1, 2, 0, -2, -1, 0, 0, 0, 0.5;
        SpectralBasis b = decompose(m, 1);
        REQUIRE(b.dim() == 3);
        CHECK(b.eigenvalues[0].real() == doctest::Approx(0.5));
        CHECK(b.eigenvalues[1].real() == doctest::Approx(-1));
        CHECK(b.eigenvalues[1].imag() == doctest::Approx(2));
        CHECK(b.eigenvalues[2].imag() == doctest::Approx(-2));
        CHECK(b.biorthogonality_error() < 1e-12);
        for (int j = 0; j < 3; ++j) {
            CVec r = m.linear * b.right.col(j) - b.eigenvalues[j] * b.right.col(j);
            CHECK(r.norm() < 1e-12);
            CHECK(b.right.col(j).norm() == doctest::Approx(1.0));
        }
    }

    TEST_CASE("decompose round trip on random models") {
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 20; ++trial) {
            QuadraticModel m = random_model(rng, 6);
            SpectralBasis b = decompose(m, 1);
            CHECK(b.biorthogonality_error() < 1e-9);
            CVec x = random_vec(rng, 6);
            CHECK((b.to_physical(b.to_eigen(x)) - x).norm() < 1e-10 * x.norm());
            for (int n = 0; n < 6; ++n) CHECK(std::abs(project(b, x, n) - b.to_eigen(x)[n]) < 1e-12);
        }
    }

    TEST_CASE("lexicographic order") {
        CVec ev(4);
        ev << cplx(-1, -1), cplx(0.5, 0), cplx(-1, 1), cplx(-3, 0);
        auto o = lexicographic_order(ev);
        CHECK(o == std::vector<int>{1, 2, 0, 3});
    }

    TEST_CASE("cutoff splitting a conjugate pair is rejected") {
        QuadraticModel m(3);
        m.linear << -1, 2, 0, -2, -1, 0, 0, 0, 0.5;
        try {
            decompose(m, 2);
            FAIL("expected CutoffSplitsPair");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::CutoffSplitsPair);
        }
    }

    TEST_CASE("defective matrix is rejected") {
        QuadraticModel m(2);
        m.linear << 0, 1, 0, 0;
        try {
            decompose(m, 1);
            FAIL("expected NonDiagonalizable");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NonDiagonalizable);
        }
    }

    TEST_CASE("fluctuation model is the shifted field") {
        std::mt19937_64 rng(11);
        QuadraticModel m = random_model(rng, 5);
        CVec mean = random_vec(rng, 5, false);
        QuadraticModel fl = fluctuation_model(m, mean);
        for (int k = 0; k < 10; ++k) {
            CVec d = random_vec(rng, 5);
            CHECK((fl.rhs(d) - m.rhs(d + mean)).norm() < 1e-12);
        }
    }

    TEST_CASE("eigen-coordinate model reproduces the physical field") {
        std::mt19937_64 rng(13);
        for (int trial = 0; trial < 5; ++trial) {
            QuadraticModel m = random_model(rng, 6);
            SpectralBasis b = decompose(m, 1);
            EigenModel em = to_eigen_model(m, b);
            for (int k = 0; k < 10; ++k) {
                CVec y = random_vec(rng, 6);
                CVec ref = b.to_eigen(m.rhs(b.to_physical(y)));
                CHECK((em.rhs(y) - ref).norm() < 1e-10 * (1 + ref.norm()));
            }
        }
    }

    TEST_CASE("bilinear form is evaluated entrywise") {
        QuadraticModel m(2);
        m.bilinear.push_back({0, 1, 0, 2.0});
        m.bilinear.push_back({1, 1, 1, -1.0});
        CVec u(2), v(2);
        u << 1.0, 2.0;
        v << 3.0, 5.0;
        CVec b = m.B(u, v);
        CHECK(b[0].real() == doctest::Approx(2.0 * 1 * 5));
        CHECK(b[1].real() == doctest::Approx(-1.0 * 2 * 5));
    }

    TEST_CASE("Newton finds a steady state of the 9D model") {
        QuadraticModel m = rb9d_build({});
        CVec guess = CVec::Constant(9, 0.1);
        CVec y = find_fixed_point(m, guess);
        CHECK(m.rhs(y).norm() < 1e-10);
        CHECK((jacobian(m, y) * CVec::Constant(9, 1.0)).size() == 9);
    }

    TEST_CASE("jacobian matches central differences") {
        std::mt19937_64 rng(17);
        QuadraticModel m = random_model(rng, 4);
        CVec y = random_vec(rng, 4, false);
        CMat J = jacobian(m, y);
        for (int j = 0; j < 4; ++j) {
            CVec e = CVec::Zero(4);
            e[j] = 1e-6;
            CVec fd = (m.rhs(y + e) - m.rhs(y - e)) / 2e-6;
            CHECK((J.col(j) - fd).norm() < 1e-7);
        }
    }

    TEST_CASE("validate catches bad shapes") {
        QuadraticModel m(2);
        m.bilinear.push_back({0, 5, 1, 1.0});
        CHECK_THROWS_AS(m.validate(), Error);
    }
}
