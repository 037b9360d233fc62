#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pmc/rb9d.hpp"

using namespace pmc;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Regime A over t in [0, T] from the default datum, returning the final Fourier state.
CVec ks_final(double dt, double T) {
    KsConfig c = KsConfig::regime_a();
    c.dt = dt;
    KsDns d(c);
    d.set_grid(ks_default_initial(c));
    const long n = std::lround(T / dt);
    for (long s = 0; s < n; ++s) d.step();
    return d.fourier();
}

}  // namespace

TEST_SUITE("builtin-models") {
    TEST_CASE("9D convection coefficients") {
        auto c = rb9d_coefficients(0.5);
        CHECK(c.b1 == doctest::Approx(10.0 / 3));
        CHECK(c.b2 == doctest::Approx(0.6));
        CHECK(c.b3 == doctest::Approx(1.2));
        CHECK(c.b4 == doctest::Approx(0.2));
        CHECK(c.b5 == doctest::Approx(4.0 / 3));
        CHECK(c.b6 == doctest::Approx(8.0 / 3));
        QuadraticModel m = rb9d_build({});
        CHECK(m.bilinear.size() == 24);
        CHECK(m.is_real());
        CHECK(m.linear(6, 0).real() == doctest::Approx(-14.22));
        CHECK(m.linear(0, 0).real() == doctest::Approx(-0.5 * c.b1));
    }

    TEST_CASE("9D linear part at a steady state has a lexicographic spectrum") {
        QuadraticModel m = rb9d_build({});
        CVec y = oracle::rb_convective_state();
        QuadraticModel fl = fluctuation_model(m, y);
        SpectralBasis b = decompose(fl, 5);
        Eigen::ComplexEigenSolver<CMat> es(fl.linear);
        for (int j = 0; j < 9; ++j) {
            double best = 1e300;
            for (int i = 0; i < 9; ++i) best = std::min(best, std::abs(es.eigenvalues()[i] - b.eigenvalues[j]));
            CHECK(best < 1e-9);
        }
        for (int j = 1; j < 9; ++j) CHECK(b.eigenvalues[j].real() <= b.eigenvalues[j - 1].real() + 1e-12);
    }

    TEST_CASE("heat-flux shapes are required") {
        try {
            load_heat_flux_matrix("/nonexistent/heat_flux.txt");
            FAIL("expected MissingFieldShapes");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::MissingFieldShapes);
        }
    }

    TEST_CASE("unstable pair counts") {
        CHECK(ks_unstable_pairs(KsConfig::regime_a()) == 31);
        CHECK(ks_unstable_pairs(KsConfig::regime_b()) == 90);
    }

    TEST_CASE("rescaling to the alpha form and back") {
        KsConfig a = KsConfig::regime_a();
        KsRescaling r = ks_rescale(a);
        KsConfig back = ks_from_alpha(r.alpha, a.nu, a.D, a.gamma);
        CHECK(back.L == doctest::Approx(a.L));
        KsConfig alpha_form;
        alpha_form.form = KsForm::Alpha;
        alpha_form.alpha = r.alpha;
        // eigenvalues agree after the time rescaling
        for (int k : {1, 5, 20, 40})
            CHECK(ks_eigenvalue(alpha_form, k) / r.time_scale == doctest::Approx(ks_eigenvalue(a, k)).epsilon(1e-10));
    }

    TEST_CASE("analytic coefficients match FFT quadrature") {
        const double L = 3.7, g = 1.3;
        for (int i = 1; i <= 12; ++i)
            for (int j = 1; j <= 12; ++j)
                for (int li = 0; li < 2; ++li)
                    for (int lj = 0; lj < 2; ++lj) {
                        auto ref = oracle::ks_projection(li, i, lj, j, L, g, 30);
                        for (int n = 1; n <= 30; ++n)
                            for (int ln = 0; ln < 2; ++ln)
                                CHECK(std::abs(ks_coefficient(li, i, lj, j, ln, n, L, g) - ref[2 * (n - 1) + ln]) <
                                      1e-10);
                    }
    }

    TEST_CASE("assembled B matches -gamma u u_x on a grid") {
        KsConfig c = KsConfig::regime_a();
        EigenModel em = ks_build(c, 4, 16);
        std::mt19937_64 rng(71);
        std::uniform_real_distribution<double> u(-1, 1);
        CVec y = CVec::Zero(32);
        for (int k = 1; k <= 8; ++k)
            for (int l = 0; l < 2; ++l) y[ks_index(k, l)] = u(rng);
        const int N = 512;
        const double L = c.L, s = std::sqrt(2.0 / L);
        RVec f(N);
        for (int p = 0; p < N; ++p) {
            double x = L * p / N, v = 0, vx = 0;
            for (int k = 1; k <= 8; ++k) {
                double q = 2 * kPi * k / L;
                double a = y[ks_index(k, 0)].real(), b = y[ks_index(k, 1)].real();
                v += s * (a * std::cos(q * x) + b * std::sin(q * x));
                vx += s * q * (-a * std::sin(q * x) + b * std::cos(q * x));
            }
            f[p] = -c.gamma * v * vx;
        }
        CVec B = em.B(y, y);
        for (int n = 1; n <= 16; ++n) {
            double q = 2 * kPi * n / L, pc = 0, ps = 0;
            for (int p = 0; p < N; ++p) {
                double x = L * p / N;
                pc += f[p] * s * std::cos(q * x) * L / N;
                ps += f[p] * s * std::sin(q * x) * L / N;
            }
            CHECK(std::abs(B[ks_index(n, 0)] - pc) < 1e-10);
            CHECK(std::abs(B[ks_index(n, 1)] - ps) < 1e-10);
        }
    }

    TEST_CASE("Fourier and basis amplitudes round trip") {
        std::mt19937_64 rng(73);
        std::uniform_real_distribution<double> u(-1, 1);
        CVec y(20);
        for (int i = 0; i < 20; ++i) y[i] = u(rng);
        const double L = 2.5;
        CVec back = ks_fourier_to_modes(ks_modes_to_fourier(y, 64, L), 10, L);
        CHECK((back - y).norm() < 1e-14);
    }

    TEST_CASE("grid, Fourier and basis norms agree") {
        KsConfig c = KsConfig::regime_a();
        KsDns d(c);
        d.set_grid(ks_default_initial(c));
        RVec u = d.grid();
        double l2 = std::sqrt(u.squaredNorm() * c.L / c.nx);
        CHECK(d.l2_norm() == doctest::Approx(l2).epsilon(1e-12));
        CHECK(d.modes(c.nx / 3).norm() == doctest::Approx(l2).epsilon(1e-12));
    }

    TEST_CASE("ETDRK4 is exact on the linear problem") {
        KsConfig c = KsConfig::regime_a();
        c.gamma = 0.0;
        c.dt = 1e-2;
        KsDns d(c);
        d.set_grid(ks_default_initial(c));
        CVec v0 = d.fourier();
        for (int s = 0; s < 10; ++s) d.step();
        for (int k = 1; k < 4; ++k) {
            cplx ref = std::exp(ks_eigenvalue(c, k) * 0.1) * v0[k];
            CHECK(std::abs(d.fourier()[k] - ref) < 1e-12 * (1 + std::abs(ref)));
        }
    }

    TEST_CASE("ETDRK4 keeps zero mean and converges at fourth order") {
        CVec ref = ks_final(1e-3 / 64, 0.1);
        CHECK(std::abs(ref[0]) == 0.0);
        std::vector<double> e;
        for (double dt : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) e.push_back((ks_final(dt, 0.1) - ref).norm());
        CHECK(oracle::observed_order(e) >= 3.8);
    }
}
