#include "oracles.hpp"

#include <cmath>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_fft_real.h>
#include <gsl/gsl_integration.h>

namespace oracle {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Ctx {
    const std::function<cplx(double)>* f;
    bool imag;
};

double part(double s, void* p) {
    auto* c = static_cast<Ctx*>(p);
    cplx v = (*c->f)(s);
    return c->imag ? v.imag() : v.real();
}

struct Workspace {
    gsl_integration_workspace* w;
    Workspace() : w(gsl_integration_workspace_alloc(4000)) { gsl_set_error_handler_off(); }
    ~Workspace() { gsl_integration_workspace_free(w); }
};

double quad(const std::function<cplx(double)>& f, bool imag, double a, double b, bool infinite) {
    thread_local Workspace ws;
    Ctx c{&f, imag};
    gsl_function g{&part, &c};
    double r = 0, err = 0;
    if (infinite)
        gsl_integration_qagiu(&g, 0.0, 1e-15, 1e-13, 4000, ws.w, &r, &err);
    else
        gsl_integration_qag(&g, a, b, 1e-15, 1e-13, 4000, GSL_INTEG_GAUSS61, ws.w, &r, &err);
    return r;
}

cplx gamma_fn(cplx beta, double s) {
    if (std::abs(beta * s) < 1e-6) return s * (1.0 + beta * s / 2.0 + beta * beta * s * s / 6.0);
    return (std::exp(beta * s) - 1.0) / beta;
}

template <class Integrate>
Poly lia_generic(const pmc::EigenModel& model, int n, Integrate integ) {
    const int m = model.cutoff;
    const auto& b = model.beta;
    const auto& F = model.forcing;
    const cplx bn = b[n];
    Poly p;
    p.linear.assign(m, 0.0);
    p.quadratic.assign(m, std::vector<cplx>(m, 0.0));
    for (const auto& t : model.terms[n]) {
        const int k = t.k, l = t.l;
        if (k >= m || l >= m) continue;
        const cplx bk = b[k], bl = b[l];
        p.quadratic[k][l] += t.value * integ([&](double s) { return std::exp((bk + bl - bn) * s); });
        if (F[l] != 0.0)
            p.linear[k] += t.value * F[l] * integ([&](double s) { return std::exp((bk - bn) * s) * gamma_fn(bl, s); });
        if (F[k] != 0.0)
            p.linear[l] += t.value * F[k] * integ([&](double s) { return std::exp((bl - bn) * s) * gamma_fn(bk, s); });
        if (F[k] != 0.0 && F[l] != 0.0)
            p.constant += t.value * F[k] * F[l] *
                          integ([&](double s) { return std::exp(-bn * s) * gamma_fn(bk, s) * gamma_fn(bl, s); });
    }
    if (F[n] != 0.0) p.constant += F[n] * integ([&](double s) { return std::exp(-bn * s); });
    return p;
}

}  // namespace

cplx integrate(const std::function<cplx(double)>& f, double a, double b) {
    return {quad(f, false, a, b, false), quad(f, true, a, b, false)};
}

cplx integrate_from_minus_infinity(const std::function<cplx(double)>& f) {
    std::function<cplx(double)> g = [&f](double u) { return f(-u); };
    return {quad(g, false, 0, 0, true), quad(g, true, 0, 0, true)};
}

pmc::EigenModel random_eigen_model(std::mt19937_64& rng, int N, int m, bool forced) {
    std::uniform_real_distribution<double> u(-1, 1), low(-0.4, 0.2), high(-3, -1);
    pmc::EigenModel em;
    em.dim = N;
    em.cutoff = m;
    em.beta.resize(N);
    for (int j = 0; j < N; ++j) em.beta[j] = cplx(j < m ? low(rng) : high(rng), u(rng));
    em.forcing = CVec::Zero(N);
    if (forced)
        for (int j = 0; j < N; ++j) em.forcing[j] = cplx(u(rng), u(rng)) * 0.5;
    em.terms.assign(N, {});
    for (int n = 0; n < N; ++n)
        for (int k = 0; k < N; ++k)
            for (int l = 0; l < N; ++l) em.terms[n].push_back({k, l, cplx(u(rng), u(rng))});
    em.basis.eigenvalues = em.beta;
    em.basis.cutoff = m;
    return em;
}

pmc::Trajectory random_trajectory(std::mt19937_64& rng, int N, int K, double dt) {
    std::uniform_real_distribution<double> u(-1, 1), w(0.2, 3.0);
    pmc::Trajectory t;
    t.dt = dt;
    t.t0 = 0;
    t.samples = pmc::CMat::Zero(N, K);
    for (int i = 0; i < N; ++i)
        for (int q = 0; q < 3; ++q) {
            cplx a(u(rng), u(rng));
            double om = w(rng), ph = 6 * u(rng);
            for (int k = 0; k < K; ++k) t.samples(i, k) += a * std::exp(cplx(0, om * k * dt + ph));
        }
    return t;
}

cplx Poly::eval(const CVec& xi) const {
    cplx s = constant;
    const int m = static_cast<int>(linear.size());
    for (int k = 0; k < m; ++k) {
        s += linear[k] * xi[k];
        for (int l = 0; l < m; ++l) s += quadratic[k][l] * xi[k] * xi[l];
    }
    return s;
}

Poly lia_by_quadrature(const pmc::EigenModel& model, int n, double tau) {
    return lia_generic(model, n, [tau](auto f) { return integrate(f, -tau, 0.0); });
}

Poly lia_limit_by_quadrature(const pmc::EigenModel& model, int n) {
    return lia_generic(model, n, [](auto f) { return integrate_from_minus_infinity(f); });
}

double qn_direct(const pmc::Trajectory& traj, const Poly& phi, int n, int m) {
    const int K = traj.count();
    double s = 0;
    for (int k = 0; k < K; ++k) {
        double w = (k == 0 || k == K - 1) ? 0.5 : 1.0;
        s += w * std::norm(traj.samples(n, k) - phi.eval(traj.samples.col(k).head(m)));
    }
    return s / (K - 1);
}

std::vector<double> ks_projection(int li, int i, int lj, int j, double L, double gamma, int nmax) {
    const int N = 1024;
    const double c = std::sqrt(2.0 / L);
    auto e = [&](int l, int k, double x) {
        double q = 2 * kPi * k / L;
        return l == 0 ? c * std::cos(q * x) : c * std::sin(q * x);
    };
    auto de = [&](int l, int k, double x) {
        double q = 2 * kPi * k / L;
        return l == 0 ? -c * q * std::sin(q * x) : c * q * std::cos(q * x);
    };
    std::vector<double> g(N);
    for (int p = 0; p < N; ++p) {
        double x = L * p / N;
        g[p] = -0.5 * gamma * (e(li, i, x) * de(lj, j, x) + e(lj, j, x) * de(li, i, x));
    }
    gsl_fft_real_radix2_transform(g.data(), 1, N);
    // halfcomplex: g[k] = Re G_k, g[N-k] = Im G_k, G_k = sum_p g_p exp(-2 pi i k p / N)
    std::vector<double> out(2 * nmax);
    const double h = L / N;
    for (int n = 1; n <= nmax; ++n) {
        double re = g[n], im = g[N - n];
        out[2 * (n - 1)] = c * h * re;
        out[2 * (n - 1) + 1] = -c * h * im;
    }
    return out;
}

CVec rb_convective_state() {
    static const CVec y = [] {
        pmc::QuadraticModel m = pmc::rb9d_build({});
        pmc::Trajectory t = pmc::simulate_model(m, pmc::rb_default_initial(), 5e-3, 600.0, 10);
        CVec mean = t.window(200, 400).samples.rowwise().mean();
        return pmc::closest_fixed_point(m, mean);
    }();
    return y;
}

double observed_order(const std::vector<double>& errors) {
    double worst = 1e300;
    for (size_t k = 1; k < errors.size(); ++k) worst = std::min(worst, std::log2(errors[k - 1] / errors[k]));
    return worst;
}

}  // namespace oracle
