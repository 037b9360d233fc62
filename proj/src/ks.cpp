#include "pmc/ks.hpp"

#include <cmath>
#include <cstdlib>

#include <fftw3.h>

namespace pmc {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

KsConfig KsConfig::regime_a() { return KsConfig{}; }

KsConfig KsConfig::regime_b() {
    KsConfig c;
    c.form = KsForm::Alpha;
    c.alpha = 33000.0;
    c.nx = 2048;
    c.dt = 1e-9;
    return c;
}

KsPhysical ks_physical(const KsConfig& cfg) {
    if (cfg.form == KsForm::Alpha) return {4.0, cfg.alpha, 2 * kPi, cfg.alpha};
    return {cfg.nu, cfg.D, cfg.L, cfg.gamma};
}

KsRescaling ks_rescale(const KsConfig& cfg) {
    auto p = ks_physical(cfg);
    KsRescaling r;
    r.alpha = p.L * p.L * p.D / (p.nu * kPi * kPi);
    r.length_scale = std::sqrt(p.nu * r.alpha) / (2 * std::sqrt(p.D));
    r.time_scale = p.nu * r.alpha * r.alpha / (4 * p.D * p.D);
    r.amplitude_scale = 2 * std::pow(p.D, 1.5) / (p.gamma * std::sqrt(p.nu * r.alpha));
    return r;
}

KsConfig ks_from_alpha(double alpha, double nu, double D, double gamma) {
    KsConfig c;
    c.form = KsForm::FourParam;
    c.nu = nu;
    c.D = D;
    c.gamma = gamma;
    c.L = std::sqrt(nu * alpha / D) * kPi;
    return c;
}

double ks_eigenvalue(const KsConfig& cfg, int k) {
    auto p = ks_physical(cfg);
    const double q = 2 * kPi * k / p.L;
    return -p.nu * q * q * q * q + p.D * q * q;
}

int ks_unstable_pairs(const KsConfig& cfg) {
    int n = 0;
    for (int k = 1; k < 1000000; ++k) {
        if (ks_eigenvalue(cfg, k) > 0) {
            ++n;
        } else if (k > 1) {
            double kstar = ks_physical(cfg).L / (2 * kPi) * std::sqrt(ks_physical(cfg).D / ks_physical(cfg).nu);
            if (k > kstar) break;
        }
    }
    return n;
}

double ks_coefficient(int li, int i, int lj, int j, int ln, int n, double L, double gamma) {
    const double c0 = gamma * kPi / (std::sqrt(2.0) * std::pow(L, 1.5));
    const bool sum = (n == i + j);
    const bool diff = (n == std::abs(i - j)) && n > 0;
    if (!sum && !diff) return 0.0;
    if (li == lj) {
        if (ln == 0) return 0.0;
        if (sum) return li == 0 ? c0 * n : -c0 * n;
        return c0 * n;
    }
    if (ln == 1) return 0.0;
    // cosine index a, sine index b
    const int a = (li == 0) ? i : j;
    const int b = (li == 0) ? j : i;
    if (sum) return -c0 * n;
    return c0 * (a - b);
}

EigenModel ks_build(const KsConfig& cfg, int m_pairs, int pairs) {
    if (pairs <= 0) pairs = 2 * m_pairs;
    if (m_pairs < 1 || m_pairs >= pairs) throw Error(ErrorKind::Config, "KS cutoff must satisfy 1 <= m < pairs");
    auto p = ks_physical(cfg);
    EigenModel em;
    em.dim = 2 * pairs;
    em.cutoff = 2 * m_pairs;
    em.beta.resize(em.dim);
    for (int k = 1; k <= pairs; ++k)
        for (int l = 0; l < 2; ++l) em.beta[ks_index(k, l)] = ks_eigenvalue(cfg, k);
    em.forcing = CVec::Zero(em.dim);
    em.terms.assign(em.dim, {});
    em.cubic_terms.assign(em.dim, {});
    em.basis.eigenvalues = em.beta;
    em.basis.cutoff = em.cutoff;
    for (int i = 1; i <= pairs; ++i)
        for (int j = 1; j <= pairs; ++j)
            for (int li = 0; li < 2; ++li)
                for (int lj = 0; lj < 2; ++lj) {
                    for (int n : {i + j, std::abs(i - j)}) {
                        if (n < 1 || n > pairs) continue;
                        for (int ln = 0; ln < 2; ++ln) {
                            double v = ks_coefficient(li, i, lj, j, ln, n, p.L, p.gamma);
                            if (v != 0.0) em.terms[ks_index(n, ln)].push_back({ks_index(i, li), ks_index(j, lj), v});
                        }
                    }
                }
    return em;
}

CVec ks_fourier_to_modes(const CVec& uhat, int pairs, double L) {
    const double s = std::sqrt(2 * L);
    CVec y(2 * pairs);
    for (int k = 1; k <= pairs; ++k) {
        cplx c = k < uhat.size() ? uhat[k] : cplx(0.0);
        y[ks_index(k, 0)] = s * c.real();
        y[ks_index(k, 1)] = -s * c.imag();
    }
    return y;
}

CVec ks_modes_to_fourier(const CVec& y, int nx, double L) {
    const double s = 1.0 / std::sqrt(2 * L);
    CVec v = CVec::Zero(nx / 2 + 1);
    const int pairs = static_cast<int>(y.size()) / 2;
    for (int k = 1; k <= pairs && k < nx / 2; ++k)
        v[k] = s * cplx(y[ks_index(k, 0)].real(), -y[ks_index(k, 1)].real());
    return v;
}

struct KsDns::Fft {
    int n;
    double* real;
    fftw_complex* spec;
    fftw_plan fwd, bwd;
    explicit Fft(int nx) : n(nx) {
        real = fftw_alloc_real(nx);
        spec = fftw_alloc_complex(nx / 2 + 1);
        fwd = fftw_plan_dft_r2c_1d(nx, real, spec, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_1d(nx, spec, real, FFTW_ESTIMATE);
    }
    ~Fft() {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(real);
        fftw_free(spec);
    }
    void to_grid(const CVec& v) {
        for (int k = 0; k <= n / 2; ++k) {
            spec[k][0] = v[k].real();
            spec[k][1] = v[k].imag();
        }
        fftw_execute(bwd);
    }
    CVec from_grid() {
        fftw_execute(fwd);
        CVec v(n / 2 + 1);
        for (int k = 0; k <= n / 2; ++k) v[k] = cplx(spec[k][0], spec[k][1]) / double(n);
        return v;
    }
};

KsDns::KsDns(const KsConfig& cfg) : cfg_(cfg), p_(ks_physical(cfg)), nh_(cfg.nx / 2 + 1), fft_(new Fft(cfg.nx)) {
    if (cfg.nx < 8 || cfg.nx % 2) throw Error(ErrorKind::Config, "nx must be an even number >= 8");
    const double h = cfg.dt;
    const double kappa = 2 * kPi / p_.L;
    v_ = CVec::Zero(nh_);
    L_.resize(nh_);
    E_.resize(nh_);
    E2_.resize(nh_);
    Q_.resize(nh_);
    f1_.resize(nh_);
    f2_.resize(nh_);
    f3_.resize(nh_);
    g_.resize(nh_);
    mask_.assign(nh_, 1.0);
    const int M = cfg.contour_points;
    for (int k = 0; k < nh_; ++k) {
        L_[k] = ks_eigenvalue(cfg, k);
        g_[k] = cplx(0.0, -0.5 * p_.gamma * kappa * k);
        if (cfg.dealias && 3 * k >= cfg.nx) mask_[k] = 0.0;
        if (k == nh_ - 1) mask_[k] = 0.0;
        const cplx z = h * L_[k];
        E_[k] = std::exp(z);
        E2_[k] = std::exp(z / 2.0);
        cplx q = 0, a = 0, b = 0, c = 0;
        for (int j = 0; j < M; ++j) {
            cplx r = z + cfg.contour_radius * std::exp(cplx(0.0, 2 * kPi * (j + 0.5) / M));
            cplx er = std::exp(r), r3 = r * r * r;
            q += (std::exp(r / 2.0) - 1.0) / r;
            a += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
            b += (2.0 + r + er * (-2.0 + r)) / r3;
            c += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
        }
        Q_[k] = h * (q / double(M)).real();
        f1_[k] = h * (a / double(M)).real();
        f2_[k] = h * (b / double(M)).real();
        f3_[k] = h * (c / double(M)).real();
    }
}

KsDns::~KsDns() = default;

CVec KsDns::nonlinear(const CVec& v) {
    fft_->to_grid(v);
    for (int j = 0; j < cfg_.nx; ++j) fft_->real[j] *= fft_->real[j];
    CVec w = fft_->from_grid();
    for (int k = 0; k < nh_; ++k) w[k] *= g_[k] * mask_[k];
    return w;
}

void KsDns::set_grid(const RVec& u) {
    if (u.size() != cfg_.nx) throw Error(ErrorKind::Config, "initial datum length differs from nx");
    for (int j = 0; j < cfg_.nx; ++j) fft_->real[j] = u[j];
    v_ = fft_->from_grid();
    for (int k = 0; k < nh_; ++k) v_[k] *= mask_[k];
    v_[0] = 0.0;
    t_ = 0.0;
}

void KsDns::set_modes(const CVec& y) {
    v_ = ks_modes_to_fourier(y, cfg_.nx, p_.L);
    for (int k = 0; k < nh_; ++k) v_[k] *= mask_[k];
    t_ = 0.0;
}

void KsDns::step() {
    CVec Nv = nonlinear(v_);
    CVec a = E2_.cwiseProduct(v_) + Q_.cwiseProduct(Nv);
    CVec Na = nonlinear(a);
    CVec b = E2_.cwiseProduct(v_) + Q_.cwiseProduct(Na);
    CVec Nb = nonlinear(b);
    CVec c = E2_.cwiseProduct(a) + Q_.cwiseProduct(2.0 * Nb - Nv);
    CVec Nc = nonlinear(c);
    v_ = E_.cwiseProduct(v_) + f1_.cwiseProduct(Nv) + 2.0 * f2_.cwiseProduct(Na + Nb) + f3_.cwiseProduct(Nc);
    v_[0] = 0.0;
    t_ += cfg_.dt;
}

CVec KsDns::modes(int pairs) const { return ks_fourier_to_modes(v_, pairs, p_.L); }

RVec KsDns::grid() const {
    fft_->to_grid(v_);
    RVec u(cfg_.nx);
    for (int j = 0; j < cfg_.nx; ++j) u[j] = fft_->real[j];
    return u;
}

double KsDns::l2_norm() const {
    // Parseval on (0, L): ||u||^2 = 2 L sum_{k>=1} |uhat_k|^2
    double s = 0;
    for (int k = 1; k < nh_; ++k) s += std::norm(v_[k]);
    return std::sqrt(2 * p_.L * s);
}

bool KsDns::finite() const { return v_.allFinite(); }

RVec ks_default_initial(const KsConfig& cfg) {
    auto p = ks_physical(cfg);
    RVec u(cfg.nx);
    for (int j = 0; j < cfg.nx; ++j) {
        double x = 2 * kPi * j / cfg.nx;  // x_j = L j / nx mapped to (0, 2 pi)
        u[j] = std::cos(x) * (1 + std::sin(x));
    }
    (void)p;
    return u;
}

Trajectory ks_dns(const KsConfig& cfg, const RVec& u0, const KsRunOptions& opt) {
    KsDns dns(cfg);
    dns.set_grid(u0);
    const long steps = std::lround(opt.t_final / cfg.dt);
    std::vector<CVec> kept;
    long first = -1;
    auto keep = [&](long s) {
        if (s % opt.save_stride != 0 || dns.time() < opt.save_from - 0.5 * cfg.dt) return;
        if (first < 0) first = s;
        kept.push_back(dns.modes(opt.pairs));
    };
    keep(0);
    if (opt.observer) opt.observer(dns.time(), dns);
    for (long s = 1; s <= steps; ++s) {
        dns.step();
        if (!dns.finite()) throw Error(ErrorKind::NonFinite, "KS DNS diverged at step " + std::to_string(s));
        keep(s);
        if (opt.observer) opt.observer(dns.time(), dns);
    }
    Trajectory tr;
    tr.dt = cfg.dt * opt.save_stride;
    tr.t0 = first < 0 ? 0.0 : first * cfg.dt;
    tr.samples.resize(2 * opt.pairs, static_cast<Eigen::Index>(kept.size()));
    for (size_t k = 0; k < kept.size(); ++k) tr.samples.col(k) = kept[k];
    return tr;
}

}  // namespace pmc
