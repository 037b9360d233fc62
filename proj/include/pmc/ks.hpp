#pragma once

#include <functional>
#include <memory>
#include <string>

#include "pmc/diagnostics.hpp"

namespace pmc {

enum class KsForm { FourParam, Alpha };

// FourParam: u_t = -nu u_xxxx - D u_xx - gamma u u_x on (0, L).
// Alpha:     u_t = -4 u_xxxx - alpha (u_xx + u u_x) on (0, 2 pi).
struct KsConfig {
    KsForm form = KsForm::FourParam;
    double nu = 2e-4, D = 0.2, L = 2 * 3.14159265358979323846, gamma = 1.0;
    double alpha = 4000.0;
    int nx = 256;
    double dt = 1e-3;
    bool dealias = true;
    int contour_points = 64;
    double contour_radius = 1.0;  // in units of dt * beta_k

    static KsConfig regime_a();
    static KsConfig regime_b();
};

struct KsPhysical {
    double nu, D, L, gamma;
};
KsPhysical ks_physical(const KsConfig& cfg);

struct KsRescaling {
    double alpha;
    double length_scale;     // x = length_scale * xbar
    double time_scale;       // t = time_scale * tbar
    double amplitude_scale;  // u = amplitude_scale * ubar
};
KsRescaling ks_rescale(const KsConfig& cfg);
// Inverse map: recover (nu, D, L, gamma) given alpha and the chosen nu, D.
KsConfig ks_from_alpha(double alpha, double nu, double D, double gamma);

double ks_eigenvalue(const KsConfig& cfg, int k);
int ks_unstable_pairs(const KsConfig& cfg);

// Mode index of (wavenumber k >= 1, parity l in {0: cos, 1: sin}).
inline int ks_index(int k, int l) { return 2 * (k - 1) + l; }

// <B(e^{li}_i, e^{lj}_j), e^{ln}_n> for B(u, v) = -(gamma/2)(u v_x + v u_x).
double ks_coefficient(int li, int i, int lj, int j, int ln, int n, double L, double gamma);

// Real cosine/sine basis with `pairs` wavenumbers, cutoff after `m_pairs` wavenumbers.
EigenModel ks_build(const KsConfig& cfg, int m_pairs, int pairs = 0);

// Conversions between half-complex Fourier coefficients uhat_k = FFT(u)_k / Nx and basis amplitudes.
CVec ks_fourier_to_modes(const CVec& uhat, int pairs, double L);
CVec ks_modes_to_fourier(const CVec& y, int nx, double L);

class KsDns {
public:
    explicit KsDns(const KsConfig& cfg);
    ~KsDns();
    KsDns(const KsDns&) = delete;
    KsDns& operator=(const KsDns&) = delete;

    void set_grid(const RVec& u);    // physical values on x_j = L j / nx
    void set_modes(const CVec& y);   // basis amplitudes
    void step();
    double time() const { return t_; }
    const CVec& fourier() const { return v_; }
    CVec modes(int pairs) const;
    RVec grid() const;
    double l2_norm() const;
    bool finite() const;

    // scheme coefficients per wavenumber
    const CVec& E() const { return E_; }

private:
    CVec nonlinear(const CVec& v);

    KsConfig cfg_;
    KsPhysical p_;
    int nh_;
    double t_ = 0.0;
    CVec v_, L_, E_, E2_, Q_, f1_, f2_, f3_, g_;
    std::vector<double> mask_;
    struct Fft;
    std::unique_ptr<Fft> fft_;
};

RVec ks_default_initial(const KsConfig& cfg);

struct KsRunOptions {
    double t_final = 1.0;
    int save_stride = 1;
    int pairs = 62;
    double save_from = 0.0;  // samples before this time are not stored
    std::function<void(double, const KsDns&)> observer;  // every step
};
// Returns the stored samples as basis amplitudes (real values in complex storage).
Trajectory ks_dns(const KsConfig& cfg, const RVec& u0, const KsRunOptions& opt);

}  // namespace pmc
