#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pmc/closure.hpp"
#include "pmc/ks.hpp"
#include "pmc/rb9d.hpp"
#include "pmc/stats.hpp"
#include "pmc/tau_optimizer.hpp"

namespace pmc {

// ---- Rayleigh-Benard 9D ----

CVec rb_default_initial();
// Physical-coordinate RK4 run; sample k at t0 + k * dt * stride.
Trajectory simulate_model(const QuadraticModel& model, const CVec& x0, double dt, double t_final, int stride = 1,
                          double t0 = 0.0);

struct RbExperimentConfig {
    double r = 14.1;
    int m = 5;
    double dt = 5e-3;
    double spinup = 2000.0;
    double t0_offset = 0.0;     // training window starts at spinup + t0_offset
    double train_T = 0.75 * 17.24;
    double eval_T = 1000.0;     // DNS and closure length used for spectra
    double closure_spinup = 200.0;
    double tau_max = 0.0;       // 0: default
    int grid = 2000;
    bool discriminate = false;
    bool h2_benchmark = true;
    bool run_closure = true;
    int psd_segment = 1 << 14;
    double alpha_near_zero = 0.2;  // radians
    int fixed_point_tries = 200;
    unsigned seed = 1;
};

struct RbExperimentResult {
    RbExperimentConfig cfg;
    CVec mean;
    std::shared_ptr<EigenModel> model;
    std::vector<std::vector<Candidate>> candidates;
    std::vector<double> taus, qn;  // per unresolved mode
    std::vector<double> energy_fraction;
    std::vector<double> qn_h2;
    std::string h2_error;
    Parameterization param;
    CorrelationSeries corr;
    double alpha_mass_near_zero = 0.0;
    double mean_correlation = 0.0;
    bool closure_blew_up = false;
    Spectrum psd_dns, psd_closure;  // second physical component
    int distinct_maxima_dns = 0, distinct_maxima_closure = 0;
};

RbExperimentResult run_rb_experiment(const RbExperimentConfig& cfg);

// Newton from the target and from seeded random perturbations of it; returns the root nearest the target.
CVec closest_fixed_point(const QuadraticModel& model, const CVec& target, int tries = 200, unsigned seed = 1);

// Number of distinct local-maximum levels of a series (levels closer than tol * range merge).
int distinct_maxima(const RVec& series, double tol = 1e-3);
// Index of the strongest nonzero-frequency peak, and of the strongest peak in [lo, hi] * f_ref.
int dominant_bin(const Spectrum& s);
int peak_in_band(const Spectrum& s, double f_lo, double f_hi);

// ---- Kuramoto-Sivashinsky ----

struct KsExperimentConfig {
    KsConfig ks = KsConfig::regime_a();
    int m = 31;          // resolved pairs
    int pairs = 62;      // parameterized up to this wavenumber
    double t_train = 1.0;
    double T_train = 4.0;
    int train_stride = 1;
    double T_eval = 100.0;
    int eval_stride = 10;
    Family family = Family::QSA;
    bool jn = true;
    int grid = 2000;
    int smooth_width = 5;
    double tau_max = 0.0;  // 0: default
    int band_lo = 32, band_hi = 36;
    int galerkin_m = 49;  // 0 skips the Galerkin run
    long standard_qsa_steps = 1000;
    double closure_dt = 1e-3;
    double galerkin_dt = 1e-4;
    bool run_closures = true;
};

struct KsExperimentResult {
    KsExperimentConfig cfg;
    int unstable_pairs = 0;
    std::vector<double> taus, cost_values, qn_values;
    RVec E_dns, E_standard, E_optimal, E_closure;
    double band_ratio_standard = 0.0;  // mean E_standard / E_dns over the band
    double band_error_optimal = 0.0;   // mean |E_opt - E_dns| / E_dns over the band
    double band_error_closure = 0.0;
    bool standard_blew_up = false;
    long standard_fail_step = -1;
    NormStats dns_norm{0, 0}, closure_norm{0, 0}, galerkin_norm{0, 0};
    bool closure_blew_up = false, galerkin_blew_up = false;
    double err_mean = 0.0, err_std = 0.0, galerkin_err_mean = 0.0, galerkin_err_std = 0.0;
};

KsExperimentResult run_ks_experiment(const KsExperimentConfig& cfg);

struct KsStatsConfig {
    KsConfig ks = KsConfig::regime_a();
    double t_begin = 1.0;
    double T = 400.0;
    int stride = 10;
    int pairs = 127;
    double fit_x_max = 1.0;
};
struct KsStatsResult {
    RVec E;
    int peak = 0;
    SpatialAcf acf;
    DampedCosineFit fit{0, 0, 0, ""};
    NormStats norm{0, 0};
};
KsStatsResult run_ks_statistics(const KsStatsConfig& cfg);

}  // namespace pmc
