#pragma once

#include <string>
#include <vector>

#include "pmc/diagnostics.hpp"

namespace pmc {

// Time-mean of |y_k^0|^2 + |y_k^1|^2 for k = 1..pairs over a cosine/sine basis trajectory.
RVec energy_spectrum(const Trajectory& traj);

// L2 norm of each sample (orthonormal basis coordinates).
RVec norm_series(const Trajectory& traj);

struct NormStats {
    double mean, std;
};
NormStats norm_stats(const RVec& series);

struct Spectrum {
    RVec freq, power;
};
// Welch estimate: Hann window, 50% overlap, one-sided density.
Spectrum psd(const RVec& series, double dt, int segment = 1 << 14);

// Biased autocovariance r(l) = (1/K) sum x_t x_{t+l}, l = 0..max_lag.
RVec acf_temporal(const RVec& series, int max_lag, bool demean = true);
// Space-averaged temporal ACF rho(l) = (1/(L K)) sum_s <u(s), u(s+l)> over an orthonormal basis.
RVec acf_space_averaged(const Trajectory& traj, int max_lag, double L);

struct SpatialAcf {
    RVec x, C;
};
// Time-average spatial ACF from a mean energy spectrum E(k), evaluated on nx grid points in [0, L).
SpatialAcf acf_spatial(const RVec& spectrum, double L, int nx);

struct Histogram {
    RVec centers, density;
    double width;
    long in_range;
};
Histogram pdf_histogram(const RVec& series, int bins, double lo, double hi);

// C(x)/C(0) ~ cos(w x) exp(-x/lambda) fitted on [0, x_max].
struct DampedCosineFit {
    double lambda;
    double omega;
    double residual;
    std::string form;  // "k" for w = k_p, "1/k" for w = 1/k_p
};
DampedCosineFit fit_damped_cosine(const SpatialAcf& acf, double kp, double x_max);
int spectrum_peak(const RVec& spectrum);  // 1-based wavenumber of max E(k)

}  // namespace pmc
