#include "pmc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>
#include <fftw3.h>

namespace pmc {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

RVec energy_spectrum(const Trajectory& traj) {
    const int pairs = traj.dim() / 2;
    RVec E = RVec::Zero(pairs);
    const int K = traj.count();
    if (K == 0) return E;
    for (int s = 0; s < K; ++s)
        for (int k = 0; k < pairs; ++k) E[k] += std::norm(traj.samples(2 * k, s)) + std::norm(traj.samples(2 * k + 1, s));
    return E / double(K);
}

RVec norm_series(const Trajectory& traj) {
    RVec out(traj.count());
    for (int s = 0; s < traj.count(); ++s) out[s] = traj.samples.col(s).norm();
    return out;
}

NormStats norm_stats(const RVec& series) {
    if (series.size() == 0) return {0.0, 0.0};
    const double mean = series.mean();
    const double var = (series.array() - mean).square().mean();
    return {mean, std::sqrt(var)};
}

Spectrum psd(const RVec& series, double dt, int segment) {
    const int n = static_cast<int>(series.size());
    int seg = std::min(segment, n);
    if (seg < 4) throw Error(ErrorKind::Config, "series too short for a spectrum");
    const int hop = seg / 2;
    RVec w(seg);
    for (int i = 0; i < seg; ++i) w[i] = 0.5 - 0.5 * std::cos(2 * kPi * i / seg);
    const double wss = w.squaredNorm();
    const int nf = seg / 2 + 1;
    double* in = fftw_alloc_real(seg);
    fftw_complex* out = fftw_alloc_complex(nf);
    fftw_plan plan = fftw_plan_dft_r2c_1d(seg, in, out, FFTW_ESTIMATE);
    Spectrum sp;
    sp.freq.resize(nf);
    sp.power = RVec::Zero(nf);
    for (int k = 0; k < nf; ++k) sp.freq[k] = k / (seg * dt);
    int count = 0;
    for (int start = 0; start + seg <= n; start += hop) {
        const double mean = series.segment(start, seg).mean();
        for (int i = 0; i < seg; ++i) in[i] = (series[start + i] - mean) * w[i];
        fftw_execute(plan);
        for (int k = 0; k < nf; ++k) sp.power[k] += out[k][0] * out[k][0] + out[k][1] * out[k][1];
        ++count;
    }
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
    sp.power *= dt / (wss * count);
    for (int k = 1; k < nf; ++k)
        if (!(seg % 2 == 0 && k == nf - 1)) sp.power[k] *= 2.0;
    return sp;
}

RVec acf_temporal(const RVec& series, int max_lag, bool demean) {
    const int K = static_cast<int>(series.size());
    max_lag = std::min(max_lag, K - 1);
    RVec x = series;
    if (demean && K > 0) x.array() -= x.mean();
    RVec r = RVec::Zero(max_lag + 1);
    for (int l = 0; l <= max_lag; ++l) r[l] = x.head(K - l).dot(x.tail(K - l)) / K;
    return r;
}

RVec acf_space_averaged(const Trajectory& traj, int max_lag, double L) {
    const int K = traj.count();
    max_lag = std::min(max_lag, K - 1);
    RVec r = RVec::Zero(max_lag + 1);
    for (int l = 0; l <= max_lag; ++l) {
        double s = 0;
        for (int t = 0; t + l < K; ++t) s += inner(traj.samples.col(t + l), traj.samples.col(t)).real();
        r[l] = s / (K * L);
    }
    return r;
}

SpatialAcf acf_spatial(const RVec& spectrum, double L, int nx) {
    const int nh = nx / 2 + 1;
    if (spectrum.size() >= nh) throw Error(ErrorKind::Config, "grid too coarse for the spectrum");
    fftw_complex* in = fftw_alloc_complex(nh);
    double* out = fftw_alloc_real(nx);
    for (int k = 0; k < nh; ++k) in[k][0] = in[k][1] = 0.0;
    // sum_k E_k cos(k kappa x) = c2r of E_k / 2 for k >= 1
    for (int k = 1; k <= spectrum.size(); ++k) in[k][0] = 0.5 * spectrum[k - 1] / L;
    fftw_plan plan = fftw_plan_dft_c2r_1d(nx, in, out, FFTW_ESTIMATE);
    fftw_execute(plan);
    SpatialAcf a;
    a.x.resize(nx);
    a.C.resize(nx);
    for (int j = 0; j < nx; ++j) {
        a.x[j] = L * j / nx;
        a.C[j] = out[j];
    }
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
    return a;
}

Histogram pdf_histogram(const RVec& series, int bins, double lo, double hi) {
    if (bins < 1 || !(hi > lo)) throw Error(ErrorKind::Config, "histogram needs bins >= 1 and hi > lo");
    Histogram h;
    h.width = (hi - lo) / bins;
    h.centers.resize(bins);
    h.density = RVec::Zero(bins);
    for (int b = 0; b < bins; ++b) h.centers[b] = lo + (b + 0.5) * h.width;
    h.in_range = 0;
    for (double v : series) {
        if (!(v >= lo && v <= hi)) continue;
        int b = std::min(bins - 1, static_cast<int>((v - lo) / h.width));
        h.density[b] += 1.0;
        ++h.in_range;
    }
    if (h.in_range > 0) h.density /= (h.in_range * h.width);
    return h;
}

int spectrum_peak(const RVec& spectrum) {
    Eigen::Index i = 0;
    spectrum.maxCoeff(&i);
    return static_cast<int>(i) + 1;
}

DampedCosineFit fit_damped_cosine(const SpatialAcf& acf, double kp, double x_max) {
    const double c0 = acf.C[0];
    if (!(std::abs(c0) > 0)) throw Error(ErrorKind::ZeroEnergy, "spatial ACF vanishes at zero lag");
    auto fit = [&](double omega) {
        auto res = [&](double lambda) {
            double s = 0;
            for (Eigen::Index j = 0; j < acf.x.size() && acf.x[j] <= x_max; ++j) {
                double d = acf.C[j] / c0 - std::cos(omega * acf.x[j]) * std::exp(-acf.x[j] / lambda);
                s += d * d;
            }
            return s;
        };
        // coarse log scan then Brent
        double best = 1e-3, bv = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 200; ++i) {
            double l = 1e-3 * std::pow(1e4, i / 200.0);
            double v = res(l);
            if (v < bv) bv = v, best = l;
        }
        std::uintmax_t it = 200;
        auto r = boost::math::tools::brent_find_minima(res, best / 1.1, best * 1.1, 40, it);
        return std::make_pair(r.first, r.second);
    };
    auto a = fit(kp);
    auto b = fit(1.0 / kp);
    if (a.second <= b.second) return {a.first, kp, a.second, "k"};
    return {b.first, 1.0 / kp, b.second, "1/k"};
}

}  // namespace pmc
