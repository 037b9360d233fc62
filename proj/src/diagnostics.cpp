#include "pmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace pmc {

Trajectory Trajectory::window(double t_begin, double T) const {
    int k0 = static_cast<int>(std::llround((t_begin - t0) / dt));
    int k1 = static_cast<int>(std::llround((t_begin + T - t0) / dt));
    k0 = std::clamp(k0, 0, count() - 1);
    k1 = std::clamp(k1, 0, count() - 1);
    if (k1 - k0 < 2) throw Error(ErrorKind::Config, "training window shorter than three samples");
    Trajectory w;
    w.dt = dt;
    w.t0 = time(k0);
    w.samples = samples.middleCols(k0, k1 - k0 + 1);
    return w;
}

Trajectory Trajectory::every(int stride) const {
    Trajectory w;
    w.dt = dt * stride;
    w.t0 = t0;
    int n = (count() - 1) / stride + 1;
    w.samples.resize(dim(), n);
    for (int k = 0; k < n; ++k) w.samples.col(k) = samples.col(k * stride);
    return w;
}

void Trajectory::validate() const {
    if (!(dt > 0)) throw Error(ErrorKind::Format, "trajectory time step must be positive");
    if (count() < 3) throw Error(ErrorKind::Format, "trajectory needs at least three samples");
}

RVec trapezoid_weights(int count) {
    RVec w = RVec::Constant(count, 1.0);
    w[0] = w[count - 1] = 0.5;
    return w / (count - 1);
}

double time_mean(const RVec& f) { return trapezoid_weights(static_cast<int>(f.size())).dot(f); }
cplx time_mean(const CVec& f) {
    return trapezoid_weights(static_cast<int>(f.size())).cast<cplx>().cwiseProduct(f).sum();
}

CMat parameterized_series(const Trajectory& traj, const Parameterization& p) {
    const int K = traj.count();
    CMat out(p.unresolved(), K);
    for (int k = 0; k < K; ++k) out.col(k) = p.eval(traj.samples.col(k).head(p.cutoff));
    return out;
}

namespace {

void check_mode(const Parameterization& p, int n) {
    if (n < p.cutoff || n >= p.dim) throw Error(ErrorKind::Config, "mode is not an unresolved mode");
}

}  // namespace

double defect_qn(const Trajectory& traj, const Parameterization& p, int n, bool normalized) {
    check_mode(p, n);
    const int K = traj.count();
    RVec err(K), en(K);
    for (int k = 0; k < K; ++k) {
        cplx u = traj.samples(n, k);
        cplx phi = p.eval_mode(n, traj.samples.col(k).head(p.cutoff));
        err[k] = std::norm(u - phi);
        en[k] = std::norm(u);
    }
    double q = time_mean(err);
    if (!normalized) return q;
    double e = time_mean(en);
    if (e < 1e-300) throw Error(ErrorKind::ZeroEnergy, "mode " + std::to_string(n + 1));
    return q / e;
}

double defect_jn(const Trajectory& traj, const Parameterization& p, int n) {
    check_mode(p, n);
    const int K = traj.count();
    RVec ev(K), pv(K);
    for (int k = 0; k < K; ++k) {
        ev[k] = std::norm(traj.samples(n, k));
        pv[k] = std::norm(p.eval_mode(n, traj.samples.col(k).head(p.cutoff)));
    }
    double e = time_mean(ev);
    if (e < 1e-300) throw Error(ErrorKind::ZeroEnergy, "mode " + std::to_string(n + 1));
    return std::abs(e - time_mean(pv)) / e;
}

namespace {

CVec unresolved_vector(const CVec& amplitudes, int cutoff, const SpectralBasis* basis) {
    if (basis && basis->has_vectors())
        return basis->right.rightCols(basis->dim() - cutoff) * amplitudes;
    return amplitudes;
}

}  // namespace

double defect_global(const Trajectory& traj, const Parameterization& p, const SpectralBasis* basis) {
    const int K = traj.count();
    const int s = p.unresolved();
    RVec num(K), den(K);
    for (int k = 0; k < K; ++k) {
        CVec ys = traj.samples.col(k).tail(s);
        CVec psi = p.eval(traj.samples.col(k).head(p.cutoff));
        num[k] = unresolved_vector(ys - psi, p.cutoff, basis).squaredNorm();
        den[k] = unresolved_vector(ys, p.cutoff, basis).squaredNorm();
    }
    double d = time_mean(den);
    if (d < 1e-300) throw Error(ErrorKind::ZeroEnergy, "unresolved energy vanishes");
    return time_mean(num) / d;
}

namespace {

void push_corr(CorrelationSeries& out, double t, const CVec& psi, const CVec& ys) {
    double a = psi.norm(), b = ys.norm();
    if (a < 1e-14 || b < 1e-14) {
        ++out.dropped;
        return;
    }
    double c = std::clamp(inner(psi, ys).real() / (a * b), -1.0, 1.0);
    out.t.push_back(t);
    out.c.push_back(c);
    out.alpha.push_back(std::acos(c));
}

}  // namespace

CorrelationSeries correlation(const Trajectory& traj, const Parameterization& p, const SpectralBasis* basis) {
    CorrelationSeries out;
    const int s = p.unresolved();
    for (int k = 0; k < traj.count(); ++k) {
        CVec psi = p.eval(traj.samples.col(k).head(p.cutoff));
        CVec ys = traj.samples.col(k).tail(s);
        push_corr(out, traj.time(k), unresolved_vector(psi, p.cutoff, basis), unresolved_vector(ys, p.cutoff, basis));
    }
    return out;
}

CorrelationSeries correlation_modewise(const Trajectory& traj, const Parameterization& p, int n) {
    check_mode(p, n);
    check_mode(p, n + 1);
    CorrelationSeries out;
    for (int k = 0; k < traj.count(); ++k) {
        CVec xi = traj.samples.col(k).head(p.cutoff);
        CVec f(2), y(2);
        f << p.eval_mode(n, xi), p.eval_mode(n + 1, xi);
        y << traj.samples(n, k), traj.samples(n + 1, k);
        push_corr(out, traj.time(k), f, y);
    }
    return out;
}

std::pair<int, int> lex_pair_1based(int k, int m) {
    int r = k % m;
    if (r != 0) return {(k - r) / m + 1, r};
    return {k / m, m};
}

MomentSet moments(const Trajectory& traj, int n, int m) {
    const int K = traj.count();
    const int M = m * m;
    RVec w = trapezoid_weights(K);
    CMat W(M, K), Z(M, K);
    CVec u(K);
    for (int k = 0; k < K; ++k) {
        for (int p = 0; p < M; ++p) {
            auto [i, j] = lex_pair(p, m);
            cplx ui = std::conj(traj.samples(i, k));
            Z(p, k) = ui;
            W(p, k) = ui * std::conj(traj.samples(j, k));
        }
        u[k] = traj.samples(n, k);
    }
    CVec wc = w.cast<cplx>();
    CMat Ww = W * wc.asDiagonal();
    CMat Zw = Z * wc.asDiagonal();
    MomentSet ms;
    ms.mode = n;
    ms.m = m;
    ms.Q1 = Zw.rowwise().sum();
    ms.Q2 = Ww.rowwise().sum();
    ms.Q2hat = Zw * u;
    ms.Q3 = Ww * u;
    ms.Q2tilde = Zw * Z.adjoint();
    ms.Q3tilde = Zw * W.adjoint();
    ms.Q4 = Ww * W.adjoint();
    ms.un = wc.cwiseProduct(u).sum();
    ms.unun = w.dot(u.cwiseAbs2());
    return ms;
}

namespace {

double re(cplx z) { return z.real(); }

// <|Phi|^2> part of the recast
double phi_energy(const MomentSet& ms, const LiaVectors& v) {
    const CVec& d = v.d;
    const CVec& g = v.gamma;
    const cplx ab = std::conj(v.alpha);
    return re(d.dot(ms.Q4 * d)) + 2 * re(g.dot(ms.Q3tilde * d)) + re(g.dot(ms.Q2tilde * g)) +
           2 * re(ab * ms.Q2.dot(d)) + 2 * re(ab * ms.Q1.dot(g)) + std::norm(v.alpha);
}

}  // namespace

double qn_recast(const MomentSet& ms, const EigenModel& model, int n, double tau) {
    auto v = lia_vectors(model, n, tau, false);
    const cplx ab = std::conj(v.alpha);
    return phi_energy(ms, v) - 2 * re(ms.Q3.dot(v.d)) - 2 * re(ms.Q2hat.dot(v.gamma)) + ms.unun -
           2 * re(ab * ms.un);
}

double lia_variance(const MomentSet& ms, const EigenModel& model, int n, double tau) {
    return phi_energy(ms, lia_vectors(model, n, tau, false));
}

double qn_derivative(const MomentSet& ms, const EigenModel& model, int n, double tau) {
    auto v = lia_vectors(model, n, tau, true);
    const CVec &d = v.d, &dp = v.d_prime, &g = v.gamma, &gp = v.gamma_prime;
    const cplx ab = std::conj(v.alpha), abp = std::conj(v.alpha_prime);
    cplx s = d.dot(ms.Q4 * dp) - ms.Q3.dot(dp) + gp.dot(ms.Q3tilde * d) + g.dot(ms.Q3tilde * dp) +
             g.dot(ms.Q2tilde * gp) - ms.Q2hat.dot(gp) + abp * ms.Q2.dot(d) + ab * ms.Q2.dot(dp) +
             abp * ms.Q1.dot(g) + ab * ms.Q1.dot(gp) - abp * ms.un + v.alpha_prime * ab;
    return 2 * s.real();
}

}  // namespace pmc
