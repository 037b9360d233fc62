#include "pmc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace pmc {

CVec rb_default_initial() {
    CVec c = CVec::Zero(9);
    c[0] = c[2] = c[7] = c[8] = 0.01;
    return c;
}

Trajectory simulate_model(const QuadraticModel& model, const CVec& x0, double dt, double t_final, int stride,
                          double t0) {
    IntegrateOptions o;
    o.dt = dt;
    o.steps = std::lround(t_final / dt);
    o.save_stride = stride;
    o.t0 = t0;
    auto res = integrate_rk4([&model](const CVec& x) { return model.rhs(x); }, x0, o);
    if (res.blew_up) throw Error(ErrorKind::NonFinite, "model integration diverged at step " + std::to_string(res.fail_step));
    return res.traj;
}

CVec closest_fixed_point(const QuadraticModel& model, const CVec& target, int tries, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    const double scales[] = {0.1, 1.0, 5.0};
    CVec best;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < tries; ++k) {
        CVec x0 = target;
        if (k > 0)
            for (int i = 0; i < x0.size(); ++i) x0[i] += scales[k % 3] * g(rng);
        try {
            CVec y = find_fixed_point(model, x0);
            double d = (y - target).norm();
            if (d < best_d) best_d = d, best = y;
        } catch (const Error&) {
        }
    }
    if (best.size() == 0) throw Error(ErrorKind::NonFinite, "no fixed point found near the target state");
    return best;
}

int distinct_maxima(const RVec& x, double tol) {
    std::vector<double> peaks;
    for (Eigen::Index i = 1; i + 1 < x.size(); ++i)
        if (x[i] > x[i - 1] && x[i] >= x[i + 1]) peaks.push_back(x[i]);
    if (peaks.empty()) return 0;
    const double range = std::max(1e-300, x.maxCoeff() - x.minCoeff());
    std::sort(peaks.begin(), peaks.end());
    int levels = 1;
    for (size_t i = 1; i < peaks.size(); ++i)
        if (peaks[i] - peaks[i - 1] > tol * range) ++levels;
    return levels;
}

int dominant_bin(const Spectrum& s) {
    Eigen::Index i = 0;
    s.power.tail(s.power.size() - 1).maxCoeff(&i);
    return static_cast<int>(i) + 1;
}

int peak_in_band(const Spectrum& s, double f_lo, double f_hi) {
    int best = -1;
    for (Eigen::Index k = 1; k < s.freq.size(); ++k)
        if (s.freq[k] >= f_lo && s.freq[k] <= f_hi && (best < 0 || s.power[k] > s.power[best])) best = static_cast<int>(k);
    return best;
}

namespace {

Trajectory to_eigen_traj(const Trajectory& phys, const SpectralBasis& basis, const CVec& shift) {
    Trajectory out;
    out.dt = phys.dt;
    out.t0 = phys.t0;
    out.samples.resize(phys.dim(), phys.count());
    for (int k = 0; k < phys.count(); ++k) out.samples.col(k) = basis.to_eigen(phys.samples.col(k) - shift);
    return out;
}

RVec component(const Trajectory& tr, int i) {
    RVec v(tr.count());
    for (int k = 0; k < tr.count(); ++k) v[k] = tr.samples(i, k).real();
    return v;
}

}  // namespace

RbExperimentResult run_rb_experiment(const RbExperimentConfig& cfg) {
    RbExperimentResult res;
    res.cfg = cfg;
    Rb9dConfig rc;
    rc.r = cfg.r;
    const QuadraticModel full = rb9d_build(rc);

    Trajectory spin = simulate_model(full, rb_default_initial(), cfg.dt, cfg.spinup, std::lround(cfg.spinup / cfg.dt));
    const CVec c_start = spin.samples.col(spin.count() - 1);
    const double span = std::max(cfg.eval_T, cfg.t0_offset + cfg.train_T);
    Trajectory dns = simulate_model(full, c_start, cfg.dt, span, 1, cfg.spinup);
    Trajectory train = dns.window(cfg.spinup + cfg.t0_offset, cfg.train_T);

    RVec w = trapezoid_weights(train.count());
    res.mean = train.samples * w.cast<cplx>();
    QuadraticModel fl = fluctuation_model(full, res.mean);
    SpectralBasis basis = decompose(fl, cfg.m);
    res.model = std::make_shared<EigenModel>(to_eigen_model(fl, basis));
    const EigenModel& em = *res.model;
    Trajectory y = to_eigen_traj(train, basis, res.mean);

    RVec energy = RVec::Zero(9);
    for (int k = 0; k < y.count(); ++k) energy += w[k] * y.samples.col(k).cwiseAbs2();
    for (int j = 0; j < 9; ++j) res.energy_fraction.push_back(energy[j] / energy.sum());

    const double tau_max = cfg.tau_max > 0 ? cfg.tau_max : default_tau_max(em);
    for (int n = cfg.m; n < 9; ++n) {
        ModeCost cost = make_cost(y, em, Family::LIA, n, false);
        res.candidates.push_back(minimize_qn_global(cost, tau_max, cfg.grid));
        res.taus.push_back(res.candidates.back().front().tau);
    }
    if (cfg.discriminate) res.taus = discriminate_by_correlation(y, em, Family::LIA, res.candidates, 2).taus;
    res.param = lia_build(em, res.taus);
    for (int n = cfg.m; n < 9; ++n) res.qn.push_back(defect_qn(y, res.param, n, true));

    res.corr = correlation(y, res.param, &em.basis);
    if (!res.corr.c.empty()) {
        long near = 0;
        double s = 0;
        for (size_t k = 0; k < res.corr.c.size(); ++k) {
            s += res.corr.c[k];
            if (res.corr.alpha[k] < cfg.alpha_near_zero) ++near;
        }
        res.mean_correlation = s / res.corr.c.size();
        res.alpha_mass_near_zero = double(near) / res.corr.c.size();
    }

    if (cfg.h2_benchmark) {
        try {
            CVec ybar = closest_fixed_point(full, res.mean, cfg.fixed_point_tries, cfg.seed);
            QuadraticModel fl2 = fluctuation_model(full, ybar);
            fl2.forcing.setZero();
            SpectralBasis b2 = decompose(fl2, cfg.m);
            EigenModel em2 = to_eigen_model(fl2, b2);
            Parameterization h2 = im_build(em2, 2);
            Trajectory z = to_eigen_traj(train, b2, ybar);
            for (int n = cfg.m; n < 9; ++n) res.qn_h2.push_back(defect_qn(z, h2, n, true));
        } catch (const Error& e) {
            res.h2_error = e.what();
        }
    }

    if (cfg.run_closure) {
        Trajectory dns_eval = dns.window(cfg.spinup, cfg.eval_T);
        RVec c2 = component(dns_eval, 1);
        res.psd_dns = psd(c2, cfg.dt, cfg.psd_segment);
        res.distinct_maxima_dns = distinct_maxima(c2);

        ClosureField field(em, res.param);
        IntegrateOptions o;
        o.dt = cfg.dt;
        o.steps = std::lround((cfg.closure_spinup + cfg.eval_T) / cfg.dt);
        auto run = integrate_rk4([&field](const CVec& x) { return field.rhs(x); }, y.samples.col(0).head(cfg.m), o);
        res.closure_blew_up = run.blew_up;
        if (!run.blew_up) {
            Trajectory red = run.traj.window(cfg.closure_spinup, cfg.eval_T);
            Trajectory phys = reconstruct(res.param, red, &em.basis, &res.mean);
            RVec p2 = component(phys, 1);
            res.psd_closure = psd(p2, cfg.dt, cfg.psd_segment);
            res.distinct_maxima_closure = distinct_maxima(p2);
        }
    }
    return res;
}

namespace {

double band_mean(const RVec& num, const RVec& den, int lo, int hi, bool ratio) {
    double s = 0;
    int c = 0;
    for (int k = lo; k <= hi && k <= den.size(); ++k) {
        double d = den[k - 1];
        s += ratio ? num[k - 1] / d : std::abs(num[k - 1] - d) / d;
        ++c;
    }
    return c ? s / c : 0.0;
}

// Per-wavenumber energy of the parameterized amplitudes plus the resolved part.
void accumulate_lift(RVec& E, const Parameterization& p, const CVec& xi) {
    CVec y = p.lift(xi);
    const int pairs = static_cast<int>(y.size()) / 2;
    for (int k = 0; k < pairs && k < E.size(); ++k) E[k] += std::norm(y[2 * k]) + std::norm(y[2 * k + 1]);
}

}  // namespace

KsExperimentResult run_ks_experiment(const KsExperimentConfig& cfg) {
    KsExperimentResult res;
    res.cfg = cfg;
    res.unstable_pairs = ks_unstable_pairs(cfg.ks);
    const double h = cfg.ks.dt;
    const long n0 = std::lround(cfg.t_train / h);
    const long n1 = n0 + std::lround(cfg.T_train / h);
    const long n2 = n1 + std::lround(cfg.T_eval / h);

    std::vector<CVec> train_s, eval_s;
    std::vector<double> dns_norms;
    {
        KsDns dns(cfg.ks);
        dns.set_grid(ks_default_initial(cfg.ks));
        for (long s = 0; s <= n2; ++s) {
            if (s > 0) {
                dns.step();
                if (!dns.finite()) throw Error(ErrorKind::NonFinite, "KS DNS diverged at step " + std::to_string(s));
            }
            if (s >= n0 && s <= n1 && (s - n0) % cfg.train_stride == 0) train_s.push_back(dns.modes(cfg.pairs));
            if (s >= n1) {
                dns_norms.push_back(dns.l2_norm());
                if ((s - n1) % cfg.eval_stride == 0) eval_s.push_back(dns.modes(cfg.pairs));
            }
        }
    }
    auto pack = [](const std::vector<CVec>& v, double dt, double t0) {
        Trajectory t;
        t.dt = dt;
        t.t0 = t0;
        t.samples.resize(v.front().size(), static_cast<Eigen::Index>(v.size()));
        for (size_t k = 0; k < v.size(); ++k) t.samples.col(k) = v[k];
        return t;
    };
    Trajectory train = pack(train_s, h * cfg.train_stride, n0 * h);
    Trajectory eval = pack(eval_s, h * cfg.eval_stride, n1 * h);
    res.dns_norm = norm_stats(Eigen::Map<RVec>(dns_norms.data(), dns_norms.size()));

    const EigenModel em = ks_build(cfg.ks, cfg.m, cfg.pairs);
    const double tau_max = cfg.tau_max > 0 ? cfg.tau_max : default_tau_max(em);
    for (int n = em.cutoff; n < em.dim; ++n) {
        ModeCost cost = make_cost(train, em, cfg.family, n, cfg.jn);
        double t;
        if (cfg.jn) {
            JnOptions o;
            o.tau_max = tau_max;
            o.grid_points = cfg.grid;
            o.smooth_width = cfg.smooth_width;
            t = minimize_jn(cost, o);
        } else {
            t = minimize_qn_global(cost, tau_max, cfg.grid).front().tau;
        }
        res.taus.push_back(t);
        res.cost_values.push_back(cost.value(t));
        res.qn_values.push_back(make_cost(train, em, cfg.family, n, false).value(t));
    }
    const Parameterization opt = family_build(cfg.family, em, res.taus);
    const Parameterization standard = qsa_limit_build(em);

    res.E_dns = energy_spectrum(eval);
    res.E_standard = RVec::Zero(cfg.pairs);
    res.E_optimal = RVec::Zero(cfg.pairs);
    for (int k = 0; k < eval.count(); ++k) {
        CVec xi = eval.samples.col(k).head(em.cutoff);
        accumulate_lift(res.E_standard, standard, xi);
        accumulate_lift(res.E_optimal, opt, xi);
    }
    res.E_standard /= double(eval.count());
    res.E_optimal /= double(eval.count());
    res.band_ratio_standard = band_mean(res.E_standard, res.E_dns, cfg.band_lo, cfg.band_hi, true);
    res.band_error_optimal = band_mean(res.E_optimal, res.E_dns, cfg.band_lo, cfg.band_hi, false);

    if (!cfg.run_closures) return res;
    const CVec x0 = eval.samples.col(0).head(em.cutoff);
    {
        ClosureField f(em, standard);
        IntegrateOptions o;
        o.dt = cfg.closure_dt;
        o.steps = cfg.standard_qsa_steps;
        o.store = false;
        auto r = integrate_semi_implicit(f.linear_diagonal(), [&f](const CVec& x) { return f.nonlinear(x); }, x0, o);
        res.standard_blew_up = r.blew_up;
        res.standard_fail_step = r.fail_step;
    }
    {
        ClosureField f(em, opt);
        std::vector<double> norms;
        res.E_closure = RVec::Zero(cfg.pairs);
        long samples = 0, idx = 0;
        IntegrateOptions o;
        o.dt = cfg.closure_dt;
        o.steps = std::lround(cfg.T_eval / cfg.closure_dt);
        o.store = false;
        o.observer = [&](double, const CVec& x) {
            CVec y = opt.lift(x);
            norms.push_back(y.norm());
            if (idx++ % cfg.eval_stride == 0) {
                accumulate_lift(res.E_closure, opt, x);
                ++samples;
            }
        };
        auto r = integrate_semi_implicit(f.linear_diagonal(), [&f](const CVec& x) { return f.nonlinear(x); }, x0, o);
        res.closure_blew_up = r.blew_up;
        if (samples) res.E_closure /= double(samples);
        res.closure_norm = norm_stats(Eigen::Map<RVec>(norms.data(), norms.size()));
        res.band_error_closure = band_mean(res.E_closure, res.E_dns, cfg.band_lo, cfg.band_hi, false);
        res.err_mean = std::abs(res.closure_norm.mean - res.dns_norm.mean) / res.dns_norm.mean;
        res.err_std = std::abs(res.closure_norm.std - res.dns_norm.std) / res.dns_norm.std;
    }
    if (cfg.galerkin_m > 0) {
        const EigenModel eg = ks_build(cfg.ks, cfg.galerkin_m, cfg.galerkin_m + 1);
        const Parameterization zero = zero_build(eg);
        ClosureField f(eg, zero);
        CVec xg = CVec::Zero(eg.cutoff);
        const int keep = std::min<int>(eg.cutoff, static_cast<int>(eval.dim()));
        xg.head(keep) = eval.samples.col(0).head(keep);
        std::vector<double> norms;
        IntegrateOptions o;
        o.dt = cfg.galerkin_dt;
        o.steps = std::lround(cfg.T_eval / cfg.galerkin_dt);
        o.store = false;
        o.observer = [&](double, const CVec& x) { norms.push_back(x.norm()); };
        auto r = integrate_semi_implicit(f.linear_diagonal(), [&f](const CVec& x) { return f.nonlinear(x); }, xg, o);
        res.galerkin_blew_up = r.blew_up;
        res.galerkin_norm = norm_stats(Eigen::Map<RVec>(norms.data(), norms.size()));
        res.galerkin_err_mean = std::abs(res.galerkin_norm.mean - res.dns_norm.mean) / res.dns_norm.mean;
        res.galerkin_err_std = std::abs(res.galerkin_norm.std - res.dns_norm.std) / res.dns_norm.std;
    }
    return res;
}

KsStatsResult run_ks_statistics(const KsStatsConfig& cfg) {
    KsStatsResult res;
    KsDns dns(cfg.ks);
    dns.set_grid(ks_default_initial(cfg.ks));
    const long n0 = std::lround(cfg.t_begin / cfg.ks.dt);
    const long n1 = n0 + std::lround(cfg.T / cfg.ks.dt);
    RVec E = RVec::Zero(cfg.pairs);
    std::vector<double> norms;
    long count = 0;
    for (long s = 0; s <= n1; ++s) {
        if (s > 0) {
            dns.step();
            if (!dns.finite()) throw Error(ErrorKind::NonFinite, "KS DNS diverged at step " + std::to_string(s));
        }
        if (s >= n0 && (s - n0) % cfg.stride == 0) {
            CVec y = dns.modes(cfg.pairs);
            for (int k = 0; k < cfg.pairs; ++k) E[k] += std::norm(y[2 * k]) + std::norm(y[2 * k + 1]);
            norms.push_back(dns.l2_norm());
            ++count;
        }
    }
    res.E = E / double(count);
    res.peak = spectrum_peak(res.E);
    const double L = ks_physical(cfg.ks).L;
    res.acf = acf_spatial(res.E, L, 4096);
    res.fit = fit_damped_cosine(res.acf, res.peak, cfg.fit_x_max);
    res.norm = norm_stats(Eigen::Map<RVec>(norms.data(), norms.size()));
    return res;
}

}  // namespace pmc
