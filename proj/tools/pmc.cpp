#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "pmc/experiments.hpp"
#include "pmc/io.hpp"

using namespace pmc;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::Config:
        case ErrorKind::Format:
        case ErrorKind::CutoffSplitsPair:
        case ErrorKind::BasisMismatch:
        case ErrorKind::ResonanceViolation: return 2;
        case ErrorKind::MissingInput:
        case ErrorKind::MissingFieldShapes: return 4;
        default: return 3;
    }
}

std::pair<double, double> parse_window(const std::string& s) {
    auto c = s.find(',');
    if (c == std::string::npos) throw Error(ErrorKind::Config, "window must be 't0,T', got '" + s + "'");
    try {
        return {std::stod(s.substr(0, c)), std::stod(s.substr(c + 1))};
    } catch (const std::exception&) {
        throw Error(ErrorKind::Config, "window must be 't0,T', got '" + s + "'");
    }
}

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (int i; (i = next++) < count;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> g(mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

std::vector<double> to_std(const RVec& v) { return {v.data(), v.data() + v.size()}; }

RVec component(const Trajectory& t, int i) {
    RVec v(t.count());
    for (int k = 0; k < t.count(); ++k) v[k] = t.samples(i, k).real();
    return v;
}

// ---- sources: presets or model files ----

struct Source {
    std::string name;
    bool ks = false;
    KsConfig kcfg;
    QuadraticModel model;
    CVec x0;
};

Source load_source(const std::string& s, double r) {
    Source src;
    src.name = s;
    if (s == "rb9d-pd" || s == "rb9d-chaos") {
        Rb9dConfig rc;
        rc.r = r > 0 ? r : (s == "rb9d-pd" ? 14.1 : 14.22);
        src.model = rb9d_build(rc);
        src.x0 = rb_default_initial();
    } else if (s == "ks-a" || s == "ks-b") {
        src.ks = true;
        src.kcfg = s == "ks-a" ? KsConfig::regime_a() : KsConfig::regime_b();
    } else {
        src.model = read_model(s, &src.x0);
        if (src.x0.size() == 0) src.x0 = CVec::Zero(src.model.dim);
    }
    return src;
}

// Samples in the coordinates of `em`: eigen-coordinates of x - mean when the basis has vectors,
// leading rows otherwise.
Trajectory model_coords(const Trajectory& t, const EigenModel& em, const CVec& mean) {
    Trajectory out;
    out.dt = t.dt;
    out.t0 = t.t0;
    if (em.basis.has_vectors()) {
        if (t.dim() != em.dim)
            throw Error(ErrorKind::BasisMismatch, "trajectory has dim " + std::to_string(t.dim()) +
                                                      ", model has " + std::to_string(em.dim));
        CVec m = mean.size() ? mean : CVec::Zero(em.dim);
        out.samples = em.basis.dual.adjoint() * (t.samples.colwise() - m);
    } else {
        if (t.dim() < em.dim)
            throw Error(ErrorKind::BasisMismatch, "trajectory has dim " + std::to_string(t.dim()) +
                                                      ", model needs " + std::to_string(em.dim));
        out.samples = t.samples.topRows(em.dim);
    }
    return out;
}

Trajectory windowed(const Trajectory& t, const std::string& w) {
    if (w.empty()) return t;
    auto [t0, T] = parse_window(w);
    Trajectory out = t.window(t0, T);
    if (out.count() < 2) throw Error(ErrorKind::Config, "window " + w + " holds fewer than 2 samples");
    return out;
}

std::string resolve_near(const std::string& ref, const std::string& base_file) {
    if (ref.empty() || fs::path(ref).is_absolute() || fs::exists(ref)) return ref;
    return (fs::path(base_file).parent_path() / ref).string();
}

// ---- simulate ----

struct SimulateArgs {
    std::string source, out = "traj.bin", model_out, x0_from;
    double t_final = 0, dt = 0, r = 0, spinup = 0;
    int stride = 1, pairs = 62;
};

void cmd_simulate(const SimulateArgs& a) {
    Source src = load_source(a.source, a.r);
    Trajectory traj;
    if (src.ks) {
        KsConfig c = src.kcfg;
        if (a.dt > 0) c.dt = a.dt;
        KsRunOptions o;
        o.t_final = a.t_final > 0 ? a.t_final : 5.0;
        o.save_stride = a.stride;
        o.pairs = a.pairs;
        o.save_from = a.spinup;
        traj = ks_dns(c, ks_default_initial(c), o);
    } else {
        CVec x0 = src.x0;
        if (!a.x0_from.empty()) {
            Trajectory t = load_trajectory(a.x0_from);
            if (t.dim() != src.model.dim) throw Error(ErrorKind::BasisMismatch, "x0 trajectory dimension mismatch");
            x0 = t.samples.col(t.count() - 1);
        }
        const double dt = a.dt > 0 ? a.dt : 5e-3;
        if (a.spinup > 0) {
            Trajectory s = simulate_model(src.model, x0, dt, a.spinup, std::max(1L, std::lround(a.spinup / dt)));
            x0 = s.samples.col(s.count() - 1);
        }
        traj = simulate_model(src.model, x0, dt, a.t_final > 0 ? a.t_final : 1000.0, a.stride, a.spinup);
        if (!a.model_out.empty()) write_model(output_path(a.model_out), src.model, &src.x0);
    }
    const std::string out = output_path(a.out);
    save_trajectory(out, traj);
    std::printf("wrote %s: dim %d, %d samples, dt %g, t0 %g\n", out.c_str(), traj.dim(), traj.count(), traj.dt,
                traj.t0);
}

// ---- decompose ----

struct DecomposeArgs {
    std::string source, mean_from, window, out_model = "fluctuation.ini", out_eigen = "eigen.ini";
    int cutoff = 0, pairs = 0;
    double r = 0;
};

void cmd_decompose(const DecomposeArgs& a) {
    Source src = load_source(a.source, a.r);
    if (src.ks) {
        const int pairs = a.pairs > 0 ? a.pairs : 2 * a.cutoff;
        EigenModel em = ks_build(src.kcfg, a.cutoff, pairs);
        const std::string out = output_path(a.out_eigen);
        write_eigen_model(out, em);
        std::printf("wrote %s: %d modes (%d pairs), cutoff %d, %d unstable pairs\n", out.c_str(), em.dim, pairs,
                    em.cutoff, ks_unstable_pairs(src.kcfg));
        return;
    }
    CVec mean = CVec::Zero(src.model.dim);
    if (!a.mean_from.empty()) {
        Trajectory t = windowed(load_trajectory(a.mean_from), a.window);
        if (t.dim() != src.model.dim) throw Error(ErrorKind::BasisMismatch, "mean trajectory dimension mismatch");
        mean = t.samples * trapezoid_weights(t.count()).cast<cplx>();
    }
    QuadraticModel fl = fluctuation_model(src.model, mean);
    SpectralBasis basis = decompose(fl, a.cutoff);
    EigenModel em = to_eigen_model(fl, basis);
    write_model(output_path(a.out_model), fl);
    write_eigen_model(output_path(a.out_eigen), em, &mean);
    std::printf("eigenvalues (cutoff after %d):\n", a.cutoff);
    for (int j = 0; j < em.dim; ++j)
        std::printf("  %2d  %+.10f %+.10fi%s\n", j + 1, em.beta[j].real(), em.beta[j].imag(),
                    j == a.cutoff - 1 ? "   <- cutoff" : "");
    std::printf("biorthogonality error %.3e\n", basis.biorthogonality_error());
}

// ---- optimize ----

struct OptimizeArgs {
    std::string eigen, traj, family = "lia", cost = "qn", window, method = "global", out = "param.ini",
                                                                           table = "taus.csv";
    bool discriminate = false;
    double tau_max = 0;
    int grid = 2000, smooth = 5, jobs = 1;
};

void cmd_optimize(const OptimizeArgs& a) {
    CVec mean;
    const EigenModel em = read_eigen_model(a.eigen, &mean);
    const Family f = parse_family(a.family);
    if (f != Family::LIA && f != Family::QSA && f != Family::KTAU)
        throw Error(ErrorKind::Config, "optimize takes --family lia, qsa or ktau");
    if (a.cost != "qn" && a.cost != "jn") throw Error(ErrorKind::Config, "--cost must be qn or jn");
    if (a.discriminate && a.cost != "qn") throw Error(ErrorKind::Config, "--discriminate applies to --cost qn");
    const bool jn = a.cost == "jn";
    const Trajectory y = model_coords(windowed(load_trajectory(a.traj), a.window), em, mean);
    const double tau_max = a.tau_max > 0 ? a.tau_max : default_tau_max(em);
    const int K = em.unresolved();
    std::vector<std::vector<Candidate>> cands(K);
    std::vector<double> taus(K), values(K);
    std::vector<long> iters(K, 0);
    parallel_for(K, a.jobs, [&](int r) {
        const int n = em.cutoff + r;
        ModeCost cost = make_cost(y, em, f, n, jn);
        if (jn) {
            JnOptions o;
            o.tau_max = tau_max;
            o.grid_points = a.grid;
            o.smooth_width = a.smooth;
            taus[r] = minimize_jn(cost, o);
        } else if (a.method == "descent") {
            DescentOptions o;
            o.tau_max = tau_max;
            DescentResult d = minimize_qn_descent(cost, o);
            if (d.max_iter_exceeded)
                throw Error(ErrorKind::MaxIterExceeded, "descent did not converge for mode " + std::to_string(n + 1));
            taus[r] = d.tau;
            iters[r] = d.iterations;
            cands[r] = {{d.tau, d.value}};
        } else {
            cands[r] = minimize_qn_global(cost, tau_max, a.grid);
            taus[r] = cands[r].front().tau;
        }
        values[r] = cost.value(taus[r]);
    });
    if (a.discriminate) {
        Selection s = discriminate_by_correlation(y, em, f, cands);
        taus = s.taus;
        std::printf("correlation discrimination: mean c = %.4f\n", s.mean_correlation);
    }
    const Parameterization p = family_build(f, em, taus);
    std::vector<double> mode, qn, jnv, ncand;
    for (int r = 0; r < K; ++r) {
        const int n = em.cutoff + r;
        mode.push_back(n + 1);
        qn.push_back(defect_qn(y, p, n, true));
        jnv.push_back(defect_jn(y, p, n));
        ncand.push_back(static_cast<double>(cands[r].size()));
    }
    const std::string out = output_path(a.out), table = output_path(a.table);
    std::string eig = a.eigen;
    if (!fs::path(eig).is_absolute()) eig = fs::absolute(eig).string();
    write_parameterization(out, p, eig);
    write_csv(table, {"mode", "tau", "cost", "Q_n", "J_n", "candidates"}, {mode, taus, values, qn, jnv, ncand});
    std::printf("%-6s %-14s %-14s %-14s %-14s\n", "mode", "tau*", "cost", "Q_n", "J_n");
    for (int r = 0; r < K; ++r)
        std::printf("%-6d %-14.6g %-14.6g %-14.6g %-14.6g\n", em.cutoff + r + 1, taus[r], values[r], qn[r], jnv[r]);
    std::printf("wrote %s and %s\n", out.c_str(), table.c_str());
}

// ---- closure ----

struct ClosureArgs {
    std::string eigen, param, x0_from, scheme = "rk4", out_reduced = "reduced.bin", out_full = "reconstructed.bin";
    double t_final = 100, dt = 1e-3;
    int x0_index = 0, stride = 1;
};

void cmd_closure(const ClosureArgs& a) {
    CVec mean;
    const EigenModel em = read_eigen_model(a.eigen, &mean);
    const Parameterization p = build_from_file(read_parameterization_file(a.param), em);
    Trajectory src = load_trajectory(a.x0_from);
    if (a.x0_index < 0 || a.x0_index >= src.count()) throw Error(ErrorKind::Config, "--x0-index out of range");
    Trajectory one;
    one.dt = src.dt;
    one.samples = src.samples.col(a.x0_index);
    const CVec x0 = model_coords(one, em, mean).samples.col(0).head(em.cutoff);
    ClosureField field(em, p);
    IntegrateOptions o;
    o.dt = a.dt;
    o.steps = std::lround(a.t_final / a.dt);
    o.save_stride = a.stride;
    IntegrationResult r;
    if (a.scheme == "rk4")
        r = integrate_rk4([&](const CVec& x) { return field.rhs(x); }, x0, o);
    else if (a.scheme == "semi-implicit")
        r = integrate_semi_implicit(field.linear_diagonal(), [&](const CVec& x) { return field.nonlinear(x); }, x0, o);
    else
        throw Error(ErrorKind::Config, "--scheme must be rk4 or semi-implicit");
    if (r.blew_up)
        throw Error(ErrorKind::NonFinite, "closure blew up at step " + std::to_string(r.fail_step) + " (t = " +
                                              std::to_string(r.fail_step * a.dt) + ")");
    const bool phys = em.basis.has_vectors();
    Trajectory full = reconstruct(p, r.traj, phys ? &em.basis : nullptr, phys && mean.size() ? &mean : nullptr);
    save_trajectory(output_path(a.out_reduced), r.traj);
    save_trajectory(output_path(a.out_full), full);
    std::printf("closure: %ld steps, %d samples; wrote %s and %s\n", o.steps, r.traj.count(),
                output_path(a.out_reduced).c_str(), output_path(a.out_full).c_str());
}

// ---- diagnose ----

struct DiagnoseArgs {
    std::string traj, param, eigen, report = "defects", window, out_dir = "diagnose", heat_flux_data;
    int component = 2, max_lag = 1000, segment = 1 << 14;
    double length = 2 * M_PI, fit_x_max = 1.0;
};

void cmd_diagnose(const DiagnoseArgs& a) {
    const ParameterizationFile pf = read_parameterization_file(a.param);
    const std::string eig = a.eigen.empty() ? resolve_near(pf.eigen_model, a.param) : a.eigen;
    if (eig.empty()) throw Error(ErrorKind::Config, "no eigen model: pass --model");
    CVec mean;
    const EigenModel em = read_eigen_model(eig, &mean);
    const Parameterization p = build_from_file(pf, em);
    const Trajectory raw = windowed(load_trajectory(a.traj), a.window);
    const Trajectory y = model_coords(raw, em, mean);
    const std::string dir = output_path(a.out_dir);
    const auto file = [&](const std::string& n) { return (fs::path(dir) / n).string(); };

    if (a.report == "defects") {
        std::vector<double> mode, tau, qn, qraw, jn;
        for (int n = em.cutoff; n < em.dim; ++n) {
            mode.push_back(n + 1);
            tau.push_back(p.taus[n - em.cutoff]);
            qn.push_back(defect_qn(y, p, n, true));
            qraw.push_back(defect_qn(y, p, n, false));
            jn.push_back(defect_jn(y, p, n));
            std::printf("mode %3d  tau %-12.6g Q_n %-12.6g J_n %-12.6g\n", n + 1, tau.back(), qn.back(), jn.back());
        }
        const double qt = defect_global(y, p, em.basis.has_vectors() ? &em.basis : nullptr);
        std::printf("global defect Q_T = %.6g\n", qt);
        write_csv(file("defects.csv"), {"mode", "tau", "Q_n", "Q_n_raw", "J_n"}, {mode, tau, qn, qraw, jn});
    } else if (a.report == "correlation") {
        CorrelationSeries c = correlation(y, p, em.basis.has_vectors() ? &em.basis : nullptr);
        write_csv(file("correlation.csv"), {"t", "c", "alpha"}, {c.t, c.c, c.alpha});
        double s = 0;
        for (double v : c.c) s += v;
        std::printf("mean c = %.6f over %zu samples (%d dropped)\n", c.c.empty() ? 0.0 : s / c.c.size(), c.c.size(),
                    c.dropped);
    } else if (a.report == "spectrum") {
        if (em.basis.has_vectors()) throw Error(ErrorKind::Config, "spectrum report needs a cosine/sine basis");
        Trajectory lifted = y;
        for (int k = 0; k < y.count(); ++k) lifted.samples.col(k) = p.lift(y.samples.col(k).head(em.cutoff));
        RVec E = energy_spectrum(y), Ep = energy_spectrum(lifted);
        std::vector<double> k;
        for (int i = 1; i <= E.size(); ++i) k.push_back(i);
        write_csv(file("spectrum.csv"), {"k", "E_true", "E_parameterized"}, {k, to_std(E), to_std(Ep)});
        std::printf("spectrum peak k = %d\n", spectrum_peak(E));
    } else if (a.report == "acf") {
        if (em.basis.has_vectors()) throw Error(ErrorKind::Config, "acf report needs a cosine/sine basis");
        RVec rho = acf_space_averaged(y, std::min(a.max_lag, y.count() - 1), a.length);
        std::vector<double> lag;
        for (int l = 0; l < rho.size(); ++l) lag.push_back(l * y.dt);
        write_csv(file("acf_temporal.csv"), {"lag", "rho"}, {lag, to_std(rho)});
        RVec E = energy_spectrum(y);
        SpatialAcf s = acf_spatial(E, a.length, 4096);
        write_csv(file("acf_spatial.csv"), {"x", "C"}, {to_std(s.x), to_std(s.C)});
        const int kp = spectrum_peak(E);
        DampedCosineFit fit = fit_damped_cosine(s, kp, a.fit_x_max);
        std::printf("k_p = %d, lambda = %.5f, omega = %.5f (%s form), residual %.3e\n", kp, fit.lambda, fit.omega,
                    fit.form.c_str(), fit.residual);
    } else if (a.report == "psd") {
        if (a.component < 1 || a.component > raw.dim()) throw Error(ErrorKind::Config, "--component out of range");
        Spectrum s = psd(component(raw, a.component - 1), raw.dt, a.segment);
        write_csv(file("psd.csv"), {"f", "power"}, {to_std(s.freq), to_std(s.power)});
        std::printf("dominant bin %d (f = %.6g)\n", dominant_bin(s), s.freq[dominant_bin(s)]);
    } else if (a.report == "heatflux") {
        if (!em.basis.has_vectors() || em.dim != 9) throw Error(ErrorKind::Config, "heatflux applies to the 9D model");
        const char* env = std::getenv("PM_CLOSURE_DATA_DIR");
        std::string data = a.heat_flux_data;
        if (data.empty()) data = (fs::path(env ? env : "data") / "rb9d_heat_flux.txt").string();
        HeatFluxMatrix hm = load_heat_flux_matrix(data);
        const int m = em.cutoff;
        std::vector<double> t, tot, cc, cs, ss, ptot;
        for (int k = 0; k < y.count(); ++k) {
            CVec z = y.samples.col(k);
            CVec low = CVec::Zero(9), high = CVec::Zero(9), phi = CVec::Zero(9);
            low.head(m) = z.head(m);
            high.tail(9 - m) = z.tail(9 - m);
            phi.tail(9 - m) = p.eval(z.head(m));
            CVec c = em.basis.to_physical(low) + (mean.size() ? mean : CVec::Zero(9));
            HeatFluxSplit h = rb9d_heat_flux(hm, c, em.basis.to_physical(high));
            HeatFluxSplit hp = rb9d_heat_flux(hm, c, em.basis.to_physical(phi));
            t.push_back(y.time(k));
            tot.push_back(h.total);
            cc.push_back(h.cc);
            cs.push_back(h.cs);
            ss.push_back(h.ss);
            ptot.push_back(hp.total);
        }
        write_csv(file("heatflux.csv"), {"t", "total", "cc", "cs", "ss", "total_parameterized"},
                  {t, tot, cc, cs, ss, ptot});
    } else {
        throw Error(ErrorKind::Config, "unknown report '" + a.report + "'");
    }
    std::printf("wrote %s/\n", dir.c_str());
}

// ---- reproduce ----

struct ReproduceArgs {
    std::vector<std::string> ids;
    std::string out_dir = "reproduce";
    bool extended = false, discriminate = false;
    double t0 = 0, train_T = 0, tau_max = 0;
    int jobs = 1, grid = 2000, smooth = 5;
    unsigned seed = 1;
    std::string command;
};

std::mutex print_mu;

void say(const std::string& id, const std::string& s) {
    std::lock_guard<std::mutex> g(print_mu);
    std::printf("[%s] %s\n", id.c_str(), s.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void reproduce_rb(const std::string& id, const ReproduceArgs& a, const std::string& dir) {
    RbExperimentConfig c;
    if (id == "rb-pd") {
        c.r = 14.1;
        c.m = 5;
        c.train_T = 0.75 * 17.24;
    } else {
        c.r = 14.22;
        c.m = id == "rb-chaos-m3" ? 3 : id == "rb-chaos-m5" ? 5 : 6;
        c.train_T = 17.25;
        c.h2_benchmark = false;
    }
    c.t0_offset = a.t0;
    if (a.train_T > 0) c.train_T = a.train_T;
    c.tau_max = a.tau_max;
    c.grid = a.grid;
    c.discriminate = a.discriminate;
    c.seed = a.seed;
    json cfg = {{"experiment", id},          {"r", c.r},           {"m", c.m},           {"dt", c.dt},
                {"spinup", c.spinup},        {"t0_offset", c.t0_offset}, {"train_T", c.train_T},
                {"eval_T", c.eval_T},        {"closure_spinup", c.closure_spinup}, {"tau_max", c.tau_max},
                {"grid", c.grid},            {"discriminate", c.discriminate},  {"psd_segment", c.psd_segment},
                {"fixed_point_tries", c.fixed_point_tries}};
    write_manifest((fs::path(dir) / "manifest.json").string(), cfg.dump(), c.seed, a.command);

    RbExperimentResult r = run_rb_experiment(c);
    std::vector<double> mode, h2;
    for (int n = c.m; n < 9; ++n) {
        mode.push_back(n + 1);
        h2.push_back(r.qn_h2.empty() ? NAN : r.qn_h2[n - c.m]);
        say(id, "mode " + std::to_string(n + 1) + ": tau* = " + fmt("%.5g", r.taus[n - c.m]) +
                    "  Q_n = " + fmt("%.4g", r.qn[n - c.m]) +
                    (r.qn_h2.empty() ? "" : "  Q_n(h2) = " + fmt("%.4g", r.qn_h2[n - c.m])));
    }
    if (!r.h2_error.empty()) say(id, "h2 benchmark unavailable: " + r.h2_error);
    std::vector<double> frac(r.energy_fraction.begin() + c.m, r.energy_fraction.end());
    write_csv((fs::path(dir) / "defects.csv").string(), {"mode", "tau", "Q_n", "Q_n_h2", "energy_fraction"},
              {mode, r.taus, r.qn, h2, frac});
    write_csv((fs::path(dir) / "correlation.csv").string(), {"t", "c", "alpha"}, {r.corr.t, r.corr.c, r.corr.alpha});
    say(id, "mean correlation " + fmt("%.4f", r.mean_correlation) + ", alpha mass below 0.2 rad " +
                fmt("%.4f", r.alpha_mass_near_zero));
    if (r.closure_blew_up) {
        say(id, "closure blew up");
    } else {
        write_csv((fs::path(dir) / "psd.csv").string(), {"f", "dns", "closure"},
                  {to_std(r.psd_dns.freq), to_std(r.psd_dns.power), to_std(r.psd_closure.power)});
        say(id, "PSD dominant bin dns " + std::to_string(dominant_bin(r.psd_dns)) + " closure " +
                    std::to_string(dominant_bin(r.psd_closure)) + "; distinct maxima dns " +
                    std::to_string(r.distinct_maxima_dns) + " closure " + std::to_string(r.distinct_maxima_closure));
    }
}

void reproduce_ks(const std::string& id, const ReproduceArgs& a, const std::string& dir) {
    KsExperimentConfig c;
    if (id == "ks-b-extended") {
        if (!a.extended) throw Error(ErrorKind::Config, "ks-b-extended needs --extended (hours of compute)");
        c.ks = KsConfig::regime_b();
        c.m = 90;
        c.pairs = 180;
        c.t_train = 1e-5;
        c.T_train = 2e-5;
        c.T_eval = 2e-3;
        c.eval_stride = 100;
        c.band_lo = 91;
        c.band_hi = 121;
        c.galerkin_m = 0;
        c.standard_qsa_steps = 1000;
        c.closure_dt = c.ks.dt;
    }
    c.grid = a.grid;
    c.smooth_width = a.smooth;
    c.tau_max = a.tau_max;
    json cfg = {{"experiment", id},      {"form", c.ks.form == KsForm::Alpha ? "alpha" : "four-param"},
                {"nu", c.ks.nu},         {"D", c.ks.D},        {"L", c.ks.L},        {"gamma", c.ks.gamma},
                {"alpha", c.ks.alpha},   {"nx", c.ks.nx},      {"dt", c.ks.dt},      {"dealias", c.ks.dealias},
                {"m", c.m},              {"pairs", c.pairs},   {"t_train", c.t_train}, {"T_train", c.T_train},
                {"T_eval", c.T_eval},    {"eval_stride", c.eval_stride}, {"grid", c.grid},
                {"smooth_width", c.smooth_width}, {"tau_max", c.tau_max}, {"galerkin_m", c.galerkin_m},
                {"closure_dt", c.closure_dt}, {"galerkin_dt", c.galerkin_dt}};
    write_manifest((fs::path(dir) / "manifest.json").string(), cfg.dump(), a.seed, a.command);

    struct Row {
        std::string name;
        Family f;
        bool jn;
    };
    std::vector<Row> rows = {{"qsa-jn", Family::QSA, true}};
    if (id == "ks-b-extended")
        rows = {{"qsa-jn", Family::QSA, true},
                {"qsa-qn", Family::QSA, false},
                {"lia-jn", Family::LIA, true},
                {"lia-qn", Family::LIA, false}};
    for (const auto& row : rows) {
        KsExperimentConfig rc = c;
        rc.family = row.f;
        rc.jn = row.jn;
        if (&row != &rows.front()) rc.galerkin_m = 0;
        KsExperimentResult r = run_ks_experiment(rc);
        const std::string sub = rows.size() > 1 ? row.name + "_" : "";
        std::vector<double> k;
        for (int i = 1; i <= r.E_dns.size(); ++i) k.push_back(i);
        write_csv((fs::path(dir) / (sub + "spectrum.csv")).string(),
                  {"k", "E_dns", "E_standard_qsa", "E_optimal", "E_closure"},
                  {k, to_std(r.E_dns), to_std(r.E_standard), to_std(r.E_optimal), to_std(r.E_closure)});
        std::vector<double> mode;
        for (size_t i = 0; i < r.taus.size(); ++i) mode.push_back(2 * c.m + i + 1);
        write_csv((fs::path(dir) / (sub + "taus.csv")).string(), {"mode", "tau", "cost", "Q_n"},
                  {mode, r.taus, r.cost_values, r.qn_values});
        say(id, row.name + ": unstable pairs " + std::to_string(r.unstable_pairs) + ", standard QSA band ratio " +
                    fmt("%.2f", r.band_ratio_standard) + (r.standard_blew_up ? " (closure blew up at step " +
                                                                                   std::to_string(r.standard_fail_step) + ")"
                                                                             : " (closure stable)"));
        say(id, row.name + ": optimal band error " + fmt("%.2f%%", 100 * r.band_error_optimal) + ", closure band error " +
                    fmt("%.2f%%", 100 * r.band_error_closure));
        say(id, row.name + ": norm mean/std error " + fmt("%.2f%%", 100 * r.err_mean) + " / " +
                    fmt("%.2f%%", 100 * r.err_std) + (r.closure_blew_up ? " (closure blew up)" : ""));
        if (rc.galerkin_m > 0)
            say(id, "Galerkin m = " + std::to_string(rc.galerkin_m) + ": mean/std error " +
                        fmt("%.2f%%", 100 * r.galerkin_err_mean) + " / " + fmt("%.2f%%", 100 * r.galerkin_err_std));
    }
}

void reproduce_ks_stats(const std::string& id, const ReproduceArgs& a, const std::string& dir) {
    KsStatsConfig c;
    if (a.extended) c.T = 4000;
    json cfg = {{"experiment", id}, {"t_begin", c.t_begin}, {"T", c.T}, {"stride", c.stride}, {"pairs", c.pairs},
                {"nx", c.ks.nx},    {"dt", c.ks.dt},        {"fit_x_max", c.fit_x_max}};
    write_manifest((fs::path(dir) / "manifest.json").string(), cfg.dump(), a.seed, a.command);
    KsStatsResult r = run_ks_statistics(c);
    std::vector<double> k;
    for (int i = 1; i <= r.E.size(); ++i) k.push_back(i);
    write_csv((fs::path(dir) / "spectrum.csv").string(), {"k", "E"}, {k, to_std(r.E)});
    write_csv((fs::path(dir) / "acf_spatial.csv").string(), {"x", "C"}, {to_std(r.acf.x), to_std(r.acf.C)});
    say(id, "peak k = " + std::to_string(r.peak) + ", lambda = " + fmt("%.4f", r.fit.lambda) + " (" + r.fit.form +
                " form), norm " + fmt("%.3f", r.norm.mean) + " +- " + fmt("%.3f", r.norm.std));
}

void cmd_reproduce(const ReproduceArgs& a) {
    static const std::vector<std::string> known = {"rb-pd",    "rb-chaos-m3", "rb-chaos-m5", "rb-chaos-m6",
                                                   "ks-a",     "ks-a-stats",  "ks-b-extended"};
    for (const auto& id : a.ids)
        if (std::find(known.begin(), known.end(), id) == known.end())
            throw Error(ErrorKind::Config, "unknown experiment '" + id + "'");
    parallel_for(static_cast<int>(a.ids.size()), a.jobs, [&](int i) {
        const std::string& id = a.ids[i];
        const std::string dir = output_path((fs::path(a.out_dir) / id).string());
        fs::create_directories(dir);
        if (id.rfind("rb-", 0) == 0)
            reproduce_rb(id, a, dir);
        else if (id == "ks-a-stats")
            reproduce_ks_stats(id, a, dir);
        else
            reproduce_ks(id, a, dir);
        say(id, "outputs in " + dir);
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal parameterizing-manifold closures for quadratic ODEs"};
    app.require_subcommand(1);

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Run a model and write its trajectory");
    sim->add_option("source", sa.source, "rb9d-pd, rb9d-chaos, ks-a, ks-b or a model file")->required();
    sim->add_option("--t-final", sa.t_final, "Integration length after spin-up");
    sim->add_option("--dt", sa.dt, "Time step");
    sim->add_option("--save-stride", sa.stride, "Store every k-th step")->check(CLI::PositiveNumber);
    sim->add_option("--spinup", sa.spinup, "Discarded initial time");
    sim->add_option("--r", sa.r, "Override the reduced Rayleigh number");
    sim->add_option("--pairs", sa.pairs, "KS: stored wavenumber pairs")->check(CLI::PositiveNumber);
    sim->add_option("--x0-from", sa.x0_from, "Start from the last sample of a trajectory");
    sim->add_option("--model-out", sa.model_out, "Also write the model file");
    sim->add_option("--out", sa.out, "Trajectory output (.bin or .csv)");

    DecomposeArgs da;
    auto* dec = app.add_subcommand("decompose", "Mean shift, eigenbasis and eigen-coordinate model");
    dec->add_option("model", da.source, "Preset or model file")->required();
    dec->add_option("--mean-from", da.mean_from, "Trajectory for the time mean");
    dec->add_option("--window", da.window, "t0,T of the averaging window");
    dec->add_option("--cutoff", da.cutoff, "Resolved dimension (KS: resolved pairs)")->required();
    dec->add_option("--pairs", da.pairs, "KS: total pairs (default 2 * cutoff)");
    dec->add_option("--r", da.r, "Override the reduced Rayleigh number");
    dec->add_option("--out-model", da.out_model, "Fluctuation model output");
    dec->add_option("--out-eigen", da.out_eigen, "Eigen-model output");

    OptimizeArgs oa;
    auto* opt = app.add_subcommand("optimize", "Fit tau per unresolved mode");
    opt->add_option("eigen-model", oa.eigen)->required();
    opt->add_option("traj", oa.traj)->required();
    opt->add_option("--family", oa.family, "lia, qsa or ktau");
    opt->add_option("--cost", oa.cost, "qn or jn");
    opt->add_option("--method", oa.method, "global (grid scan + Brent) or descent");
    opt->add_option("--window", oa.window, "t0,T of the training window");
    opt->add_flag("--discriminate", oa.discriminate, "Choose among local minima by correlation");
    opt->add_option("--tau-max", oa.tau_max, "Upper end of the tau domain (default 50/|Re beta|)");
    opt->add_option("--grid", oa.grid, "Grid points of the global scan")->check(CLI::Range(10, 10000000));
    opt->add_option("--smooth-width", oa.smooth, "Moving-average width for J_n")->check(CLI::PositiveNumber);
    opt->add_option("--jobs", oa.jobs, "Worker threads")->check(CLI::PositiveNumber);
    opt->add_option("--out", oa.out, "Parameterization file");
    opt->add_option("--table", oa.table, "tau* table (CSV)");

    ClosureArgs ca;
    auto* clo = app.add_subcommand("closure", "Integrate the reduced closure and reconstruct");
    clo->add_option("eigen-model", ca.eigen)->required();
    clo->add_option("param", ca.param)->required();
    clo->add_option("--x0-from", ca.x0_from, "Trajectory holding the initial state")->required();
    clo->add_option("--x0-index", ca.x0_index, "Sample index of the initial state");
    clo->add_option("--t-final", ca.t_final);
    clo->add_option("--dt", ca.dt);
    clo->add_option("--save-stride", ca.stride)->check(CLI::PositiveNumber);
    clo->add_option("--scheme", ca.scheme, "rk4 or semi-implicit");
    clo->add_option("--out-reduced", ca.out_reduced);
    clo->add_option("--out-full", ca.out_full);

    DiagnoseArgs ga;
    auto* dia = app.add_subcommand("diagnose", "Defects, correlation, spectra, ACF, PSD or heat flux");
    dia->add_option("traj", ga.traj)->required();
    dia->add_option("param", ga.param)->required();
    dia->add_option("--model", ga.eigen, "Eigen model (default: the one named in the parameterization file)");
    dia->add_option("--report", ga.report, "defects|correlation|spectrum|acf|psd|heatflux");
    dia->add_option("--window", ga.window, "t0,T");
    dia->add_option("--component", ga.component, "psd: 1-based component");
    dia->add_option("--segment", ga.segment, "psd: Welch segment length")->check(CLI::PositiveNumber);
    dia->add_option("--max-lag", ga.max_lag, "acf: lags")->check(CLI::PositiveNumber);
    dia->add_option("--length", ga.length, "acf: domain length");
    dia->add_option("--fit-x-max", ga.fit_x_max, "acf: fit range");
    dia->add_option("--heat-flux-data", ga.heat_flux_data, "heatflux: mode-shape product matrix");
    dia->add_option("--out-dir", ga.out_dir);

    ReproduceArgs ra;
    auto* rep = app.add_subcommand("reproduce", "Scripted end-to-end experiments");
    rep->add_option("experiment-id", ra.ids,
                    "rb-pd, rb-chaos-m3, rb-chaos-m5, rb-chaos-m6, ks-a, ks-a-stats, ks-b-extended")
        ->required();
    rep->add_flag("--extended", ra.extended, "Allow hours-scale runs; ks-a-stats uses T = 4000");
    rep->add_flag("--discriminate", ra.discriminate, "RB: choose among local minima by correlation");
    rep->add_option("--t0", ra.t0, "RB: training window offset after spin-up");
    rep->add_option("--train-T", ra.train_T, "RB: training window length");
    rep->add_option("--tau-max", ra.tau_max);
    rep->add_option("--grid", ra.grid)->check(CLI::Range(10, 10000000));
    rep->add_option("--smooth-width", ra.smooth)->check(CLI::PositiveNumber);
    rep->add_option("--jobs", ra.jobs, "Experiments run concurrently")->check(CLI::PositiveNumber);
    rep->add_option("--seed", ra.seed);
    rep->add_option("--out-dir", ra.out_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sim) cmd_simulate(sa);
        if (*dec) cmd_decompose(da);
        if (*opt) cmd_optimize(oa);
        if (*clo) cmd_closure(ca);
        if (*dia) cmd_diagnose(ga);
        if (*rep) {
            for (int i = 0; i < argc; ++i) ra.command += (i ? " " : "") + std::string(argv[i]);
            cmd_reproduce(ra);
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
