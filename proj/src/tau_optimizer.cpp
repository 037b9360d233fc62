#include "pmc/tau_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <boost/math/tools/minima.hpp>

namespace pmc {

ModeCost qn_cost_moments(const MomentSet& ms, const EigenModel& model, int n, bool normalized) {
    double scale = 1.0;
    if (normalized) {
        if (ms.unun < 1e-300) throw Error(ErrorKind::ZeroEnergy, "mode " + std::to_string(n + 1));
        scale = 1.0 / ms.unun;
    }
    auto own = std::make_shared<const MomentSet>(ms);
    ModeCost c;
    c.value = [own, &model, n, scale](double t) { return scale * qn_recast(*own, model, n, t); };
    c.derivative = [own, &model, n, scale](double t) { return scale * qn_derivative(*own, model, n, t); };
    return c;
}

namespace {

struct BalanceStats {
    double uu = 0.0;  // <|u_n|^2>
    cplx up = 0.0;    // <u_n conj(P_n)>
    double pp = 0.0;  // <|P_n|^2>
};

BalanceStats balance_stats(const Trajectory& traj, const EigenModel& model, int n) {
    const int m = model.cutoff;
    const int K = traj.count();
    RVec w = trapezoid_weights(K);
    BalanceStats s;
    for (int k = 0; k < K; ++k) {
        cplx P = model.forcing[n];
        for (const auto& t : model.terms[n])
            if (t.k < m && t.l < m) P += t.value * traj.samples(t.k, k) * traj.samples(t.l, k);
        cplx u = traj.samples(n, k);
        s.uu += w[k] * std::norm(u);
        s.up += w[k] * u * std::conj(P);
        s.pp += w[k] * std::norm(P);
    }
    if (s.uu < 1e-300) throw Error(ErrorKind::ZeroEnergy, "mode " + std::to_string(n + 1));
    return s;
}

}  // namespace

ModeCost balance_cost(const Trajectory& traj, const EigenModel& model, Family f, int n, bool jn) {
    if (f != Family::QSA && f != Family::KTAU) throw Error(ErrorKind::Config, "balance_cost needs qsa or ktau");
    BalanceStats s = balance_stats(traj, model, n);
    const cplx bn = model.beta[n];
    auto coef = [f, bn](double t) { return f == Family::QSA ? qsa_delta(bn, t) : ktau_coeff(bn, t); };
    auto coefp = [f, bn](double t) { return f == Family::QSA ? qsa_delta_prime(bn, t) : ktau_coeff_prime(bn, t); };
    ModeCost c;
    if (jn) {
        c.value = [s, coef](double t) { return std::abs(s.uu - std::norm(coef(t)) * s.pp) / s.uu; };
        return c;
    }
    c.value = [s, coef](double t) {
        cplx a = coef(t);
        return (s.uu - 2.0 * (std::conj(a) * s.up).real() + std::norm(a) * s.pp) / s.uu;
    };
    c.derivative = [s, coef, coefp](double t) {
        cplx a = coef(t), ap = coefp(t);
        return (-2.0 * (std::conj(ap) * s.up).real() + 2.0 * (std::conj(a) * ap).real() * s.pp) / s.uu;
    };
    return c;
}

ModeCost direct_cost(const Trajectory& traj, const EigenModel& model, Family f, int n, bool jn) {
    auto mode_param = [&model, f, n](double t) {
        Parameterization p = zero_build(model);
        p.family = f;
        ModeCoeffs mc;
        switch (f) {
            case Family::LIA: mc = lia_mode(model, n, t); break;
            case Family::QSA: mc = qsa_mode(model, n, t); break;
            case Family::KTAU: mc = ktau_mode(model, n, t); break;
            default: throw Error(ErrorKind::Config, "family has no tau parameter");
        }
        p.modes[n - model.cutoff] = mc;
        return p;
    };
    ModeCost c;
    if (jn)
        c.value = [&traj, mode_param, n](double t) { return defect_jn(traj, mode_param(t), n); };
    else
        c.value = [&traj, mode_param, n](double t) { return defect_qn(traj, mode_param(t), n, true); };
    auto v = c.value;
    if (!jn)
        c.derivative = [v](double t) {
            double h = 1e-6 * std::max(1.0, t);
            double lo = std::max(0.0, t - h);
            return (v(t + h) - v(lo)) / (t + h - lo);
        };
    return c;
}

ModeCost make_cost(const Trajectory& traj, const EigenModel& model, Family f, int n, bool jn, int max_moment_size) {
    if (f == Family::QSA || f == Family::KTAU) return balance_cost(traj, model, f, n, jn);
    if (f != Family::LIA) throw Error(ErrorKind::Config, "family has no tau parameter");
    const int m = model.cutoff;
    if (m * m > max_moment_size) return direct_cost(traj, model, f, n, jn);
    auto ms = std::make_shared<MomentSet>(moments(traj, n, m));
    if (ms->unun < 1e-300) throw Error(ErrorKind::ZeroEnergy, "mode " + std::to_string(n + 1));
    ModeCost c;
    const double scale = 1.0 / ms->unun;
    if (jn) {
        c.value = [ms, &model, n](double t) { return std::abs(ms->unun - lia_variance(*ms, model, n, t)) / ms->unun; };
        return c;
    }
    c.value = [ms, &model, n, scale](double t) { return scale * qn_recast(*ms, model, n, t); };
    c.derivative = [ms, &model, n, scale](double t) { return scale * qn_derivative(*ms, model, n, t); };
    return c;
}

namespace {

double sgn(double x) { return (x > 0) - (x < 0); }

}  // namespace

DescentResult minimize_qn_descent(const ModeCost& cost, const DescentOptions& opt) {
    if (!cost.derivative) throw Error(ErrorKind::Config, "descent requires a derivative");
    DescentResult r;
    double tau = std::clamp(opt.tau0, 0.0, opt.tau_max);
    double dtau = opt.dtau0;
    double dq = cost.derivative(tau);
    double q = cost.value(tau);
    while (std::abs(dq) > opt.eps) {
        if (r.iterations >= opt.max_iter) {
            r.max_iter_exceeded = true;
            break;
        }
        ++r.iterations;
        // boundary minima of the clamped domain
        if ((tau <= 0.0 && dq > 0) || (tau >= opt.tau_max && dq < 0)) {
            r.converged = true;
            break;
        }
        double tnew = std::clamp(tau - sgn(dq) * dtau, 0.0, opt.tau_max);
        double dqn = cost.derivative(tnew);
        double qn = cost.value(tnew);
        bool flip = sgn(dqn) != sgn(dq);
        if ((std::abs(dqn) > opt.eps && flip) || qn > q) {
            dtau *= 0.5;
        } else {
            tau = tnew;
            dq = dqn;
            q = qn;
        }
        if (dtau < 1e-15 * std::max(1.0, tau)) {
            r.converged = true;
            break;
        }
    }
    if (std::abs(dq) <= opt.eps) r.converged = true;
    r.tau = tau;
    r.value = q;
    return r;
}

namespace {

double brent_min(const std::function<double(double)>& f, double a, double b) {
    std::uintmax_t iters = 500;
    auto res = boost::math::tools::brent_find_minima(f, a, b, std::numeric_limits<double>::digits / 2, iters);
    return res.first;
}

}  // namespace

std::vector<Candidate> minimize_qn_global(const ModeCost& cost, double tau_max, int grid_points) {
    const int G = std::max(grid_points, 3);
    const double h = tau_max / (G - 1);
    std::vector<double> v(G);
    for (int i = 0; i < G; ++i) {
        v[i] = cost.value(h * i);
        if (!std::isfinite(v[i])) v[i] = std::numeric_limits<double>::infinity();
    }
    // Runs of grid values equal up to rounding are treated as one point, represented by their left end.
    auto same = [](double a, double b) { return std::abs(a - b) <= 1e-10 * std::max(std::abs(a), std::abs(b)); };
    std::vector<Candidate> out;
    for (int i = 0; i < G; ++i) {
        if (i > 0 && same(v[i], v[i - 1])) continue;
        int j = i;
        while (j + 1 < G && same(v[j + 1], v[i])) ++j;
        bool left = (i == 0) || v[i] < v[i - 1];
        bool right = (j == G - 1) || v[i] < v[j + 1];
        if (!(left && right) || !std::isfinite(v[i])) continue;
        double lo = std::max(0.0, h * (i - 1)), hi = std::min(tau_max, h * (i + 1));
        double t = h * i;
        if (i == 0 || i == G - 1) {
            // endpoint: refine inward only if the neighbouring cell holds a lower value
            double tb = brent_min(cost.value, lo, hi);
            if (cost.value(tb) < v[i]) t = tb;
        } else if (cost.derivative) {
            DescentOptions o;
            o.tau0 = t;
            o.dtau0 = 0.5 * h;
            o.tau_max = hi;
            auto d = minimize_qn_descent(cost, o);
            t = (d.tau >= lo && d.tau <= hi) ? d.tau : brent_min(cost.value, lo, hi);
        } else {
            t = brent_min(cost.value, lo, hi);
        }
        double val = cost.value(t);
        if (val > v[i]) {
            t = h * i;
            val = v[i];
        }
        bool dup = false;
        for (auto& c : out)
            if (std::abs(c.tau - t) < 0.5 * h) {
                dup = true;
                if (val < c.value) c = {t, val};
            }
        if (!dup) out.push_back({t, val});
    }
    std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
    return out;
}

double minimize_jn(const ModeCost& jcost, const JnOptions& opt) {
    const int G = std::max(opt.grid_points, 3);
    const double h = opt.tau_max / (G - 1);
    std::vector<double> v(G), s(G);
    for (int i = 0; i < G; ++i) {
        v[i] = jcost.value(h * i);
        if (!std::isfinite(v[i])) v[i] = std::numeric_limits<double>::infinity();
    }
    const int half = std::max(opt.smooth_width, 1) / 2;
    for (int i = 0; i < G; ++i) {
        int a = std::max(0, i - half), b = std::min(G - 1, i + half);
        double acc = 0;
        for (int j = a; j <= b; ++j) acc += v[j];
        s[i] = acc / (b - a + 1);
    }
    int best = 0;
    for (int i = 1; i < G; ++i)
        if (s[i] < s[best]) best = i;
    // raw minimum inside the smoothing support of the smoothed argmin
    int a = std::max(0, best - half), b = std::min(G - 1, best + half);
    int rb = a;
    for (int i = a; i <= b; ++i)
        if (v[i] < v[rb]) rb = i;
    if (v[rb] == v[0] && rb != 0) {
        bool flat = true;
        for (int i = 0; i <= rb; ++i) flat = flat && v[i] == v[0];
        if (flat) rb = 0;
    }
    double lo = std::max(0.0, h * (rb - 1)), hi = std::min(opt.tau_max, h * (rb + 1));
    double t = brent_min(jcost.value, lo, hi);
    return jcost.value(t) < v[rb] ? t : h * rb;
}

double default_tau_max(const EigenModel& model) {
    double r = std::abs(model.beta[model.cutoff].real());
    if (r < 1e-12) return 50.0;
    return 50.0 / r;
}

Selection discriminate_by_correlation(const Trajectory& traj, const EigenModel& model, Family f,
                                      const std::vector<std::vector<Candidate>>& candidates, int per_mode) {
    const int s = model.unresolved();
    if (static_cast<int>(candidates.size()) != s) throw Error(ErrorKind::Config, "one candidate list per unresolved mode");
    std::vector<int> sizes(s);
    for (int r = 0; r < s; ++r) {
        sizes[r] = std::min<int>(per_mode, static_cast<int>(candidates[r].size()));
        if (sizes[r] == 0) throw Error(ErrorKind::Config, "empty candidate list");
    }
    std::vector<int> idx(s, 0);
    Selection best;
    double best_q = std::numeric_limits<double>::infinity();
    double best_c = -std::numeric_limits<double>::infinity();
    while (true) {
        std::vector<double> taus(s);
        double qsum = 0;
        for (int r = 0; r < s; ++r) {
            taus[r] = candidates[r][idx[r]].tau;
            qsum += candidates[r][idx[r]].value;
        }
        auto p = family_build(f, model, taus);
        auto cs = correlation(traj, p, model.basis.has_vectors() ? &model.basis : nullptr);
        double mc = -1.0;
        if (!cs.c.empty()) {
            mc = 0;
            for (double c : cs.c) mc += c;
            mc /= cs.c.size();
        }
        bool better = mc > best_c + 1e-12 || (std::abs(mc - best_c) <= 1e-12 && qsum < best_q);
        if (better) {
            best_c = mc;
            best_q = qsum;
            best.taus = taus;
            best.mean_correlation = mc;
        }
        int r = 0;
        while (r < s && ++idx[r] == sizes[r]) idx[r++] = 0;
        if (r == s) break;
    }
    return best;
}

}  // namespace pmc
