#include "pmc/parameterization.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace pmc {

const char* family_name(Family f) {
    switch (f) {
        case Family::LIA: return "lia";
        case Family::QSA: return "qsa";
        case Family::KTAU: return "ktau";
        case Family::IM2: return "im2";
        case Family::IM3: return "im3";
        case Family::ZERO: return "zero";
    }
    return "zero";
}

Family parse_family(const std::string& s) {
    if (s == "lia") return Family::LIA;
    if (s == "qsa") return Family::QSA;
    if (s == "ktau") return Family::KTAU;
    if (s == "im2") return Family::IM2;
    if (s == "im3") return Family::IM3;
    if (s == "zero") return Family::ZERO;
    throw Error(ErrorKind::Config, "unknown family '" + s + "'");
}

cplx ModeCoeffs::eval(const CVec& xi) const {
    cplx s = constant;
    for (const auto& [i, c] : linear) s += c * xi[i];
    for (const auto& t : quadratic) s += t.value * xi[t.k] * xi[t.l];
    for (const auto& t : cubic) s += t.value * xi[t.i] * xi[t.j] * xi[t.l];
    return s;
}

CVec Parameterization::eval(const CVec& xi) const {
    CVec out(unresolved());
    for (int r = 0; r < unresolved(); ++r) out[r] = modes[r].eval(xi);
    return out;
}

cplx Parameterization::eval_mode(int n, const CVec& xi) const { return modes[n - cutoff].eval(xi); }

CVec Parameterization::lift(const CVec& xi) const {
    CVec y(dim);
    y.head(cutoff) = xi;
    y.tail(unresolved()) = eval(xi);
    return y;
}

cplx exp_moment(int k, cplx z) {
    if (z == 0.0) return 1.0 / (k + 1);
    const double az = std::abs(z);
    if (az > k + 1.0) {
        cplx ez = std::exp(-z);
        cplx j = (1.0 - ez) / z;
        for (int q = 1; q <= k; ++q) j = (double(q) * j - ez) / z;
        return j;
    }
    cplx sum = 0.0;
    if (z.real() >= 0) {
        cplx term = 1.0 / (k + 1.0);
        for (int p = 0; p < 400; ++p) {
            sum += term;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
            term *= z / (k + p + 2.0);
        }
        return std::exp(-z) * sum;
    }
    cplx pw = 1.0;
    double fact = 1.0;
    for (int p = 0; p < 400; ++p) {
        cplx term = pw / (fact * (k + p + 1.0));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        pw *= -z;
        fact *= (p + 1.0);
    }
    return sum;
}

cplx exp_integral(int k, cplx a, double tau) {
    if (tau == 0.0) return 0.0;
    double sign = (k % 2 == 0) ? 1.0 : -1.0;
    return sign * std::pow(tau, k + 1) * exp_moment(k, a * tau);
}

namespace {

// sum_t c_t s^{k_t} exp(a_t s)
struct ExpTerm {
    cplx c;
    int k;
    cplx a;
};
using ExpPoly = std::vector<ExpTerm>;

// gamma(s) = (exp(beta s) - 1)/beta on s in [-tau, 0]
ExpPoly gamma_poly(cplx beta, double tau) {
    ExpPoly p;
    if (std::abs(beta) * tau < 1e-3) {
        cplx c = 1.0;
        for (int q = 0; q < 6; ++q) {
            c /= (q + 1.0);
            p.push_back({c, q + 1, 0.0});
            c *= beta;
        }
    } else {
        p.push_back({1.0 / beta, 0, beta});
        p.push_back({-1.0 / beta, 0, 0.0});
    }
    return p;
}

ExpPoly mul(const ExpPoly& x, const ExpPoly& y) {
    ExpPoly out;
    out.reserve(x.size() * y.size());
    for (const auto& a : x)
        for (const auto& b : y) out.push_back({a.c * b.c, a.k + b.k, a.a + b.a});
    return out;
}

ExpPoly scale_rate(ExpPoly p, cplx rate) {
    for (auto& t : p) t.a += rate;
    return p;
}

cplx integrate(const ExpPoly& p, double tau) {
    cplx s = 0.0;
    for (const auto& t : p) s += t.c * exp_integral(t.k, t.a, tau);
    return s;
}

cplx at_minus_tau(const ExpPoly& p, double tau) {
    cplx s = 0.0;
    for (const auto& t : p) s += t.c * std::pow(-tau, t.k) * std::exp(-t.a * tau);
    return s;
}

ExpPoly exp_only(cplx a) { return {{1.0, 0, a}}; }

// Pieces of the forward integral y_n(0) = int_{-tau}^0 e^{-beta_n s} [B(y_c, y_c) + F_n] ds
ExpPoly kernel_D(cplx bi, cplx bj, cplx bn) { return exp_only(bi + bj - bn); }
ExpPoly kernel_V(cplx bi, cplx bj, cplx bn, double tau) { return scale_rate(gamma_poly(bj, tau), bi - bn); }
ExpPoly kernel_U(cplx bi, cplx bj, cplx bn, double tau) {
    return scale_rate(mul(gamma_poly(bi, tau), gamma_poly(bj, tau)), -bn);
}

}  // namespace

cplx lia_coeff_D(cplx bi, cplx bj, cplx bn, double tau) { return exp_integral(0, bi + bj - bn, tau); }
cplx lia_coeff_U(cplx bi, cplx bj, cplx bn, double tau) { return integrate(kernel_U(bi, bj, bn, tau), tau); }
cplx lia_coeff_V(cplx bi, cplx bj, cplx bn, double tau) { return integrate(kernel_V(bi, bj, bn, tau), tau); }
cplx forcing_coeff(cplx bn, double tau) { return exp_integral(0, -bn, tau); }

cplx qsa_delta(cplx bn, double tau) { return exp_integral(0, -bn, tau); }
cplx qsa_delta_prime(cplx bn, double tau) { return std::exp(bn * tau); }

cplx ktau_coeff(cplx bn, double tau) {
    cplx den = 1.0 - bn * tau;
    if (std::abs(den) < 1e-14) throw Error(ErrorKind::SingularResolvent, "1 - beta_n tau = 0");
    return tau / den;
}
cplx ktau_coeff_prime(cplx bn, double tau) {
    cplx den = 1.0 - bn * tau;
    if (std::abs(den) < 1e-14) throw Error(ErrorKind::SingularResolvent, "1 - beta_n tau = 0");
    return 1.0 / (den * den);
}

LiaVectors lia_vectors(const EigenModel& model, int n, double tau, bool with_derivative) {
    const int m = model.cutoff;
    const auto& b = model.beta;
    const cplx bn = b[n];
    LiaVectors v;
    v.d = CVec::Zero(m * m);
    v.gamma = CVec::Zero(m * m);
    if (with_derivative) {
        v.d_prime = CVec::Zero(m * m);
        v.gamma_prime = CVec::Zero(m * m);
    }
    const CVec& F = model.forcing;
    bool forced = F.head(m).cwiseAbs().maxCoeff() > 0.0;

    for (const auto& t : model.terms[n]) {
        if (t.k >= m || t.l >= m) continue;
        const int p = t.k * m + t.l;
        auto kd = kernel_D(b[t.k], b[t.l], bn);
        v.d[p] += integrate(kd, tau) * t.value;
        if (with_derivative) v.d_prime[p] += at_minus_tau(kd, tau) * t.value;
        if (!forced) continue;
        // xi_k F_l and xi_l F_k pieces of B(xi, gamma F) + B(gamma F, xi)
        {
            auto kv = kernel_V(b[t.k], b[t.l], bn, tau);
            cplx w = t.value * F[t.l];
            v.gamma[p] += integrate(kv, tau) * w;
            if (with_derivative) v.gamma_prime[p] += at_minus_tau(kv, tau) * w;
        }
        {
            const int q = t.l * m + t.k;
            auto kv = kernel_V(b[t.l], b[t.k], bn, tau);
            cplx w = t.value * F[t.k];
            v.gamma[q] += integrate(kv, tau) * w;
            if (with_derivative) v.gamma_prime[q] += at_minus_tau(kv, tau) * w;
        }
        auto ku = kernel_U(b[t.k], b[t.l], bn, tau);
        cplx w = t.value * F[t.k] * F[t.l];
        v.alpha += integrate(ku, tau) * w;
        if (with_derivative) v.alpha_prime += at_minus_tau(ku, tau) * w;
    }
    v.alpha += forcing_coeff(bn, tau) * F[n];
    if (with_derivative) v.alpha_prime += std::exp(bn * tau) * F[n];
    return v;
}

ModeCoeffs lia_mode(const EigenModel& model, int n, double tau) {
    const int m = model.cutoff;
    const auto& b = model.beta;
    const cplx bn = b[n];
    const CVec& F = model.forcing;
    ModeCoeffs mc;
    mc.mode = n;
    if (tau == 0.0) return mc;
    std::vector<cplx> lin(m, 0.0);
    for (const auto& t : model.terms[n]) {
        if (t.k >= m || t.l >= m) continue;
        mc.quadratic.push_back({t.k, t.l, lia_coeff_D(b[t.k], b[t.l], bn, tau) * t.value});
        if (F[t.l] != 0.0) lin[t.k] += lia_coeff_V(b[t.k], b[t.l], bn, tau) * t.value * F[t.l];
        if (F[t.k] != 0.0) lin[t.l] += lia_coeff_V(b[t.l], b[t.k], bn, tau) * t.value * F[t.k];
        if (F[t.k] != 0.0 && F[t.l] != 0.0)
            mc.constant += lia_coeff_U(b[t.k], b[t.l], bn, tau) * t.value * F[t.k] * F[t.l];
    }
    mc.constant += forcing_coeff(bn, tau) * F[n];
    for (int i = 0; i < m; ++i)
        if (lin[i] != 0.0) mc.linear.push_back({i, lin[i]});
    return mc;
}

namespace {

ModeCoeffs scaled_balance(const EigenModel& model, int n, cplx c) {
    const int m = model.cutoff;
    ModeCoeffs mc;
    mc.mode = n;
    if (c == 0.0) return mc;
    for (const auto& t : model.terms[n])
        if (t.k < m && t.l < m) mc.quadratic.push_back({t.k, t.l, c * t.value});
    mc.constant = c * model.forcing[n];
    return mc;
}

std::vector<double> padded(const EigenModel& model, const std::vector<double>& taus) {
    std::vector<double> t(model.unresolved(), 0.0);
    for (size_t r = 0; r < taus.size() && r < t.size(); ++r) t[r] = taus[r];
    for (double x : t)
        if (!(x >= 0.0)) throw Error(ErrorKind::Config, "tau must be nonnegative");
    return t;
}

Parameterization shell(const EigenModel& model, Family f) {
    Parameterization p;
    p.family = f;
    p.dim = model.dim;
    p.cutoff = model.cutoff;
    return p;
}

}  // namespace

ModeCoeffs qsa_mode(const EigenModel& model, int n, double tau) {
    return scaled_balance(model, n, qsa_delta(model.beta[n], tau));
}
ModeCoeffs ktau_mode(const EigenModel& model, int n, double tau) {
    return scaled_balance(model, n, ktau_coeff(model.beta[n], tau));
}

Parameterization lia_build(const EigenModel& model, const std::vector<double>& taus) {
    auto p = shell(model, Family::LIA);
    p.taus = padded(model, taus);
    for (int r = 0; r < model.unresolved(); ++r) p.modes.push_back(lia_mode(model, model.cutoff + r, p.taus[r]));
    return p;
}

Parameterization qsa_build(const EigenModel& model, const std::vector<double>& taus) {
    auto p = shell(model, Family::QSA);
    p.taus = padded(model, taus);
    for (int r = 0; r < model.unresolved(); ++r) p.modes.push_back(qsa_mode(model, model.cutoff + r, p.taus[r]));
    return p;
}

Parameterization ktau_build(const EigenModel& model, const std::vector<double>& taus) {
    auto p = shell(model, Family::KTAU);
    p.taus = padded(model, taus);
    for (int r = 0; r < model.unresolved(); ++r) p.modes.push_back(ktau_mode(model, model.cutoff + r, p.taus[r]));
    return p;
}

Parameterization zero_build(const EigenModel& model) {
    auto p = shell(model, Family::ZERO);
    p.taus.assign(model.unresolved(), 0.0);
    for (int r = 0; r < model.unresolved(); ++r) {
        ModeCoeffs mc;
        mc.mode = model.cutoff + r;
        p.modes.push_back(mc);
    }
    return p;
}

Parameterization qsa_limit_build(const EigenModel& model) {
    auto p = shell(model, Family::QSA);
    p.taus.assign(model.unresolved(), std::numeric_limits<double>::infinity());
    for (int r = 0; r < model.unresolved(); ++r) {
        const int n = model.cutoff + r;
        if (model.beta[n] == 0.0) throw Error(ErrorKind::SingularResolvent, "zero eigenvalue in the unresolved block");
        p.modes.push_back(scaled_balance(model, n, -1.0 / model.beta[n]));
    }
    return p;
}

Parameterization family_build(Family f, const EigenModel& model, const std::vector<double>& taus) {
    switch (f) {
        case Family::LIA: return lia_build(model, taus);
        case Family::QSA: return qsa_build(model, taus);
        case Family::KTAU: return ktau_build(model, taus);
        case Family::IM2: return im_build(model, 2);
        case Family::IM3: return im_build(model, 3);
        case Family::ZERO: return zero_build(model);
    }
    return zero_build(model);
}

Parameterization im_build(const EigenModel& model, int order, const ResonanceOptions& opt) {
    if (order != 2 && order != 3) throw Error(ErrorKind::Config, "invariant-manifold order must be 2 or 3");
    const int m = model.cutoff;
    const auto& b = model.beta;
    auto p = shell(model, order == 2 ? Family::IM2 : Family::IM3);
    p.taus.assign(model.unresolved(), 0.0);
    std::ostringstream bad;
    int nbad = 0;
    for (int r = 0; r < model.unresolved(); ++r) {
        const int n = m + r;
        ModeCoeffs mc;
        mc.mode = n;
        for (const auto& t : model.terms[n]) {
            if (t.k >= m || t.l >= m || t.value == 0.0) continue;
            cplx den = b[t.k] + b[t.l] - b[n];
            if (std::abs(den) <= opt.tol) {
                if (nbad++ < 20) bad << " (" << t.k + 1 << "," << t.l + 1 << ";" << n + 1 << ")";
                continue;
            }
            mc.quadratic.push_back({t.k, t.l, t.value / den});
        }
        if (order == 3 && !model.cubic_terms.empty()) {
            for (const auto& t : model.cubic_terms[n]) {
                if (t.i >= m || t.j >= m || t.l >= m || t.value == 0.0) continue;
                cplx den = b[t.i] + b[t.j] + b[t.l] - b[n];
                if (std::abs(den) <= opt.tol) {
                    if (nbad++ < 20) bad << " (" << t.i + 1 << "," << t.j + 1 << "," << t.l + 1 << ";" << n + 1 << ")";
                    continue;
                }
                mc.cubic.push_back({t.i, t.j, t.l, t.value / den});
            }
        }
        p.modes.push_back(mc);
    }
    if (nbad) throw Error(ErrorKind::ResonanceViolation, std::to_string(nbad) + " resonant tuples:" + bad.str());
    return p;
}

cplx bf_oracle(const EigenModel& model, int n, double tau, const CVec& xi, int steps) {
    if (steps < 100) throw Error(ErrorKind::Config, "bf_oracle needs at least 100 steps");
    if (tau == 0.0) return 0.0;
    const int m = model.cutoff;
    const CVec& F = model.forcing;
    const cplx bn = model.beta[n];
    auto low = [&](double s) {
        CVec y(m);
        for (int j = 0; j < m; ++j) {
            cplx bj = model.beta[j];
            cplx g = (std::abs(bj * s) < 1e-8) ? cplx(s) * (1.0 + bj * s / 2.0) : (std::exp(bj * s) - 1.0) / bj;
            y[j] = std::exp(bj * s) * xi[j] + g * F[j];
        }
        return y;
    };
    auto src = [&](double s) {
        CVec y = low(s);
        cplx acc = F[n];
        for (const auto& t : model.terms[n])
            if (t.k < m && t.l < m) acc += t.value * y[t.k] * y[t.l];
        return acc;
    };
    const double h = tau / steps;
    cplx y = 0.0;
    double s = -tau;
    for (int q = 0; q < steps; ++q) {
        cplx s0 = src(s), s1 = src(s + 0.5 * h), s2 = src(s + h);
        cplx k1 = bn * y + s0;
        cplx k2 = bn * (y + 0.5 * h * k1) + s1;
        cplx k3 = bn * (y + 0.5 * h * k2) + s1;
        cplx k4 = bn * (y + h * k3) + s2;
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s += h;
    }
    return y;
}

}  // namespace pmc
