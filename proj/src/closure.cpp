#include "pmc/closure.hpp"

#include <cmath>

namespace pmc {

ClosureField::ClosureField(const EigenModel& model, const Parameterization& param)
    : model_(model), param_(param), m_(model.cutoff) {
    if (param.cutoff != model.cutoff || param.dim != model.dim)
        throw Error(ErrorKind::Config, "parameterization cutoff differs from model cutoff");
    beta_c_ = model.beta.head(m_);
}

CVec ClosureField::nonlinear(const CVec& x) const {
    CVec y = param_.lift(x);
    CVec out(m_);
    for (int j = 0; j < m_; ++j) {
        cplx s = model_.forcing[j];
        for (const auto& t : model_.terms[j]) s += t.value * y[t.k] * y[t.l];
        if (!model_.cubic_terms.empty())
            for (const auto& t : model_.cubic_terms[j]) s += t.value * y[t.i] * y[t.j] * y[t.l];
        out[j] = s;
    }
    return out;
}

CVec ClosureField::rhs(const CVec& x) const { return beta_c_.cwiseProduct(x) + nonlinear(x); }

namespace {

struct Recorder {
    const IntegrateOptions& opt;
    std::vector<CVec> kept;

    void save(long step, const CVec& x) {
        if (step % opt.save_stride != 0) return;
        double t = opt.t0 + opt.dt * step;
        if (opt.observer) opt.observer(t, x);
        if (opt.store) kept.push_back(x);
    }
    Trajectory finish(int dim) const {
        Trajectory tr;
        tr.dt = opt.dt * opt.save_stride;
        tr.t0 = opt.t0;
        tr.samples.resize(dim, static_cast<Eigen::Index>(kept.size()));
        for (size_t k = 0; k < kept.size(); ++k) tr.samples.col(k) = kept[k];
        return tr;
    }
};

bool bad(const CVec& x, double limit) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i].real()) || !std::isfinite(x[i].imag()) || std::abs(x[i]) > limit) return true;
    return false;
}

}  // namespace

IntegrationResult integrate_rk4(const VectorField& f, const CVec& x0, const IntegrateOptions& opt) {
    Recorder rec{opt, {}};
    IntegrationResult res;
    CVec x = x0;
    const double h = opt.dt;
    rec.save(0, x);
    for (long s = 1; s <= opt.steps; ++s) {
        CVec k1 = f(x);
        CVec k2 = f(x + 0.5 * h * k1);
        CVec k3 = f(x + 0.5 * h * k2);
        CVec k4 = f(x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (bad(x, opt.blowup)) {
            res.blew_up = true;
            res.fail_step = s;
            break;
        }
        rec.save(s, x);
    }
    res.traj = rec.finish(static_cast<int>(x0.size()));
    return res;
}

IntegrationResult integrate_semi_implicit(const CVec& L, const VectorField& nonlinear, const CVec& x0,
                                          const IntegrateOptions& opt) {
    Recorder rec{opt, {}};
    IntegrationResult res;
    CVec x = x0;
    const double h = opt.dt;
    CVec inv = (CVec::Ones(L.size()) - h * L).cwiseInverse();
    rec.save(0, x);
    for (long s = 1; s <= opt.steps; ++s) {
        x = inv.cwiseProduct(x + h * nonlinear(x));
        if (bad(x, opt.blowup)) {
            res.blew_up = true;
            res.fail_step = s;
            break;
        }
        rec.save(s, x);
    }
    res.traj = rec.finish(static_cast<int>(x0.size()));
    return res;
}

Trajectory reconstruct(const Parameterization& param, const Trajectory& reduced, const SpectralBasis* basis,
                       const CVec* mean) {
    Trajectory out;
    out.dt = reduced.dt;
    out.t0 = reduced.t0;
    const bool phys = basis && basis->has_vectors();
    out.samples.resize(param.dim, reduced.count());
    for (int k = 0; k < reduced.count(); ++k) {
        CVec y = param.lift(reduced.samples.col(k));
        if (phys) y = basis->to_physical(y);
        if (mean) y += *mean;
        out.samples.col(k) = y;
    }
    return out;
}

}  // namespace pmc
