#include "pmc/quad_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace pmc {

const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::NonDiagonalizable: return "NonDiagonalizable";
        case ErrorKind::CutoffSplitsPair: return "CutoffSplitsPair";
        case ErrorKind::BasisMismatch: return "BasisMismatch";
        case ErrorKind::SingularResolvent: return "SingularResolvent";
        case ErrorKind::ResonanceViolation: return "ResonanceViolation";
        case ErrorKind::ZeroEnergy: return "ZeroEnergy";
        case ErrorKind::NonFinite: return "NonFinite";
        case ErrorKind::MaxIterExceeded: return "MaxIterExceeded";
        case ErrorKind::MissingFieldShapes: return "MissingFieldShapes";
        case ErrorKind::Config: return "ConfigError";
        case ErrorKind::MissingInput: return "MissingInput";
        case ErrorKind::Format: return "FormatError";
    }
    return "Error";
}

QuadraticModel::QuadraticModel(int n)
    : dim(n), linear(CMat::Zero(n, n)), forcing(CVec::Zero(n)) {}

CVec QuadraticModel::B(const CVec& u, const CVec& v) const {
    CVec out = CVec::Zero(dim);
    for (const auto& e : bilinear) out[e.k] += e.value * u[e.i] * v[e.j];
    return out;
}

CVec QuadraticModel::C(const CVec& u, const CVec& v, const CVec& w) const {
    CVec out = CVec::Zero(dim);
    for (const auto& e : cubic) out[e.k] += e.value * u[e.i] * v[e.j] * w[e.l];
    return out;
}

CVec QuadraticModel::rhs(const CVec& y) const {
    CVec out = linear * y + B(y, y) + forcing;
    if (!cubic.empty()) out += C(y, y, y);
    return out;
}

bool QuadraticModel::is_real() const {
    if (linear.imag().cwiseAbs().maxCoeff() > 0) return false;
    if (forcing.size() && forcing.imag().cwiseAbs().maxCoeff() > 0) return false;
    for (const auto& e : bilinear)
        if (e.value.imag() != 0.0) return false;
    for (const auto& e : cubic)
        if (e.value.imag() != 0.0) return false;
    return true;
}

void QuadraticModel::validate() const {
    if (dim <= 0) throw Error(ErrorKind::Config, "dimension must be positive");
    if (linear.rows() != dim || linear.cols() != dim)
        throw Error(ErrorKind::Config, "linear matrix shape does not match dimension");
    if (forcing.size() != dim) throw Error(ErrorKind::Config, "forcing length does not match dimension");
    auto in = [&](int x) { return x >= 0 && x < dim; };
    for (const auto& e : bilinear)
        if (!in(e.i) || !in(e.j) || !in(e.k))
            throw Error(ErrorKind::Config, "bilinear index out of range");
    for (const auto& e : cubic)
        if (!in(e.i) || !in(e.j) || !in(e.l) || !in(e.k))
            throw Error(ErrorKind::Config, "cubic index out of range");
}

double SpectralBasis::biorthogonality_error() const {
    CMat g = dual.adjoint() * right;
    return (g - CMat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

std::vector<int> lexicographic_order(const CVec& ev) {
    std::vector<int> idx(ev.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (ev[a].real() != ev[b].real()) return ev[a].real() > ev[b].real();
        return ev[a].imag() > ev[b].imag();
    });
    return idx;
}

namespace {

// Phase fix: largest-modulus component real and positive.
void normalize_column(CVec& v) {
    v.normalize();
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    cplx ph = v[imax] / std::abs(v[imax]);
    v /= ph;
}

// Real matrices: tie-break of the sort can separate values that are conjugate
// only to rounding; re-pair them so conjugates sit next to each other.
void snap_conjugates(CVec& ev, double tol) {
    const int n = static_cast<int>(ev.size());
    for (int j = 0; j < n; ++j) {
        if (std::abs(ev[j].imag()) <= tol * (1.0 + std::abs(ev[j]))) ev[j] = ev[j].real();
    }
}

}  // namespace

SpectralBasis decompose(const QuadraticModel& model, int cutoff, const DecomposeOptions& opt) {
    const int n = model.dim;
    if (cutoff < 1 || cutoff >= n) throw Error(ErrorKind::Config, "cutoff must satisfy 1 <= m < N");
    const bool real = model.linear.imag().cwiseAbs().maxCoeff() == 0.0;

    CVec ev;
    CMat vecs;
    if (real) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(model.linear.real());
        if (es.info() != Eigen::Success) throw Error(ErrorKind::NonDiagonalizable, "eigensolver failed");
        ev = es.eigenvalues();
        vecs = es.eigenvectors();
    } else {
        Eigen::ComplexEigenSolver<CMat> es(model.linear);
        if (es.info() != Eigen::Success) throw Error(ErrorKind::NonDiagonalizable, "eigensolver failed");
        ev = es.eigenvalues();
        vecs = es.eigenvectors();
    }
    if (real) snap_conjugates(ev, 1e-14);

    auto order = lexicographic_order(ev);
    SpectralBasis b;
    b.cutoff = cutoff;
    b.eigenvalues.resize(n);
    b.right.resize(n, n);
    for (int j = 0; j < n; ++j) {
        b.eigenvalues[j] = ev[order[j]];
        CVec v = vecs.col(order[j]);
        normalize_column(v);
        if (real && b.eigenvalues[j].imag() == 0.0) v = v.real().cast<cplx>().normalized();
        b.right.col(j) = v;
    }
    if (real) {
        // conjugate pair members: e_{j+1} = conj(e_j)
        for (int j = 0; j + 1 < n; ++j) {
            if (b.eigenvalues[j].imag() > 0 &&
                std::abs(b.eigenvalues[j + 1] - std::conj(b.eigenvalues[j])) <= 1e-10 * (1 + std::abs(b.eigenvalues[j]))) {
                b.eigenvalues[j + 1] = std::conj(b.eigenvalues[j]);
                b.right.col(j + 1) = b.right.col(j).conjugate();
                ++j;
            }
        }
    }

    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(b.eigenvalues[i] - b.eigenvalues[j]) <= opt.degeneracy_tol * (1 + std::abs(b.eigenvalues[i])))
                throw Error(ErrorKind::NonDiagonalizable, "repeated eigenvalue");

    Eigen::JacobiSVD<CMat> svd(b.right);
    const auto& s = svd.singularValues();
    double cond = s[0] / s[s.size() - 1];
    if (!std::isfinite(cond) || cond > opt.condition_bound)
        throw Error(ErrorKind::NonDiagonalizable, "eigenvector condition number " + std::to_string(cond));

    // dual basis: rows of V^{-1} are conj(e_j*)
    CMat inv = b.right.partialPivLu().inverse();
    b.dual = inv.adjoint();

    const cplx bm = b.eigenvalues[cutoff - 1], bm1 = b.eigenvalues[cutoff];
    if (bm.real() == bm1.real() && bm.imag() != 0.0 && std::abs(bm1 - std::conj(bm)) <= 1e-10 * (1 + std::abs(bm)))
        throw Error(ErrorKind::CutoffSplitsPair, "modes " + std::to_string(cutoff) + " and " + std::to_string(cutoff + 1));
    return b;
}

cplx project(const SpectralBasis& basis, const CVec& x, int n) {
    if (n < 0 || n >= basis.dim()) throw Error(ErrorKind::Config, "mode index out of range");
    return inner(x, basis.dual.col(n));
}

QuadraticModel fluctuation_model(const QuadraticModel& model, const CVec& mean) {
    QuadraticModel out = model;
    const int n = model.dim;
    for (const auto& e : model.bilinear) {
        // B(mean, D) and B(D, mean) enter the linear part
        out.linear(e.k, e.j) += e.value * mean[e.i];
        out.linear(e.k, e.i) += e.value * mean[e.j];
    }
    for (const auto& e : model.cubic) {
        out.linear(e.k, e.l) += e.value * mean[e.i] * mean[e.j];
        out.linear(e.k, e.j) += e.value * mean[e.i] * mean[e.l];
        out.linear(e.k, e.i) += e.value * mean[e.j] * mean[e.l];
        out.bilinear.push_back({e.j, e.l, e.k, e.value * mean[e.i]});
        out.bilinear.push_back({e.i, e.l, e.k, e.value * mean[e.j]});
        out.bilinear.push_back({e.i, e.j, e.k, e.value * mean[e.l]});
    }
    out.forcing = model.forcing + model.linear * mean + model.B(mean, mean);
    if (!model.cubic.empty()) out.forcing += model.C(mean, mean, mean);
    (void)n;
    return out;
}

CVec EigenModel::B(const CVec& x, const CVec& y) const {
    CVec out = CVec::Zero(dim);
    for (int n = 0; n < dim; ++n) {
        cplx s = 0;
        for (const auto& t : terms[n]) s += t.value * x[t.k] * y[t.l];
        out[n] = s;
    }
    return out;
}

bool EigenModel::has_cubic() const {
    for (const auto& c : cubic_terms)
        if (!c.empty()) return true;
    return false;
}

CVec EigenModel::rhs(const CVec& y) const {
    CVec out = beta.cwiseProduct(y) + B(y, y) + forcing;
    if (has_cubic()) {
        for (int n = 0; n < dim; ++n)
            for (const auto& t : cubic_terms[n]) out[n] += t.value * y[t.i] * y[t.j] * y[t.l];
    }
    return out;
}

EigenModel to_eigen_model(const QuadraticModel& model, const SpectralBasis& basis, double drop_tol) {
    const int n = model.dim;
    if (basis.dim() != n || basis.right.rows() != n)
        throw Error(ErrorKind::BasisMismatch, "basis dimension differs from model dimension");
    CMat diag = basis.dual.adjoint() * model.linear * basis.right;
    CMat off = diag;
    off.diagonal().setZero();
    double scale = 1.0 + model.linear.cwiseAbs().maxCoeff();
    if (off.cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw Error(ErrorKind::BasisMismatch, "basis does not diagonalize the linear part");

    EigenModel em;
    em.dim = n;
    em.cutoff = basis.cutoff;
    em.beta = basis.eigenvalues;
    em.basis = basis;
    em.forcing = basis.to_eigen(model.forcing);
    em.terms.assign(n, {});
    em.cubic_terms.assign(n, {});

    // B~^n_{kl} = <B(e_k, e_l), e_n*> = sum over entries of value * e_k[i] e_l[j] conj(e_n*[k_out])
    const CMat& E = basis.right;
    CMat Dc = basis.dual.conjugate();
    std::vector<CMat> slab(n, CMat::Zero(n, n));  // slab[n](k,l)
    for (const auto& e : model.bilinear) {
        for (int k = 0; k < n; ++k) {
            cplx ek = E(e.i, k);
            if (ek == 0.0) continue;
            for (int l = 0; l < n; ++l) {
                cplx el = E(e.j, l);
                if (el == 0.0) continue;
                cplx w = e.value * ek * el;
                for (int o = 0; o < n; ++o) slab[o](k, l) += w * Dc(e.k, o);
            }
        }
    }
    for (int o = 0; o < n; ++o)
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
                if (std::abs(slab[o](k, l)) > drop_tol) em.terms[o].push_back({k, l, slab[o](k, l)});

    if (!model.cubic.empty()) {
        for (int o = 0; o < n; ++o)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int l = 0; l < n; ++l) {
                        cplx s = 0;
                        for (const auto& e : model.cubic) s += e.value * E(e.i, i) * E(e.j, j) * E(e.l, l) * Dc(e.k, o);
                        if (std::abs(s) > drop_tol) em.cubic_terms[o].push_back({i, j, l, s});
                    }
    }
    return em;
}

CMat jacobian(const QuadraticModel& model, const CVec& y) {
    CMat J = model.linear;
    for (const auto& e : model.bilinear) {
        J(e.k, e.i) += e.value * y[e.j];
        J(e.k, e.j) += e.value * y[e.i];
    }
    for (const auto& e : model.cubic) {
        J(e.k, e.i) += e.value * y[e.j] * y[e.l];
        J(e.k, e.j) += e.value * y[e.i] * y[e.l];
        J(e.k, e.l) += e.value * y[e.i] * y[e.j];
    }
    return J;
}

CVec find_fixed_point(const QuadraticModel& model, const CVec& y0, double tol, int max_iter) {
    CVec y = y0;
    for (int it = 0; it < max_iter; ++it) {
        CVec f = model.rhs(y);
        if (f.norm() < tol) return y;
        CVec step = jacobian(model, y).partialPivLu().solve(f);
        y -= step;
        if (!y.allFinite()) break;
    }
    if (model.rhs(y).norm() < std::sqrt(tol)) return y;
    throw Error(ErrorKind::NonFinite, "fixed-point Newton iteration did not converge");
}

}  // namespace pmc
