#pragma once

#include <vector>

#include "pmc/types.hpp"

namespace pmc {

// k-th output of B(u,v) accumulates value * u_i * v_j. Indices are 0-based.
struct BilinearEntry {
    int i, j, k;
    cplx value;
};

// k-th output of C(u,v,w) accumulates value * u_i * v_j * w_l.
struct TrilinearEntry {
    int i, j, l, k;
    cplx value;
};

struct QuadraticModel {
    int dim = 0;
    CMat linear;
    std::vector<BilinearEntry> bilinear;
    CVec forcing;
    std::vector<TrilinearEntry> cubic;  // optional; empty for quadratic models

    QuadraticModel() = default;
    explicit QuadraticModel(int n);

    CVec B(const CVec& u, const CVec& v) const;
    CVec C(const CVec& u, const CVec& v, const CVec& w) const;
    CVec rhs(const CVec& y) const;
    bool is_real() const;
    void validate() const;
};

struct SpectralBasis {
    CVec eigenvalues;
    CMat right;  // columns e_j
    CMat dual;   // columns e_j*, <e_i, e_j*> = delta_ij
    int cutoff = 0;

    int dim() const { return static_cast<int>(eigenvalues.size()); }
    bool has_vectors() const { return right.size() > 0; }
    // y_j = <x, e_j*>
    CVec to_eigen(const CVec& x) const { return dual.adjoint() * x; }
    CVec to_physical(const CVec& y) const { return right * y; }
    double biorthogonality_error() const;
};

struct DecomposeOptions {
    double condition_bound = 1e8;
    double degeneracy_tol = 1e-10;
};

SpectralBasis decompose(const QuadraticModel& model, int cutoff, const DecomposeOptions& opt = {});
cplx project(const SpectralBasis& basis, const CVec& x, int n);

// Lexicographic order: real part descending, then imaginary part descending.
std::vector<int> lexicographic_order(const CVec& eigenvalues);

// Shift y = D + mean; the returned model governs D.
QuadraticModel fluctuation_model(const QuadraticModel& model, const CVec& mean);

// Sparse rank-3 tensor in eigen-coordinates: terms[n] lists (k, l, B~^n_{kl}).
struct SparseTerm {
    int k, l;
    cplx value;
};
struct SparseCubicTerm {
    int i, j, l;
    cplx value;
};

struct EigenModel {
    int dim = 0;
    int cutoff = 0;
    CVec beta;
    std::vector<std::vector<SparseTerm>> terms;
    std::vector<std::vector<SparseCubicTerm>> cubic_terms;
    CVec forcing;
    SpectralBasis basis;  // may carry no vectors for analytically defined bases

    int unresolved() const { return dim - cutoff; }
    CVec B(const CVec& x, const CVec& y) const;
    CVec rhs(const CVec& y) const;
    bool has_cubic() const;
};

EigenModel to_eigen_model(const QuadraticModel& model, const SpectralBasis& basis, double drop_tol = 0.0);

// Newton solve of rhs(y) = 0 from y0.
CVec find_fixed_point(const QuadraticModel& model, const CVec& y0, double tol = 1e-12, int max_iter = 100);
CMat jacobian(const QuadraticModel& model, const CVec& y);

}  // namespace pmc
