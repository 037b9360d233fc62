#pragma once

#include <string>
#include <vector>

#include "pmc/quad_model.hpp"

namespace pmc {

enum class Family { LIA, QSA, KTAU, IM2, IM3, ZERO };

const char* family_name(Family f);
Family parse_family(const std::string& s);

// Polynomial map xi -> amplitude of one unresolved mode.
struct ModeCoeffs {
    int mode = 0;  // 0-based index into the full eigen-coordinate vector
    cplx constant = 0.0;
    std::vector<std::pair<int, cplx>> linear;
    std::vector<SparseTerm> quadratic;
    std::vector<SparseCubicTerm> cubic;

    cplx eval(const CVec& xi) const;
};

struct Parameterization {
    Family family = Family::ZERO;
    int dim = 0;
    int cutoff = 0;
    std::vector<double> taus;      // per unresolved mode m..N-1 (LIA/QSA/KTAU)
    std::vector<ModeCoeffs> modes;  // size N - m

    int unresolved() const { return dim - cutoff; }
    CVec eval(const CVec& xi) const;
    cplx eval_mode(int n, const CVec& xi) const;  // n: full index >= cutoff
    CVec lift(const CVec& xi) const;
};

// J_k(z) = int_0^1 u^k exp(-z u) du
cplx exp_moment(int k, cplx z);
// int_{-tau}^0 s^k exp(a s) ds
cplx exp_integral(int k, cplx a, double tau);

cplx lia_coeff_D(cplx beta_i, cplx beta_j, cplx beta_n, double tau);
cplx lia_coeff_U(cplx beta_i, cplx beta_j, cplx beta_n, double tau);
cplx lia_coeff_V(cplx beta_i, cplx beta_j, cplx beta_n, double tau);
// coefficient multiplying F_n: (e^{tau beta_n} - 1)/beta_n
cplx forcing_coeff(cplx beta_n, double tau);

// Scalar factors of the QSA and implicit-Euler families and their tau-derivatives.
cplx qsa_delta(cplx beta_n, double tau);
cplx qsa_delta_prime(cplx beta_n, double tau);
cplx ktau_coeff(cplx beta_n, double tau);
cplx ktau_coeff_prime(cplx beta_n, double tau);

// LIA coefficients of mode n arranged in lexicographic order p = i*m + j.
struct LiaVectors {
    CVec d, gamma;
    cplx alpha = 0.0;
    CVec d_prime, gamma_prime;
    cplx alpha_prime = 0.0;
};
LiaVectors lia_vectors(const EigenModel& model, int n, double tau, bool with_derivative = true);

ModeCoeffs lia_mode(const EigenModel& model, int n, double tau);
ModeCoeffs qsa_mode(const EigenModel& model, int n, double tau);
ModeCoeffs ktau_mode(const EigenModel& model, int n, double tau);

Parameterization lia_build(const EigenModel& model, const std::vector<double>& taus);
Parameterization qsa_build(const EigenModel& model, const std::vector<double>& taus);
Parameterization ktau_build(const EigenModel& model, const std::vector<double>& taus);
Parameterization zero_build(const EigenModel& model);
// Standard QSA, the tau -> infinity limit: (-beta_n)^{-1} (B~(xi,xi) + F~)_n.
Parameterization qsa_limit_build(const EigenModel& model);
Parameterization family_build(Family f, const EigenModel& model, const std::vector<double>& taus);

struct ResonanceOptions {
    double tol = 1e-8;
};
Parameterization im_build(const EigenModel& model, int order, const ResonanceOptions& opt = {});

// Backward leg analytic, forward leg RK4 with `steps` steps.
cplx bf_oracle(const EigenModel& model, int n, double tau, const CVec& xi, int steps);

}  // namespace pmc
