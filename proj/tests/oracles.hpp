#pragma once

#include <functional>
#include <random>
#include <vector>

#include "pmc/closure.hpp"
#include "pmc/experiments.hpp"
#include "pmc/ks.hpp"

// Reference computations that share no code path with the library.
namespace oracle {

using pmc::cplx;
using pmc::CVec;

// GSL adaptive Gauss-Kronrod on [a, b], real and imaginary parts separately.
cplx integrate(const std::function<cplx(double)>& f, double a, double b);
// GSL QAGIU on (-inf, 0].
cplx integrate_from_minus_infinity(const std::function<cplx(double)>& f);

// Dense random model: low modes with Re beta in [-0.4, 0.2], high modes in [-3, -1].
pmc::EigenModel random_eigen_model(std::mt19937_64& rng, int N, int m, bool forced);
// Sums of random complex sinusoids, K samples.
pmc::Trajectory random_trajectory(std::mt19937_64& rng, int N, int K, double dt);

// Coefficients of the backward-forward parameterization by numerical quadrature of
// int_{-tau}^0 exp(-beta_n s) [B_n(y(s), y(s)) + F_n] ds with y(s) the linear backward flow.
struct Poly {
    cplx constant = 0.0;
    std::vector<cplx> linear;                 // size m
    std::vector<std::vector<cplx>> quadratic;  // m x m, term x_k x_l
    cplx eval(const CVec& xi) const;
};
Poly lia_by_quadrature(const pmc::EigenModel& model, int n, double tau);
Poly lia_limit_by_quadrature(const pmc::EigenModel& model, int n);

// Plain trapezoid time mean of |y_n - phi(xi)|^2.
double qn_direct(const pmc::Trajectory& traj, const Poly& phi, int n, int m);

// Trapezoid rule on 1024 points (exact for these trigonometric products), via GSL FFT:
// entry 2(n-1) + ln is <B(e_i^li, e_j^lj), e_n^ln> for n = 1..nmax.
std::vector<double> ks_projection(int li, int i, int lj, int j, double L, double gamma, int nmax);

// Steady state of the 9D convection model nearest the chaotic time mean (cached).
CVec rb_convective_state();

// Slope of log(error) against log(dt) from successive halvings.
double observed_order(const std::vector<double>& errors);

}  // namespace oracle
