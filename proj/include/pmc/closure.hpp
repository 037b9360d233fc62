#pragma once

#include <functional>

#include "pmc/diagnostics.hpp"

namespace pmc {

using VectorField = std::function<CVec(const CVec&)>;

// Reduced field x -> Pi_c [beta (x + Phi(x)) + B~(x + Phi(x), x + Phi(x)) + F~].
class ClosureField {
public:
    ClosureField(const EigenModel& model, const Parameterization& param);

    int dim() const { return m_; }
    CVec rhs(const CVec& x) const;
    CVec nonlinear(const CVec& x) const;  // rhs minus the diagonal linear part
    const CVec& linear_diagonal() const { return beta_c_; }

private:
    const EigenModel& model_;
    const Parameterization& param_;
    int m_;
    CVec beta_c_;
};

struct IntegrationResult {
    Trajectory traj;
    bool blew_up = false;
    long fail_step = -1;
};

struct IntegrateOptions {
    double dt = 1e-3;
    long steps = 1000;
    int save_stride = 1;
    double t0 = 0.0;
    double blowup = 1e12;
    // called at each saved sample; no samples are stored when set and `store` is false
    std::function<void(double, const CVec&)> observer;
    bool store = true;
};

IntegrationResult integrate_rk4(const VectorField& f, const CVec& x0, const IntegrateOptions& opt);
// x_{k+1} = (I - dt diag(L))^{-1} (x_k + dt N(x_k))
IntegrationResult integrate_semi_implicit(const CVec& linear_diag, const VectorField& nonlinear, const CVec& x0,
                                          const IntegrateOptions& opt);

// Lift reduced samples to full eigen-coordinates, then to physical coordinates when the basis has vectors.
Trajectory reconstruct(const Parameterization& param, const Trajectory& reduced, const SpectralBasis* basis = nullptr,
                       const CVec* mean = nullptr);

}  // namespace pmc
