#pragma once

#include <array>
#include <string>

#include "pmc/quad_model.hpp"

namespace pmc {

struct Rb9dConfig {
    double sigma = 0.5;
    double r = 14.22;
    double a = 0.5;
};

struct Rb9dCoefficients {
    double b1, b2, b3, b4, b5, b6;
};

Rb9dCoefficients rb9d_coefficients(double a);
QuadraticModel rb9d_build(const Rb9dConfig& cfg);

// Space-averaged convective flux H = C^T M C with M the averaged products of the
// vertical-velocity and temperature mode shapes; M is read from a data file.
struct HeatFluxMatrix {
    Eigen::Matrix<double, 9, 9> M;
    std::string source;
};
HeatFluxMatrix load_heat_flux_matrix(const std::string& path);

struct HeatFluxSplit {
    double total, cc, cs, ss;
};
// c: resolved part, s: unresolved part, both in physical coordinates (mean included in c).
HeatFluxSplit rb9d_heat_flux(const HeatFluxMatrix& hm, const CVec& c, const CVec& s);

}  // namespace pmc
