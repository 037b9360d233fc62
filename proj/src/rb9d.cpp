#include "pmc/rb9d.hpp"

#include <fstream>
#include <sstream>

namespace pmc {

Rb9dCoefficients rb9d_coefficients(double a) {
    const double a2 = a * a;
    return {4 * (1 + a2) / (1 + 2 * a2), (1 + 2 * a2) / (2 * (1 + a2)), 2 * (1 - a2) / (1 + a2),
            a2 / (1 + a2),               8 * a2 / (1 + 2 * a2),          4 / (1 + 2 * a2)};
}

QuadraticModel rb9d_build(const Rb9dConfig& cfg) {
    const auto c = rb9d_coefficients(cfg.a);
    const double s = cfg.sigma, r = cfg.r;
    QuadraticModel m(9);
    auto A = [&](int i, int j, double v) { m.linear(i - 1, j - 1) = v; };
    A(1, 1, -s * c.b1);
    A(1, 7, -s * c.b2);
    A(2, 2, -s);
    A(2, 9, -s / 2);
    A(3, 3, -s * c.b1);
    A(3, 8, s * c.b2);
    A(4, 4, -s);
    A(4, 9, s / 2);
    A(5, 5, -s * c.b5);
    A(6, 6, -c.b6);
    A(7, 1, -r);
    A(7, 7, -c.b1);
    A(8, 3, r);
    A(8, 8, -c.b1);
    A(9, 2, -r);
    A(9, 4, r);
    A(9, 9, -1);

    // (phi index, psi index, output, value), 1-based
    auto B = [&](int i, int j, int k, double v) { m.bilinear.push_back({i - 1, j - 1, k - 1, v}); };
    B(2, 4, 1, -1);
    B(4, 4, 1, c.b4);
    B(3, 5, 1, c.b3);
    B(1, 4, 2, 1);
    B(2, 5, 2, -1);
    B(4, 5, 2, 1);
    B(2, 4, 3, 1);
    B(2, 2, 3, -c.b4);
    B(1, 5, 3, -c.b3);
    B(2, 3, 4, -1);
    B(2, 5, 4, -1);
    B(4, 5, 4, 1);
    B(2, 2, 5, 0.5);
    B(4, 4, 5, -0.5);
    B(2, 9, 6, 1);
    B(4, 9, 6, -1);
    B(5, 8, 7, 2);
    B(4, 9, 7, -1);
    B(5, 7, 8, -2);
    B(2, 9, 8, 1);
    B(2, 6, 9, -2);
    B(4, 6, 9, 2);
    B(4, 7, 9, 1);
    B(2, 8, 9, -1);  // present in the component equations, missing from the compact B display
    return m;
}

HeatFluxMatrix load_heat_flux_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::MissingFieldShapes, "no heat-flux shape data at '" + path + "'");
    HeatFluxMatrix hm;
    hm.source = path;
    std::string line;
    int row = 0;
    while (std::getline(in, line) && row < 9) {
        auto h = line.find('#');
        if (h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        double v;
        int col = 0;
        while (col < 9 && ls >> v) hm.M(row, col++) = v;
        if (col == 0) continue;
        if (col != 9) throw Error(ErrorKind::Format, "heat-flux row " + std::to_string(row + 1) + " needs 9 values");
        ++row;
    }
    if (row != 9) throw Error(ErrorKind::Format, "heat-flux matrix needs 9 rows");
    return hm;
}

HeatFluxSplit rb9d_heat_flux(const HeatFluxMatrix& hm, const CVec& c, const CVec& s) {
    Eigen::Matrix<double, 9, 1> cr = c.real(), sr = s.real();
    HeatFluxSplit out;
    out.cc = cr.dot(hm.M * cr);
    out.cs = cr.dot(hm.M * sr) + sr.dot(hm.M * cr);
    out.ss = sr.dot(hm.M * sr);
    Eigen::Matrix<double, 9, 1> t = cr + sr;
    out.total = t.dot(hm.M * t);
    return out;
}

}  // namespace pmc
