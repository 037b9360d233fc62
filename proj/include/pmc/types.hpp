#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pmc {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

enum class ErrorKind {
    NonDiagonalizable,
    CutoffSplitsPair,
    BasisMismatch,
    SingularResolvent,
    ResonanceViolation,
    ZeroEnergy,
    NonFinite,
    MaxIterExceeded,
    MissingFieldShapes,
    Config,
    MissingInput,
    Format,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// <a, b> = sum_i a_i conj(b_i)
inline cplx inner(const CVec& a, const CVec& b) { return b.dot(a); }

}  // namespace pmc
