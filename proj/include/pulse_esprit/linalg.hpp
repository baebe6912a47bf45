#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace pulse_esprit {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// e^{-j 2 pi tau omega} with the phase tau*omega reduced modulo one before
/// evaluating the trigonometric functions. The rounding error of the product
/// is recovered with an fma so the result stays accurate for |tau*omega| >> 1.
Complex unit_phasor(double tau, double omega);

/// Singular values in descending order.
RVector singular_values(const CMatrix& a);

/// Largest singular value; zero for empty matrices.
double spectral_norm(const CMatrix& a);

/// Moore-Penrose pseudo-inverse; singular values below rel_cutoff * sigma_1
/// are treated as zero.
CMatrix pseudo_inverse(const CMatrix& a, double rel_cutoff);

}  // namespace pulse_esprit
