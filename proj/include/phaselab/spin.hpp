#pragma once

// Two-qubit reduction on span{|+>, |->} with |+> ~ f, |-> ~ g:
// chi -> Gamma = (1 + sx)/2, chi' -> Gamma' = (1 - gamma sy)/2.
// Basis order |++>, |+->, |-+>, |-->; entry (r, c) is <r|A|c>.
//
// sigma_y carries the sign that makes <+|Gamma'|-> equal the continuum
// element <f|chi'|g> = -i gamma/2, i.e. the transpose of the usual Pauli
// matrix.

#include <Eigen/Dense>

#include <complex>
#include <numbers>

namespace phaselab::spin {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec4 = Eigen::Vector4cd;

inline Mat2 sigma_x() { return (Mat2() << 0, 1, 1, 0).finished(); }
inline Mat2 sigma_y() { return (Mat2() << 0, cplx(0, 1), cplx(0, -1), 0).finished(); }
inline Mat2 sigma_z() { return (Mat2() << 1, 0, 0, -1).finished(); }

inline Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  }
  return out;
}

struct GammaPair {
  Mat2 G;
  Mat2 Gp;
};

inline GammaPair gamma_matrices(double gamma) {
  const Mat2 one = Mat2::Identity();
  return {0.5 * (one + sigma_x()), 0.5 * (one - gamma * sigma_y())};
}

// G x 1 + 1 x G + G' x G' - G x G - G x G' - G' x G
inline Mat4 p_bar(double gamma) {
  const auto [G, Gp] = gamma_matrices(gamma);
  const Mat2 one = Mat2::Identity();
  return kron(G, one) + kron(one, G) + kron(Gp, Gp) - kron(G, G) - kron(G, Gp) - kron(Gp, G);
}

// (|++> + sign e^{i pi/4} |-->) / sqrt 2
inline Vec4 psi_pm(int sign) {
  Vec4 v = Vec4::Zero();
  v(0) = 1.0 / std::numbers::sqrt2;
  v(3) = static_cast<double>(sign) * std::polar(1.0, std::numbers::pi / 4.0) / std::numbers::sqrt2;
  return v;
}

struct PsiExpectations {
  double p_bar_value;
  double defect_value;
};

inline PsiExpectations psi_pm_expectations(int sign) {
  const Mat4 P = p_bar(1.0);
  const Vec4 v = psi_pm(sign);
  const Mat4 D = P * (Mat4::Identity() - P);
  return {v.dot(P * v).real(), v.dot(D * v).real()};
}

}  // namespace phaselab::spin
