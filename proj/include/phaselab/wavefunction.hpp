#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "phaselab/error.hpp"
#include "phaselab/quad.hpp"

namespace phaselab::quantum {

using quad::cplx;

struct ProductTerm {
  cplx coeff;
  quad::ComplexProfile factor1;
  quad::ComplexProfile factor2;
};

// Two-particle state sum_k c_k a_k(q1) b_k(q2). All factor1 profiles share one
// position grid, all factor2 profiles another; the momentum grids are where
// the partial Fourier transforms are sampled.
class WaveFunction2 {
 public:
  WaveFunction2(std::vector<ProductTerm> terms, quad::Grid1D momentum1, quad::Grid1D momentum2)
      : terms_(std::move(terms)), momentum1_(std::move(momentum1)), momentum2_(std::move(momentum2)) {
    if (terms_.empty()) throw InputError("wave function needs at least one term");
    for (const ProductTerm& t : terms_) {
      if (!(t.factor1.grid == terms_.front().factor1.grid) || !(t.factor2.grid == terms_.front().factor2.grid))
        throw InputError("all product terms must share the same axis grids");
    }
  }

  const std::vector<ProductTerm>& terms() const { return terms_; }
  const quad::Grid1D& position_grid1() const { return terms_.front().factor1.grid; }
  const quad::Grid1D& position_grid2() const { return terms_.front().factor2.grid; }
  const quad::Grid1D& momentum_grid1() const { return momentum1_; }
  const quad::Grid1D& momentum_grid2() const { return momentum2_; }

  // <Psi|Psi> from the Gram matrices of the factors.
  double norm2() const {
    cplx s = 0.0;
    for (const ProductTerm& a : terms_) {
      for (const ProductTerm& b : terms_) {
        s += std::conj(a.coeff) * b.coeff * quad::inner(a.factor1, b.factor1) * quad::inner(a.factor2, b.factor2);
      }
    }
    return s.real();
  }

  // Psi(q1_i, q2_j) on the position grids.
  cplx value(std::size_t i, std::size_t j) const {
    cplx s = 0.0;
    for (const ProductTerm& t : terms_) s += t.coeff * t.factor1.value(i) * t.factor2.value(j);
    return s;
  }

 private:
  std::vector<ProductTerm> terms_;
  quad::Grid1D momentum1_;
  quad::Grid1D momentum2_;
};

}  // namespace phaselab::quantum
