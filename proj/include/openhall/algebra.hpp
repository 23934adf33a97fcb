#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace openhall {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr cplx I{0.0, 1.0};

/// Square complex matrix checked Hermitian on construction (relative 1e-12)
/// and stored exactly Hermitian afterwards.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(const CMatrix& m, double rel_tol = 1e-12);
  static HermitianMatrix zero(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  cplx operator()(int i, int j) const { return m_(i, j); }

 private:
  CMatrix m_;
};

/// Hermitian, unit trace (1e-10), eigenvalues >= -1e-10.
class DensityMatrix {
 public:
  explicit DensityMatrix(const CMatrix& m, double tol = 1e-10);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  cplx operator()(int i, int j) const { return m_(i, j); }

 private:
  CMatrix m_;
};

/// Map on column-stacked N x N matrices.
class Superoperator {
 public:
  Superoperator(int dim, CMatrix matrix);

  int dim() const { return dim_; }
  const CMatrix& matrix() const { return m_; }
  CMatrix apply(const CMatrix& rho) const;

 private:
  int dim_;
  CMatrix m_;
};

struct Eigensystem {
  RVector values;   // ascending
  CMatrix vectors;  // columns
};

struct Jump {
  CMatrix op;
  double rate = 0.0;
};

struct NullSpaceResult {
  DensityMatrix state;
  int multiplicity = 1;
  double residual = 0.0;  // ||L(rho)||
  CMatrix basis;          // null vectors as columns (vectorized)
};

CVector vec(const CMatrix& m);
CMatrix unvec(const CVector& v, int dim);

/// First component with modulus > 1e-8 made real and nonnegative.
void fix_gauge(CMatrix& vectors);

Eigensystem hermitian_eigensystem(const HermitianMatrix& h);

/// rho -> -i[h, rho] + sum_j rate_j (2 F rho F^+ - F^+F rho - rho F^+F)
Superoperator build_liouvillian(const HermitianMatrix& h, std::span<const Jump> jumps);

/// Columns spanning the numerical null space (singular values < rel_tol * largest).
CMatrix null_space(const CMatrix& m, double rel_tol = 1e-9);

NullSpaceResult null_space_steady_state(const Superoperator& l, double rel_tol = 1e-9);

/// Minimize ||a x|| subject to c x = d.
CVector constrained_least_squares(const CMatrix& a, const CMatrix& c, const CVector& d);

CMatrix hermitian_part(const CMatrix& m);

}  // namespace openhall
