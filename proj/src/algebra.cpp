#include "openhall/algebra.hpp"

#include <cmath>
#include <sstream>

#include "openhall/errors.hpp"

namespace openhall {

namespace {

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw ValidationError(os.str());
  }
}

// kron(a, b) for column stacking: vec(b X a^T) = kron(a, b) vec(X)
CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

HermitianMatrix::HermitianMatrix(const CMatrix& m, double rel_tol) {
  require_square(m, "HermitianMatrix");
  if (!m.allFinite()) throw ValidationError("HermitianMatrix: non-finite entry");
  const double scale = std::max(1.0, max_abs(m));
  const double asym = max_abs(m - m.adjoint());
  if (asym > rel_tol * scale) {
    std::ostringstream os;
    os << "HermitianMatrix: input not Hermitian (max |H - H^+| = " << asym << ")";
    throw ValidationError(os.str());
  }
  m_ = hermitian_part(m);
}

HermitianMatrix HermitianMatrix::zero(int dim) { return HermitianMatrix(CMatrix::Zero(dim, dim)); }

DensityMatrix::DensityMatrix(const CMatrix& m, double tol) {
  require_square(m, "DensityMatrix");
  if (!m.allFinite()) throw ValidationError("DensityMatrix: non-finite entry");
  if (max_abs(m - m.adjoint()) > tol) throw ValidationError("DensityMatrix: not Hermitian");
  m_ = hermitian_part(m);
  const cplx tr = m_.trace();
  if (std::abs(tr - 1.0) > tol) {
    std::ostringstream os;
    os << "DensityMatrix: trace " << tr.real() << " differs from 1";
    throw ValidationError(os.str());
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol) {
    std::ostringstream os;
    os << "DensityMatrix: negative eigenvalue " << es.eigenvalues().minCoeff();
    throw ValidationError(os.str());
  }
}

Superoperator::Superoperator(int dim, CMatrix matrix) : dim_(dim), m_(std::move(matrix)) {
  if (dim <= 0 || m_.rows() != dim * dim || m_.cols() != dim * dim)
    throw ValidationError("Superoperator: matrix shape does not match dim^2");
}

CMatrix Superoperator::apply(const CMatrix& rho) const {
  if (rho.rows() != dim_ || rho.cols() != dim_)
    throw ValidationError("Superoperator::apply: dimension mismatch");
  return unvec(m_ * vec(rho), dim_);
}

CVector vec(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix unvec(const CVector& v, int dim) {
  if (v.size() != static_cast<Eigen::Index>(dim) * dim)
    throw ValidationError("unvec: length is not dim^2");
  return Eigen::Map<const CMatrix>(v.data(), dim, dim);
}

void fix_gauge(CMatrix& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const cplx z = vectors(r, c);
      if (std::abs(z) > 1e-8) {
        vectors.col(c) *= std::conj(z) / std::abs(z);
        vectors(r, c) = std::abs(z);
        break;
      }
    }
  }
}

Eigensystem hermitian_eigensystem(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
  if (es.info() != Eigen::Success) throw SolverError("hermitian_eigensystem: eigensolver failed");
  Eigensystem out{es.eigenvalues(), es.eigenvectors()};
  fix_gauge(out.vectors);
  return out;
}

Superoperator build_liouvillian(const HermitianMatrix& h, std::span<const Jump> jumps) {
  const int n = h.dim();
  const CMatrix id = CMatrix::Identity(n, n);
  CMatrix l = -I * (kron(id, h.matrix()) - kron(h.matrix().transpose(), id));
  for (const auto& j : jumps) {
    if (j.op.rows() != n || j.op.cols() != n)
      throw ValidationError("build_liouvillian: jump operator dimension mismatch");
    if (!(j.rate >= 0.0) || !std::isfinite(j.rate))
      throw ValidationError("build_liouvillian: negative or non-finite rate");
    if (j.rate == 0.0) continue;
    const CMatrix fdf = j.op.adjoint() * j.op;
    l += j.rate * (2.0 * kron(j.op.conjugate(), j.op) - kron(id, fdf) - kron(fdf.transpose(), id));
  }
  return Superoperator(n, std::move(l));
}

CMatrix null_space(const CMatrix& m, double rel_tol) {
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  const double thr = rel_tol * (s.size() ? s(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > thr) ++rank;
  // columns beyond the row count are null as well
  return svd.matrixV().rightCols(m.cols() - rank);
}

NullSpaceResult null_space_steady_state(const Superoperator& l, double rel_tol) {
  const int n = l.dim();
  const CMatrix basis = null_space(l.matrix(), rel_tol);
  if (basis.cols() == 0)
    throw SolverError("null_space_steady_state: no null vector within tolerance (not a generator?)");

  CMatrix rho;
  if (basis.cols() == 1) {
    rho = unvec(basis.col(0), n);
  } else {
    // projection of the identity onto the null space
    const CVector id = vec(CMatrix::Identity(n, n));
    rho = unvec(basis * (basis.adjoint() * id), n);
  }
  const cplx tr = rho.trace();
  if (std::abs(tr) < 1e-14) throw SolverError("null_space_steady_state: null vector has zero trace");
  rho = hermitian_part(rho / tr);
  const double residual = (l.matrix() * vec(rho)).norm();
  return NullSpaceResult{DensityMatrix(rho), static_cast<int>(basis.cols()), residual, basis};
}

CVector constrained_least_squares(const CMatrix& a, const CMatrix& c, const CVector& d) {
  if (a.cols() != c.cols() || c.rows() != d.size())
    throw ValidationError("constrained_least_squares: shape mismatch");
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(c);
  const CVector xp = cod.solve(d);
  if ((c * xp - d).norm() > 1e-10 * std::max(1.0, d.norm()))
    throw SolverError("constrained_least_squares: inconsistent constraints");
  const CMatrix z = null_space(c, 1e-12);
  if (z.cols() == 0) return xp;
  const CMatrix az = a * z;
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod2(az);
  const CVector y = cod2.solve(-(a * xp));
  return xp + z * y;
}

}  // namespace openhall
