#pragma once

// Liouville-space algebra for a d-level system.
//
// Density matrices are vectorized row-major: the operator |j><j'| sits at
// index j*d + j'.  For d = 2 the basis order is |11>, |12>, |21>, |22>
// (1-based labels as used for the two-level model).

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <complex>
#include <optional>
#include <utility>

#include "zeno/error.hpp"

namespace zeno {

template <typename Scalar>
using CMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using CVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
/// d^2 x d^2 matrix acting on vectorized density matrices.
using SuperOp = CMatrix<double>;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kMaxEigenvectorCondition = 1e8;

inline Eigen::Index liouville_index(Eigen::Index j, Eigen::Index jp, Eigen::Index d) {
  return j * d + jp;
}

/// Two-level Hamiltonian parameters: half-splitting epsilon and coupling v.
class TwoLevelParams {
 public:
  TwoLevelParams(double epsilon, double v);

  double epsilon() const { return epsilon_; }
  double v() const { return v_; }
  /// epsilon / v
  double epsilon_bar() const { return epsilon_ / v_; }
  /// Half the Rabi frequency, sqrt(epsilon^2 + v^2).
  double energy() const;

 private:
  double epsilon_;
  double v_;
};

/// Population relaxation rate w_d and dephasing rate w_p; w_p >= w_d / 2.
class RelaxationParams {
 public:
  RelaxationParams(double w_d, double w_p);

  double w_d() const { return w_d_; }
  double w_p() const { return w_p_; }

 private:
  double w_d_;
  double w_p_;
};

class SystemModel {
 public:
  SystemModel(Eigen::MatrixXcd hamiltonian, Eigen::Index measured_index,
              std::optional<RelaxationParams> relaxation = std::nullopt);

  /// The two-level model with the measured state |1> (index 0).
  static SystemModel two_level(const TwoLevelParams& p,
                               std::optional<RelaxationParams> relaxation = std::nullopt);

  Eigen::Index dim() const { return hamiltonian_.rows(); }
  const Eigen::MatrixXcd& hamiltonian() const { return hamiltonian_; }
  Eigen::Index measured_index() const { return measured_index_; }
  const std::optional<RelaxationParams>& relaxation() const { return relaxation_; }
  /// Liouville index of |m><m| for the measured state m.
  Eigen::Index measured_liouville_index() const {
    return liouville_index(measured_index_, measured_index_, dim());
  }

 private:
  Eigen::MatrixXcd hamiltonian_;
  Eigen::Index measured_index_;
  std::optional<RelaxationParams> relaxation_;
};

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& h, double tol = kHermitianTolerance) {
  if (h.rows() != h.cols()) return false;
  return h.rows() == 0 || (h - h.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

/// [[eps, v], [v, -eps]]
Eigen::MatrixXcd build_hamiltonian(const TwoLevelParams& p);

/// Superoperator of rho -> H rho - rho H, i.e. H (x) 1 - 1 (x) H^T in the
/// row-major basis.
template <typename Derived>
CMatrix<typename Derived::RealScalar> commutator_superop(const Eigen::MatrixBase<Derived>& h) {
  using Scalar = typename Derived::RealScalar;
  if (!is_hermitian(h)) throw ValidationError("commutator_superop: Hamiltonian is not Hermitian");
  const CMatrix<Scalar> hc = h.template cast<std::complex<Scalar>>();
  const CMatrix<Scalar> id = CMatrix<Scalar>::Identity(h.rows(), h.cols());
  return Eigen::kroneckerProduct(hc, id).eval() - Eigen::kroneckerProduct(id, hc.transpose()).eval();
}

struct Projectors {
  SuperOp p;  ///< |mm><mm|
  SuperOp q;  ///< 1 - p
};

Projectors projector_superops(Eigen::Index m, Eigen::Index d);

/// w_d (|11> - |22>)(<11| - <22|) + w_p (|12><12| + |21><21|), two-level only.
SuperOp relaxation_superop(const RelaxationParams& r);

/// L = i H_super + R (R = 0 without relaxation).  Evolution is rho(t) = exp(-L t) rho(0).
SuperOp generator(const SystemModel& model);

/// exp(-A t) by scaling and squaring; valid for non-normal A.
SuperOp superop_exp(const SuperOp& a, double t);

/// Eigendecomposition A = V diag(lambda) V^-1 with a conditioning guard.
struct SpectralDecomposition {
  Eigen::VectorXcd eigenvalues;
  SuperOp vectors;
  SuperOp inverse_vectors;
  double condition = 1.0;
};

/// Throws NumericalError when cond(V) exceeds max_condition.  Normal matrices
/// whose Hermitian (or anti-Hermitian) part is a multiple of the identity are
/// decomposed with a unitary eigenbasis.
SpectralDecomposition spectral_decomposition(const SuperOp& a,
                                             double max_condition = kMaxEigenvectorCondition);

/// V diag(f(shift + lambda_k)) V^-1
template <typename Function>
SuperOp apply_spectral_function(const SpectralDecomposition& s, Function&& f, Complex shift = 0.0) {
  Eigen::VectorXcd fl(s.eigenvalues.size());
  for (Eigen::Index k = 0; k < fl.size(); ++k) fl(k) = f(shift + s.eigenvalues(k));
  return s.vectors * fl.asDiagonal() * s.inverse_vectors;
}

/// Principal-branch power z^beta = exp(beta Log z).  Throws when z lies on
/// (or within a relative 1e-12 of) the closed negative real axis and beta is
/// not a non-negative integer.
Complex principal_power(Complex z, double beta);

/// A^beta via eigendecomposition with principal-branch scalar powers.
/// Integer exponents are evaluated by repeated multiplication (and inversion).
SuperOp superop_fractional_power(const SuperOp& a, double beta,
                                 double max_condition = kMaxEigenvectorCondition);

/// <mm| exp(-L t) |mm>: survival in the measured state without measurements.
double survival_no_measurement(const SystemModel& model, double t);

/// Sum_j |<m|phi_j>|^4 over Hamiltonian eigenvectors phi_j.
double stationary_overlap(const SystemModel& model);

/// Repeated evaluation of t -> <mm| exp(-L t) |mm> and its time derivative.
/// Uses the spectral representation when the generator is well conditioned
/// and falls back to the matrix exponential otherwise.
class FreeSurvival {
 public:
  explicit FreeSurvival(const SystemModel& model);

  double operator()(double t) const;
  double derivative(double t) const;
  /// Largest |eigenvalue| of the generator, an upper bound on its rates.
  double spectral_radius() const { return spectral_radius_; }

 private:
  SuperOp generator_;
  Eigen::Index index_;
  bool spectral_ = false;
  Eigen::VectorXcd eigenvalues_;
  Eigen::VectorXcd weights_;
  double spectral_radius_ = 0.0;
};

}  // namespace zeno
