#include "zeno/liouville.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace zeno {

namespace {

constexpr Complex kI{0.0, 1.0};

bool is_scalar_multiple(const SuperOp& m, double scale, Complex& c) {
  const auto n = static_cast<double>(m.rows());
  c = m.trace() / n;
  const SuperOp rest = m - c * SuperOp::Identity(m.rows(), m.cols());
  return rest.cwiseAbs().maxCoeff() <= 1e-13 * scale;
}

bool is_nonnegative_integer(double beta) { return beta >= 0.0 && std::floor(beta) == beta; }

}  // namespace

TwoLevelParams::TwoLevelParams(double epsilon, double v) : epsilon_(epsilon), v_(v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("TwoLevelParams: coupling v must be > 0");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw ValidationError("TwoLevelParams: epsilon must be >= 0");
}

double TwoLevelParams::energy() const { return std::hypot(epsilon_, v_); }

RelaxationParams::RelaxationParams(double w_d, double w_p) : w_d_(w_d), w_p_(w_p) {
  if (!(w_d >= 0.0) || !(w_p >= 0.0) || !std::isfinite(w_d) || !std::isfinite(w_p))
    throw ValidationError("RelaxationParams: rates must be finite and >= 0");
  if (w_p < 0.5 * w_d) {
    std::ostringstream os;
    os << "RelaxationParams: w_p = " << w_p << " < w_d / 2 = " << 0.5 * w_d
       << " violates positivity of the density matrix";
    throw ValidationError(os.str());
  }
}

SystemModel::SystemModel(Eigen::MatrixXcd hamiltonian, Eigen::Index measured_index,
                         std::optional<RelaxationParams> relaxation)
    : hamiltonian_(std::move(hamiltonian)),
      measured_index_(measured_index),
      relaxation_(relaxation) {
  if (hamiltonian_.rows() < 2 || hamiltonian_.rows() != hamiltonian_.cols())
    throw ValidationError("SystemModel: Hamiltonian must be square with dimension >= 2");
  if (!is_hermitian(hamiltonian_)) throw ValidationError("SystemModel: Hamiltonian is not Hermitian");
  if (measured_index_ < 0 || measured_index_ >= hamiltonian_.rows())
    throw ValidationError("SystemModel: measured_index out of range");
  if (relaxation_ && hamiltonian_.rows() != 2)
    throw ValidationError("SystemModel: relaxation is defined for two-level systems only");
}

SystemModel SystemModel::two_level(const TwoLevelParams& p, std::optional<RelaxationParams> relaxation) {
  return SystemModel(build_hamiltonian(p), 0, relaxation);
}

Eigen::MatrixXcd build_hamiltonian(const TwoLevelParams& p) {
  Eigen::MatrixXcd h(2, 2);
  h << p.epsilon(), p.v(), p.v(), -p.epsilon();
  return h;
}

Projectors projector_superops(Eigen::Index m, Eigen::Index d) {
  if (d < 1 || m < 0 || m >= d) throw ValidationError("projector_superops: state index out of range");
  const Eigen::Index n = d * d;
  Projectors out{SuperOp::Zero(n, n), SuperOp::Identity(n, n)};
  const Eigen::Index mm = liouville_index(m, m, d);
  out.p(mm, mm) = 1.0;
  out.q(mm, mm) = 0.0;
  return out;
}

SuperOp relaxation_superop(const RelaxationParams& r) {
  SuperOp out = SuperOp::Zero(4, 4);
  // population block on {|11>, |22>}
  out(0, 0) = r.w_d();
  out(0, 3) = -r.w_d();
  out(3, 0) = -r.w_d();
  out(3, 3) = r.w_d();
  out(1, 1) = r.w_p();
  out(2, 2) = r.w_p();
  return out;
}

SuperOp generator(const SystemModel& model) {
  SuperOp l = kI * commutator_superop(model.hamiltonian());
  if (model.relaxation()) l += relaxation_superop(*model.relaxation());
  return l;
}

SuperOp superop_exp(const SuperOp& a, double t) {
  if (!(t >= 0.0)) throw ValidationError("superop_exp: t must be >= 0");
  const SuperOp scaled = -t * a;
  return scaled.exp();
}

SpectralDecomposition spectral_decomposition(const SuperOp& a, double max_condition) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw ValidationError("spectral_decomposition: matrix must be square and non-empty");
  const Eigen::Index n = a.rows();
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const SuperOp herm = 0.5 * (a + a.adjoint());
  const SuperOp anti = (a - a.adjoint()) / (2.0 * kI);

  SpectralDecomposition out;
  Complex c;
  if (is_scalar_multiple(herm, scale, c)) {
    Eigen::SelfAdjointEigenSolver<SuperOp> es(anti);
    out.eigenvalues = c.real() + kI * es.eigenvalues().cast<Complex>().array();
    out.vectors = es.eigenvectors();
    out.inverse_vectors = out.vectors.adjoint();
    return out;
  }
  if (is_scalar_multiple(anti, scale, c)) {
    Eigen::SelfAdjointEigenSolver<SuperOp> es(herm);
    out.eigenvalues = es.eigenvalues().cast<Complex>().array() + kI * c.real();
    out.vectors = es.eigenvectors();
    out.inverse_vectors = out.vectors.adjoint();
    return out;
  }

  Eigen::ComplexEigenSolver<SuperOp> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("spectral_decomposition: eigensolver failed");
  out.eigenvalues = es.eigenvalues();
  out.vectors = es.eigenvectors();
  Eigen::JacobiSVD<SuperOp> svd(out.vectors);
  const auto& sv = svd.singularValues();
  out.condition = sv(n - 1) > 0.0 ? sv(0) / sv(n - 1) : std::numeric_limits<double>::infinity();
  if (!(out.condition <= max_condition)) {
    std::ostringstream os;
    os << "spectral_decomposition: eigenvector condition number " << out.condition
       << " exceeds " << max_condition << " (matrix is defective or nearly so)";
    throw NumericalError(os.str());
  }
  out.inverse_vectors = out.vectors.partialPivLu().inverse();
  return out;
}

Complex principal_power(Complex z, double beta) {
  if (is_nonnegative_integer(beta)) return std::pow(z, static_cast<int>(beta));
  const double mag = std::abs(z);
  if (mag == 0.0 || (z.real() < 0.0 && std::abs(z.imag()) <= 1e-12 * mag)) {
    std::ostringstream os;
    os << "principal_power: argument " << z.real() << (z.imag() < 0 ? "" : "+") << z.imag()
       << "i lies on the branch cut of z^" << beta;
    throw NumericalError(os.str());
  }
  return std::exp(beta * std::log(z));
}

SuperOp superop_fractional_power(const SuperOp& a, double beta, double max_condition) {
  if (std::floor(beta) == beta && std::abs(beta) < 64) {
    const auto n = static_cast<int>(std::abs(beta));
    const SuperOp base = beta < 0 ? SuperOp(a.partialPivLu().inverse()) : a;
    SuperOp out = SuperOp::Identity(a.rows(), a.cols());
    for (int k = 0; k < n; ++k) out = out * base;
    return out;
  }
  const auto s = spectral_decomposition(a, max_condition);
  return apply_spectral_function(s, [beta](Complex z) { return principal_power(z, beta); });
}

double survival_no_measurement(const SystemModel& model, double t) {
  const Eigen::Index mm = model.measured_liouville_index();
  return superop_exp(generator(model), t)(mm, mm).real();
}

double stationary_overlap(const SystemModel& model) {
  if (model.relaxation())
    throw ValidationError("stationary_overlap: defined for dynamic models (no relaxation)");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(model.hamiltonian());
  const auto row = es.eigenvectors().row(model.measured_index());
  double sum = 0.0;
  for (Eigen::Index j = 0; j < row.size(); ++j) sum += std::pow(std::norm(row(j)), 2);
  return sum;
}

FreeSurvival::FreeSurvival(const SystemModel& model)
    : generator_(generator(model)), index_(model.measured_liouville_index()) {
  try {
    const auto s = spectral_decomposition(generator_);
    eigenvalues_ = s.eigenvalues;
    weights_.resize(eigenvalues_.size());
    for (Eigen::Index k = 0; k < weights_.size(); ++k)
      weights_(k) = s.vectors(index_, k) * s.inverse_vectors(k, index_);
    spectral_ = true;
    spectral_radius_ = eigenvalues_.cwiseAbs().maxCoeff();
  } catch (const NumericalError&) {
    spectral_ = false;
    Eigen::ComplexEigenSolver<SuperOp> es(generator_, false);
    spectral_radius_ = es.eigenvalues().cwiseAbs().maxCoeff();
  }
}

double FreeSurvival::operator()(double t) const {
  if (spectral_) {
    Complex sum = 0.0;
    for (Eigen::Index k = 0; k < weights_.size(); ++k) sum += weights_(k) * std::exp(-eigenvalues_(k) * t);
    return sum.real();
  }
  return superop_exp(generator_, t)(index_, index_).real();
}

double FreeSurvival::derivative(double t) const {
  if (spectral_) {
    Complex sum = 0.0;
    for (Eigen::Index k = 0; k < weights_.size(); ++k)
      sum -= eigenvalues_(k) * weights_(k) * std::exp(-eigenvalues_(k) * t);
    return sum.real();
  }
  const SuperOp u = superop_exp(generator_, t);
  return -(generator_ * u)(index_, index_).real();
}

}  // namespace zeno
