#pragma once

#include "tracerflow/random.hpp"
#include "tracerflow/spectrum.hpp"

#include <memory>
#include <span>
#include <vector>

namespace tracerflow {

using ModelPtr = std::shared_ptr<const SpectrumModel>;

/// Fourier coefficients of a real d-vector field on the d-torus, one complex
/// d-vector per mode of the owning model. Value type; copies are deep.
class FourierField {
 public:
  explicit FourierField(ModelPtr model);

  const SpectrumModel& model() const { return *model_; }
  const ModelPtr& model_ptr() const { return model_; }
  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return model_->size(); }

  Complex& operator()(std::size_t mode, std::size_t component) { return coeffs_[mode * dim_ + component]; }
  Complex operator()(std::size_t mode, std::size_t component) const { return coeffs_[mode * dim_ + component]; }

  std::span<Complex> mode(std::size_t i) { return {coeffs_.data() + i * dim_, dim_}; }
  std::span<const Complex> mode(std::size_t i) const { return {coeffs_.data() + i * dim_, dim_}; }
  std::span<Complex> coefficients() { return coeffs_; }
  std::span<const Complex> coefficients() const { return coeffs_; }

  bool shares_model(const FourierField& other) const { return model_ == other.model_; }

  /// Sets coeff(-k) := conj(coeff(k)) from the representative of each pair.
  void mirror_conjugates();
  /// max |coeff(-k) - conj(coeff(k))|.
  double symmetry_defect() const;
  bool all_finite() const;

  FourierField& operator+=(const FourierField& other);
  FourierField& operator-=(const FourierField& other);
  FourierField& operator*=(double s);
  friend FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
  friend FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
  friend FourierField operator*(double s, FourierField a) { return a *= s; }

 private:
  ModelPtr model_;
  std::size_t dim_;
  std::vector<Complex> coeffs_;
};

struct OUState {
  FourierField field;
  double time = 0.0;
};

/// sqrt( sum_k |k|^{2r} |coeff(k)|^2 ).
double sobolev_norm(const FourierField& f, double r);

/// sum_k |k|^{2r} <f(k), g(k)>, conjugate-linear in g.
Complex sobolev_inner(const FourierField& f, const FourierField& g, double r);

/// S(t): mode k scaled by exp(-gamma(k) t).
FourierField apply_semigroup(const FourierField& f, double t);

/// exp(i k.xi) for every mode of the model, written into `out`.
void plane_waves(const SpectrumModel& model, std::span<const double> xi, std::span<Complex> out);

/// Point value sum_k coeff(k) exp(i k.xi); `jacobian` (row-major d x d, entry
/// [i*d+j] = d v_i / d xi_j) is filled when nonempty. Throws std::logic_error
/// when the imaginary residue exceeds 1e-10 * ||f||_{X^0}.
void evaluate_into(const FourierField& f, std::span<const double> xi, std::span<double> value,
                   std::span<double> jacobian = {});

struct PointValue {
  std::vector<double> value;
  std::vector<double> jacobian;
};

PointValue evaluate(const FourierField& f, std::span<const double> xi, bool with_jacobian = false);

/// f(0) = sum_k coeff(k), real part. No trigonometry needed.
std::vector<double> value_at_origin(const FourierField& f);

/// Draw from the stationary law: one circular complex Gaussian per conjugate
/// pair with second moment energy(k), mirrored onto -k.
FourierField sample_stationary(const ModelPtr& model, RandomStream& rng);

/// Exact OU innovation over dt: second moment (1 - exp(-2 gamma dt)) energy(k).
FourierField ou_noise(const ModelPtr& model, double dt, RandomStream& rng);

/// Exact transition of dV = AV dt + Q^{1/2} dW over dt.
OUState ou_exact_step(const OUState& state, double dt, RandomStream& rng);

/// exp(-gamma(k) h) energy(k).
ComplexMatrix covariance_oracle(const SpectrumModel& model, double h, const Wavevector& k);

/// B(psi, phi)(xi) = sum_j psi_j(0) d phi / d xi_j; in Fourier i (u.k) phi(k)
/// with u = psi(0).
FourierField bilinear_B(const FourierField& psi, const FourierField& phi);

/// One step of dY/dt = AY + B(Y,Y). Integrating-factor RK4: the linear decay
/// is applied exactly and classical RK4 integrates the transport phase.
FourierField y_flow_step(const FourierField& f, double dt);

/// Splitting step for dZ = [AZ + B(Z,Z)] dt + Q^{1/2} dW: exact phase-decay
/// with u = Z(0) frozen at step start, then the exact OU innovation `noise`.
/// With transport == false the B term is dropped (pure OU).
FourierField z_galerkin_step(const FourierField& f, double dt, const FourierField& noise,
                             bool transport = true);
FourierField z_galerkin_step(const FourierField& f, double dt, RandomStream& rng,
                             bool transport = true);

/// One step of dU/dt = AU + B(Z,U) + B(U,Z) with Z frozen over the step.
FourierField tangent_step(const FourierField& z, const FourierField& u_tan, double dt);

/// Sobolev embedding constant sum_k (1+|k|) |k|^{-m} over the truncation.
double embedding_constant(const SpectrumModel& model);

}  // namespace tracerflow
