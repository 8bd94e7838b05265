#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tracerflow {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Nonzero lattice point of Z^d (the mean mode is excluded).
class Wavevector {
 public:
  Wavevector() = default;
  explicit Wavevector(std::vector<int> components);

  std::size_t dimension() const { return components_.size(); }
  int operator[](std::size_t j) const { return components_[j]; }
  const std::vector<int>& components() const { return components_; }

  double norm() const;       // Euclidean
  double norm_squared() const;
  int max_norm() const;      // l-infinity
  Wavevector operator-() const;
  /// First nonzero component is positive. Exactly one of k, -k qualifies.
  bool is_representative() const;

  friend bool operator==(const Wavevector&, const Wavevector&) = default;
  friend auto operator<=>(const Wavevector&, const Wavevector&) = default;

 private:
  std::vector<int> components_;
};

struct ModeSpec {
  Wavevector k;
  double gamma = 1.0;   // mixing rate, 1/s
  ComplexMatrix energy; // d x d Hermitian PSD
};

enum class Projection { full, incompressible, potential };

std::string_view to_string(Projection p);
Projection projection_from_string(std::string_view name);

/// Statistical model of the velocity field: a finite, conjugation-closed set of
/// modes with mixing rates and energy matrices, plus the regularity exponents
/// (m, alpha) used by the hypothesis checks. Immutable after construction.
class SpectrumModel {
 public:
  SpectrumModel(int dimension, int truncation, std::vector<ModeSpec> modes, int m = 3,
                double alpha = 0.5);

  int dimension() const { return dimension_; }
  int truncation() const { return truncation_; }
  int m() const { return m_; }
  double alpha() const { return alpha_; }

  std::size_t size() const { return modes_.size(); }
  const ModeSpec& mode(std::size_t i) const { return modes_[i]; }
  std::span<const ModeSpec> modes() const { return modes_; }
  double gamma(std::size_t i) const { return modes_[i].gamma; }
  double wavenumber(std::size_t i) const { return wavenumber_[i]; }

  /// Index of -k for the mode at index i.
  std::size_t conjugate(std::size_t i) const { return conjugate_[i]; }
  /// One index per conjugate pair {k, -k}.
  std::span<const std::size_t> representatives() const { return representatives_; }

  std::optional<std::size_t> find(const Wavevector& k) const;

  /// Hermitian square root of energy(i), negative eigenvalues clipped.
  const ComplexMatrix& energy_sqrt(std::size_t i) const { return energy_sqrt_[i]; }

  /// Same modes with every energy multiplied by factor >= 0.
  SpectrumModel scaled(double factor) const;

  /// Modes with max_norm <= new_truncation.
  SpectrumModel truncated(int new_truncation) const;

 private:
  int dimension_;
  int truncation_;
  int m_;
  double alpha_;
  std::vector<ModeSpec> modes_;
  std::vector<double> wavenumber_;
  std::vector<std::size_t> conjugate_;
  std::vector<std::size_t> representatives_;
  std::vector<ComplexMatrix> energy_sqrt_;
  std::map<Wavevector, std::size_t> index_;
};

struct PowerLawSpectrum {
  int dimension = 2;
  int truncation = 8;
  double sigma0 = 1.0;
  double decay_p = 14.0;
  Projection projection = Projection::full;
  double gamma_K0 = 1.0;
  double gamma_exp = 2.0;
  int m = 3;
  double alpha = 0.5;
};

/// energy(k) = sigma0 |k|^-decay_p P(k), gamma(k) = gamma_K0 |k|^gamma_exp over
/// the l-infinity ball 0 < |k|_inf <= truncation.
SpectrumModel build_power_law_spectrum(const PowerLawSpectrum& params);

/// Projector onto the energy image for one wavevector.
ComplexMatrix projection_matrix(Projection p, const Wavevector& k);

/// Spectral gap: minimum mixing rate over the modes.
double gamma_star(const SpectrumModel& model);

/// Truncated sum  sum_k gamma(k)^alpha |k|^{2(m+1)} Tr energy(k).
double check_h1(const SpectrumModel& model);

struct H2Report {
  double integral = 0.0;    // trapezoid over [0, t_max]
  double tail_bound = 0.0;  // upper bound on the integral over [t_max, inf)
};

/// Trapezoid quadrature of g(t) = max_k exp(-gamma(k) t) |k| over [0, t_max]
/// with quad_steps intervals. The tail bound uses max <= sum:
/// sum_k |k| exp(-gamma(k) t_max) / gamma(k).
H2Report check_h2(const SpectrumModel& model, double t_max, int quad_steps);

/// Hermitian within tolerance relative to the Frobenius norm.
bool is_hermitian(const ComplexMatrix& m, double rel_tol = 1e-12);

/// Minimum eigenvalue >= -rel_tol * trace.
bool is_psd(const ComplexMatrix& m, double rel_tol = 1e-12);

}  // namespace tracerflow
