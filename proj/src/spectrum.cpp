#include "tracerflow/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tracerflow {

Wavevector::Wavevector(std::vector<int> components) : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("wavevector has no components");
  if (std::all_of(components_.begin(), components_.end(), [](int c) { return c == 0; })) {
    throw std::invalid_argument("zero wavevector is excluded (mean-zero fields)");
  }
}

double Wavevector::norm_squared() const {
  double s = 0.0;
  for (int c : components_) s += static_cast<double>(c) * c;
  return s;
}

double Wavevector::norm() const { return std::sqrt(norm_squared()); }

int Wavevector::max_norm() const {
  int m = 0;
  for (int c : components_) m = std::max(m, std::abs(c));
  return m;
}

Wavevector Wavevector::operator-() const {
  std::vector<int> neg(components_.size());
  std::transform(components_.begin(), components_.end(), neg.begin(), [](int c) { return -c; });
  return Wavevector(std::move(neg));
}

bool Wavevector::is_representative() const {
  for (int c : components_) {
    if (c != 0) return c > 0;
  }
  return false;
}

std::string_view to_string(Projection p) {
  switch (p) {
    case Projection::full: return "full";
    case Projection::incompressible: return "incompressible";
    case Projection::potential: return "potential";
  }
  return "full";
}

Projection projection_from_string(std::string_view name) {
  if (name == "full") return Projection::full;
  if (name == "incompressible") return Projection::incompressible;
  if (name == "potential") return Projection::potential;
  throw std::invalid_argument("unknown projection '" + std::string(name) + "'");
}

bool is_hermitian(const ComplexMatrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = m.norm();
  return (m - m.adjoint()).norm() <= rel_tol * std::max(scale, 1e-300);
}

bool is_psd(const ComplexMatrix& m, double rel_tol) {
  const double trace = m.trace().real();
  if (m.norm() == 0.0) return true;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -rel_tol * std::abs(trace);
}

namespace {

ComplexMatrix hermitian_sqrt(const ComplexMatrix& m) {
  if (m.norm() == 0.0) return ComplexMatrix::Zero(m.rows(), m.cols());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(m);
  if (eig.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const double trace = std::abs(m.trace().real());
  Eigen::VectorXd root(eig.eigenvalues().size());
  for (Eigen::Index i = 0; i < root.size(); ++i) {
    const double lambda = eig.eigenvalues()(i);
    if (lambda < -1e-12 * trace) throw std::domain_error("energy matrix is not PSD");
    root(i) = std::sqrt(std::max(lambda, 0.0));
  }
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().adjoint();
}

}  // namespace

SpectrumModel::SpectrumModel(int dimension, int truncation, std::vector<ModeSpec> modes, int m,
                             double alpha)
    : dimension_(dimension), truncation_(truncation), m_(m), alpha_(alpha), modes_(std::move(modes)) {
  if (dimension_ < 1) throw std::invalid_argument("dimension must be >= 1");
  if (truncation_ < 1) throw std::invalid_argument("truncation K must be >= 1");
  if (!(alpha_ > 0.0 && alpha_ < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  if (m_ < 0) throw std::invalid_argument("m must be nonnegative");
  const auto d = static_cast<std::size_t>(dimension_);

  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const ModeSpec& mode = modes_[i];
    if (mode.k.dimension() != d) throw std::invalid_argument("wavevector dimension mismatch");
    if (mode.k.max_norm() > truncation_) throw std::invalid_argument("wavevector outside truncation");
    if (!(mode.gamma > 0.0) || !std::isfinite(mode.gamma)) {
      throw std::invalid_argument("mixing rate must be positive and finite");
    }
    if (mode.energy.rows() != dimension_ || mode.energy.cols() != dimension_) {
      throw std::invalid_argument("energy matrix must be d x d");
    }
    if (!is_hermitian(mode.energy)) throw std::invalid_argument("energy matrix is not Hermitian");
    if (!is_psd(mode.energy)) throw std::invalid_argument("energy matrix is not PSD");
    if (!index_.emplace(mode.k, i).second) throw std::invalid_argument("duplicate wavevector");
  }

  conjugate_.resize(modes_.size());
  wavenumber_.resize(modes_.size());
  energy_sqrt_.reserve(modes_.size());
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const ModeSpec& mode = modes_[i];
    const auto it = index_.find(-mode.k);
    if (it == index_.end()) throw std::invalid_argument("reality symmetry: -k missing");
    const ModeSpec& partner = modes_[it->second];
    if (partner.gamma != mode.gamma) throw std::invalid_argument("reality symmetry: gamma(-k) != gamma(k)");
    const double scale = std::max(mode.energy.norm(), 1e-300);
    if ((partner.energy - mode.energy.conjugate()).norm() > 1e-12 * scale) {
      throw std::invalid_argument("reality symmetry: energy(-k) != conj(energy(k))");
    }
    conjugate_[i] = it->second;
    wavenumber_[i] = mode.k.norm();
    if (mode.k.is_representative()) representatives_.push_back(i);
    energy_sqrt_.push_back(hermitian_sqrt(mode.energy));
  }
}

std::optional<std::size_t> SpectrumModel::find(const Wavevector& k) const {
  const auto it = index_.find(k);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SpectrumModel SpectrumModel::scaled(double factor) const {
  if (!(factor >= 0.0)) throw std::invalid_argument("energy scale must be nonnegative");
  std::vector<ModeSpec> modes = modes_;
  for (auto& mode : modes) mode.energy *= factor;
  return SpectrumModel(dimension_, truncation_, std::move(modes), m_, alpha_);
}

SpectrumModel SpectrumModel::truncated(int new_truncation) const {
  std::vector<ModeSpec> modes;
  for (const auto& mode : modes_) {
    if (mode.k.max_norm() <= new_truncation) modes.push_back(mode);
  }
  return SpectrumModel(dimension_, new_truncation, std::move(modes), m_, alpha_);
}

ComplexMatrix projection_matrix(Projection p, const Wavevector& k) {
  const auto d = static_cast<Eigen::Index>(k.dimension());
  const ComplexMatrix identity = ComplexMatrix::Identity(d, d);
  if (p == Projection::full) return identity;
  Eigen::VectorXd kv(d);
  for (Eigen::Index j = 0; j < d; ++j) kv(j) = k[static_cast<std::size_t>(j)];
  const ComplexMatrix longitudinal = (kv * kv.transpose() / kv.squaredNorm()).cast<Complex>();
  return p == Projection::potential ? longitudinal : ComplexMatrix(identity - longitudinal);
}

SpectrumModel build_power_law_spectrum(const PowerLawSpectrum& params) {
  if (params.dimension < 1) throw std::invalid_argument("dimension must be >= 1");
  if (params.truncation < 1) throw std::invalid_argument("truncation K must be >= 1");
  if (!(params.sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be positive");
  if (!(params.gamma_K0 > 0.0)) throw std::invalid_argument("gamma_K0 must be positive");
  if (!(params.gamma_exp >= 1.0)) throw std::invalid_argument("gamma_exp must be >= 1");
  if (!(params.decay_p > 0.0)) throw std::invalid_argument("decay_p must be positive");

  const int d = params.dimension;
  const int K = params.truncation;
  std::vector<ModeSpec> modes;
  std::vector<int> k(static_cast<std::size_t>(d), -K);
  // Odometer over the cube [-K, K]^d.
  while (true) {
    if (std::any_of(k.begin(), k.end(), [](int c) { return c != 0; })) {
      Wavevector wv(k);
      const double r = wv.norm();
      ModeSpec mode;
      mode.k = wv;
      mode.gamma = params.gamma_K0 * std::pow(r, params.gamma_exp);
      mode.energy = params.sigma0 * std::pow(r, -params.decay_p) * projection_matrix(params.projection, wv);
      modes.push_back(std::move(mode));
    }
    std::size_t j = 0;
    while (j < k.size() && k[j] == K) k[j++] = -K;
    if (j == k.size()) break;
    ++k[j];
  }
  return SpectrumModel(d, K, std::move(modes), params.m, params.alpha);
}

double gamma_star(const SpectrumModel& model) {
  if (model.size() == 0) throw std::invalid_argument("model has no modes");
  double g = model.gamma(0);
  for (const auto& mode : model.modes()) g = std::min(g, mode.gamma);
  return g;
}

double check_h1(const SpectrumModel& model) {
  double sum = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const ModeSpec& mode = model.mode(i);
    sum += std::pow(mode.gamma, model.alpha()) * std::pow(mode.k.norm_squared(), model.m() + 1) *
           mode.energy.trace().real();
  }
  return sum;
}

H2Report check_h2(const SpectrumModel& model, double t_max, int quad_steps) {
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  if (quad_steps < 2) throw std::invalid_argument("quad_steps must be >= 2");
  auto g = [&](double t) {
    double best = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
      best = std::max(best, std::exp(-model.gamma(i) * t) * model.wavenumber(i));
    }
    return best;
  };
  const double h = t_max / quad_steps;
  double integral = 0.5 * (g(0.0) + g(t_max));
  for (int s = 1; s < quad_steps; ++s) integral += g(s * h);
  integral *= h;

  double tail = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    tail += model.wavenumber(i) * std::exp(-model.gamma(i) * t_max) / model.gamma(i);
  }
  return {integral, tail};
}

}  // namespace tracerflow
