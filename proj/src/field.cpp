#include "tracerflow/field.hpp"

#include "tracerflow/errors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tracerflow {

namespace {

void require_same_model(const FourierField& a, const FourierField& b, const char* what) {
  if (!a.shares_model(b)) throw std::invalid_argument(std::string(what) + ": fields belong to different models");
}

// Post-step guard: finite coefficients and conjugate symmetry.
void check_state(const FourierField& f, const char* what) {
  if (!f.all_finite()) throw NumericalError(std::string(what) + ": non-finite Fourier coefficient");
  double scale2 = 0.0;
  for (const Complex& c : f.coefficients()) scale2 = std::max(scale2, std::norm(c));
  if (f.symmetry_defect() > 1e-12 * std::max(std::sqrt(scale2), 1.0)) {
    throw std::logic_error(std::string(what) + ": conjugate symmetry violated");
  }
}

// u . k for the mode at index i.
double dot_k(const SpectrumModel& model, std::size_t i, std::span<const double> u) {
  const Wavevector& k = model.mode(i).k;
  double s = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) s += u[j] * k[j];
  return s;
}

// Circular complex Gaussian with second moment scale^2 * energy(i), written to
// the representative mode i and mirrored onto its conjugate.
void draw_pair(FourierField& out, std::size_t i, double scale, RandomStream& rng) {
  const SpectrumModel& model = out.model();
  const std::size_t d = out.dimension();
  const ComplexMatrix& root = model.energy_sqrt(i);
  thread_local std::vector<Complex> w;
  w.resize(d);
  const double c = scale * std::numbers::sqrt2 / 2.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double re = rng.normal();
    const double im = rng.normal();
    w[j] = Complex(c * re, c * im);
  }
  auto target = out.mode(i);
  auto mirror = out.mode(model.conjugate(i));
  for (std::size_t r = 0; r < d; ++r) {
    Complex acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      acc += root(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) * w[j];
    }
    target[r] = acc;
    mirror[r] = std::conj(acc);
  }
}

// Transport term N(y)(k) = i (y(0).k) y(k) of the bilinear form B(y, y).
FourierField transport(const FourierField& y) {
  const auto u = value_at_origin(y);
  FourierField out(y.model_ptr());
  const SpectrumModel& model = y.model();
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double w = dot_k(model, i, u);
    auto src = y.mode(i);
    auto dst = out.mode(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = Complex(-w * src[j].imag(), w * src[j].real());
  }
  return out;
}

// Linearized transport with Z frozen: i (z0.k) U(k) + i (U(0).k) Z(k).
FourierField tangent_rhs(const FourierField& z, std::span<const double> z0, const FourierField& u) {
  const auto u0 = value_at_origin(u);
  FourierField out(u.model_ptr());
  const SpectrumModel& model = u.model();
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double a = dot_k(model, i, z0);
    const double b = dot_k(model, i, u0);
    auto zu = u.mode(i);
    auto zz = z.mode(i);
    auto dst = out.mode(i);
    for (std::size_t j = 0; j < dst.size(); ++j) {
      const Complex v = a * zu[j] + b * zz[j];
      dst[j] = Complex(-v.imag(), v.real());
    }
  }
  return out;
}

struct DecayFactors {
  std::weak_ptr<const SpectrumModel> model;
  double dt = 0.0;
  std::vector<double> full, half, noise;
};

// exp(-gamma dt), exp(-gamma dt / 2) and the OU innovation scale, cached per thread for the last model and step.
const DecayFactors& decay_factors(const ModelPtr& model, double dt) {
  thread_local DecayFactors cache;
  if (cache.dt != dt || cache.model.lock() != model) {
    cache.model = model;
    cache.dt = dt;
    cache.full.resize(model->size());
    cache.half.resize(model->size());
    cache.noise.resize(model->size());
    for (std::size_t i = 0; i < model->size(); ++i) {
      cache.full[i] = std::exp(-model->gamma(i) * dt);
      cache.half[i] = std::exp(-model->gamma(i) * dt / 2.0);
      cache.noise[i] = std::sqrt(-std::expm1(-2.0 * model->gamma(i) * dt));
    }
  }
  return cache;
}

// Integrating-factor (Lawson) RK4 for y' = -gamma y + N(y): the decay is
// exact and the four stages integrate N in the rotating frame.
template <typename Rhs>
FourierField lawson_rk4(const FourierField& y, double dt, Rhs&& rhs) {
  const SpectrumModel& model = y.model();
  const std::size_t d = y.dimension();
  const DecayFactors& factors = decay_factors(y.model_ptr(), dt);
  const std::vector<double>& e_full = factors.full;
  const std::vector<double>& e_half = factors.half;
  auto combine = [&](auto&& fn) {
    FourierField out(y.model_ptr());
    for (std::size_t i = 0; i < model.size(); ++i) {
      for (std::size_t j = 0; j < d; ++j) out(i, j) = fn(i, j);
    }
    return out;
  };

  const FourierField k1 = rhs(y);
  const FourierField k2 = rhs(combine([&](std::size_t i, std::size_t j) {
    return e_half[i] * (y(i, j) + 0.5 * dt * k1(i, j));
  }));
  const FourierField k3 = rhs(combine([&](std::size_t i, std::size_t j) {
    return e_half[i] * y(i, j) + 0.5 * dt * k2(i, j);
  }));
  const FourierField k4 = rhs(combine([&](std::size_t i, std::size_t j) {
    return e_full[i] * y(i, j) + dt * e_half[i] * k3(i, j);
  }));
  return combine([&](std::size_t i, std::size_t j) {
    return e_full[i] * y(i, j) +
           dt / 6.0 * (e_full[i] * k1(i, j) + 2.0 * e_half[i] * (k2(i, j) + k3(i, j)) + k4(i, j));
  });
}

}  // namespace

FourierField::FourierField(ModelPtr model) : model_(std::move(model)) {
  if (!model_) throw std::invalid_argument("FourierField requires a model");
  dim_ = static_cast<std::size_t>(model_->dimension());
  coeffs_.assign(model_->size() * dim_, Complex(0.0, 0.0));
}

void FourierField::mirror_conjugates() {
  for (std::size_t i : model_->representatives()) {
    auto src = mode(i);
    auto dst = mode(model_->conjugate(i));
    for (std::size_t j = 0; j < dim_; ++j) dst[j] = std::conj(src[j]);
  }
}

double FourierField::symmetry_defect() const {
  double defect = 0.0;
  for (std::size_t i : model_->representatives()) {
    auto a = mode(i);
    auto b = mode(model_->conjugate(i));
    for (std::size_t j = 0; j < dim_; ++j) defect = std::max(defect, std::norm(b[j] - std::conj(a[j])));
  }
  return std::sqrt(defect);
}

bool FourierField::all_finite() const {
  for (const Complex& c : coeffs_) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  }
  return true;
}

FourierField& FourierField::operator+=(const FourierField& other) {
  require_same_model(*this, other, "operator+=");
  for (std::size_t n = 0; n < coeffs_.size(); ++n) coeffs_[n] += other.coeffs_[n];
  return *this;
}

FourierField& FourierField::operator-=(const FourierField& other) {
  require_same_model(*this, other, "operator-=");
  for (std::size_t n = 0; n < coeffs_.size(); ++n) coeffs_[n] -= other.coeffs_[n];
  return *this;
}

FourierField& FourierField::operator*=(double s) {
  for (Complex& c : coeffs_) c *= s;
  return *this;
}

double sobolev_norm(const FourierField& f, double r) {
  const SpectrumModel& model = f.model();
  double sum = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    double mode_sq = 0.0;
    for (const Complex& c : f.mode(i)) mode_sq += std::norm(c);
    if (mode_sq == 0.0) continue;
    sum += std::pow(model.wavenumber(i), 2.0 * r) * mode_sq;
  }
  return std::sqrt(sum);
}

Complex sobolev_inner(const FourierField& f, const FourierField& g, double r) {
  require_same_model(f, g, "sobolev_inner");
  const SpectrumModel& model = f.model();
  Complex sum = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    Complex mode_sum = 0.0;
    auto a = f.mode(i);
    auto b = g.mode(i);
    for (std::size_t j = 0; j < a.size(); ++j) mode_sum += a[j] * std::conj(b[j]);
    sum += std::pow(model.wavenumber(i), 2.0 * r) * mode_sum;
  }
  return sum;
}

FourierField apply_semigroup(const FourierField& f, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("apply_semigroup: t must be nonnegative");
  FourierField out = f;
  if (t == 0.0) return out;
  const DecayFactors& factors = decay_factors(f.model_ptr(), t);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (Complex& c : out.mode(i)) c *= factors.full[i];
  }
  return out;
}

void plane_waves(const SpectrumModel& model, std::span<const double> xi, std::span<Complex> out) {
  const auto d = static_cast<std::size_t>(model.dimension());
  const auto K = static_cast<std::size_t>(model.truncation());
  if (xi.size() != d) throw std::invalid_argument("plane_waves: point dimension mismatch");
  if (out.size() != model.size()) throw std::invalid_argument("plane_waves: output size mismatch");
  const std::size_t width = 2 * K + 1;
  thread_local std::vector<Complex> table;
  table.resize(d * width);
  for (std::size_t j = 0; j < d; ++j) {
    Complex* row = table.data() + j * width + K;
    row[0] = 1.0;
    for (std::size_t n = 1; n <= K; ++n) {
      row[n] = std::polar(1.0, static_cast<double>(n) * xi[j]);
      row[-static_cast<std::ptrdiff_t>(n)] = std::conj(row[n]);
    }
  }
  for (std::size_t i = 0; i < model.size(); ++i) {
    const Wavevector& k = model.mode(i).k;
    Complex w = table[static_cast<std::size_t>(k[0] + static_cast<int>(K))];
    for (std::size_t j = 1; j < d; ++j) w *= table[j * width + static_cast<std::size_t>(k[j] + static_cast<int>(K))];
    out[i] = w;
  }
}

void evaluate_into(const FourierField& f, std::span<const double> xi, std::span<double> value,
                   std::span<double> jacobian) {
  const SpectrumModel& model = f.model();
  const std::size_t d = f.dimension();
  if (value.size() != d) throw std::invalid_argument("evaluate: value buffer size mismatch");
  const bool want_jac = !jacobian.empty();
  if (want_jac && jacobian.size() != d * d) throw std::invalid_argument("evaluate: jacobian buffer size mismatch");

  thread_local std::vector<Complex> waves;
  thread_local std::vector<Complex> sum;
  thread_local std::vector<Complex> jac;
  waves.resize(model.size());
  plane_waves(model, xi, waves);
  sum.assign(d, Complex(0.0, 0.0));
  if (want_jac) jac.assign(d * d, Complex(0.0, 0.0));

  double x0_sq = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    auto c = f.mode(i);
    const Wavevector& k = model.mode(i).k;
    for (std::size_t r = 0; r < d; ++r) {
      const Complex term = c[r] * waves[i];
      x0_sq += std::norm(c[r]);
      sum[r] += term;
      if (want_jac) {
        const Complex iterm(-term.imag(), term.real());
        for (std::size_t j = 0; j < d; ++j) jac[r * d + j] += static_cast<double>(k[j]) * iterm;
      }
    }
  }
  const double bound = 1e-10 * std::sqrt(x0_sq);
  for (std::size_t r = 0; r < d; ++r) {
    if (std::abs(sum[r].imag()) > bound) {
      throw std::logic_error("evaluate: imaginary residue exceeds bound (conjugate symmetry broken)");
    }
    value[r] = sum[r].real();
  }
  if (want_jac) {
    for (std::size_t n = 0; n < d * d; ++n) jacobian[n] = jac[n].real();
  }
}

PointValue evaluate(const FourierField& f, std::span<const double> xi, bool with_jacobian) {
  PointValue pv;
  pv.value.resize(f.dimension());
  if (with_jacobian) pv.jacobian.resize(f.dimension() * f.dimension());
  evaluate_into(f, xi, pv.value, pv.jacobian);
  return pv;
}

std::vector<double> value_at_origin(const FourierField& f) {
  std::vector<double> u(f.dimension(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto c = f.mode(i);
    for (std::size_t j = 0; j < u.size(); ++j) u[j] += c[j].real();
  }
  return u;
}

FourierField sample_stationary(const ModelPtr& model, RandomStream& rng) {
  FourierField out(model);
  for (std::size_t i : model->representatives()) draw_pair(out, i, 1.0, rng);
  return out;
}

FourierField ou_noise(const ModelPtr& model, double dt, RandomStream& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("ou_noise: dt must be positive");
  FourierField out(model);
  const DecayFactors& factors = decay_factors(model, dt);
  for (std::size_t i : model->representatives()) draw_pair(out, i, factors.noise[i], rng);
  return out;
}

OUState ou_exact_step(const OUState& state, double dt, RandomStream& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("ou_exact_step: dt must be positive");
  OUState next{apply_semigroup(state.field, dt), state.time + dt};
  next.field += ou_noise(state.field.model_ptr(), dt, rng);
  check_state(next.field, "ou_exact_step");
  return next;
}

ComplexMatrix covariance_oracle(const SpectrumModel& model, double h, const Wavevector& k) {
  if (!(h >= 0.0)) throw std::invalid_argument("covariance_oracle: lag must be nonnegative");
  const auto i = model.find(k);
  if (!i) throw std::out_of_range("covariance_oracle: unknown wavevector");
  return std::exp(-model.gamma(*i) * h) * model.mode(*i).energy;
}

FourierField bilinear_B(const FourierField& psi, const FourierField& phi) {
  require_same_model(psi, phi, "bilinear_B");
  const auto u = value_at_origin(psi);
  FourierField out(phi.model_ptr());
  const SpectrumModel& model = phi.model();
  for (std::size_t i = 0; i < model.size(); ++i) {
    const Complex factor(0.0, dot_k(model, i, u));
    auto src = phi.mode(i);
    auto dst = out.mode(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = factor * src[j];
  }
  return out;
}

FourierField y_flow_step(const FourierField& f, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("y_flow_step: dt must be positive");
  FourierField next = lawson_rk4(f, dt, transport);
  check_state(next, "y_flow_step");
  return next;
}

FourierField z_galerkin_step(const FourierField& f, double dt, const FourierField& noise, bool transport_on) {
  if (!(dt > 0.0)) throw std::invalid_argument("z_galerkin_step: dt must be positive");
  require_same_model(f, noise, "z_galerkin_step");
  const SpectrumModel& model = f.model();
  std::vector<double> u(f.dimension(), 0.0);
  if (transport_on) u = value_at_origin(f);
  FourierField next(f.model_ptr());
  for (std::size_t i = 0; i < model.size(); ++i) {
    const Complex propagator = std::polar(std::exp(-model.gamma(i) * dt), dot_k(model, i, u) * dt);
    auto src = f.mode(i);
    auto eta = noise.mode(i);
    auto dst = next.mode(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = propagator * src[j] + eta[j];
  }
  check_state(next, "z_galerkin_step");
  return next;
}

FourierField z_galerkin_step(const FourierField& f, double dt, RandomStream& rng, bool transport_on) {
  return z_galerkin_step(f, dt, ou_noise(f.model_ptr(), dt, rng), transport_on);
}

FourierField tangent_step(const FourierField& z, const FourierField& u_tan, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("tangent_step: dt must be positive");
  require_same_model(z, u_tan, "tangent_step");
  const auto z0 = value_at_origin(z);
  FourierField next = lawson_rk4(u_tan, dt, [&](const FourierField& u) { return tangent_rhs(z, z0, u); });
  check_state(next, "tangent_step");
  return next;
}

double embedding_constant(const SpectrumModel& model) {
  double c = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double r = model.wavenumber(i);
    c += (1.0 + r) * std::pow(r, -static_cast<double>(model.m()));
  }
  return c;
}

}  // namespace tracerflow
