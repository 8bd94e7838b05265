#include "tracerflow/chain.hpp"

#include "tracerflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace tracerflow::chain {

double t_map(double x) { return -(x + 1.0) / 2.0 - 1.0; }

double climb_probability(double x) { return std::exp(-1.0 / (x * x)); }

namespace {

// 1 - exp(-1/x^2) without cancellation for large x.
double jump_probability(double x) { return -std::expm1(-1.0 / (x * x)); }

}  // namespace

double kernel_step(double x, RandomStream& rng) {
  if (!std::isfinite(x)) throw std::invalid_argument("kernel_step: non-finite state");
  if (x >= 1.0) return rng.uniform() < climb_probability(x) ? x + 1.0 : -x;
  return t_map(x);
}

double ChainDistribution::total_mass() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.probability;
  return s;
}

double ChainDistribution::expect(const Observable& f) const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.probability * f(a.value);
  return s;
}

double ChainDistribution::mass_where(const std::function<bool(double)>& pred) const {
  double s = 0.0;
  for (const auto& a : atoms) {
    if (pred(a.value)) s += a.probability;
  }
  return s;
}

ChainDistribution propagate(const ChainDistribution& dist) {
  std::map<double, double> next;
  for (const auto& [value, p] : dist.atoms) {
    if (p == 0.0) continue;
    if (value >= 1.0) {
      next[value + 1.0] += p * climb_probability(value);
      next[-value] += p * jump_probability(value);
    } else {
      next[t_map(value)] += p;
    }
  }
  ChainDistribution out;
  out.atoms.reserve(next.size());
  for (const auto& [value, p] : next) out.atoms.push_back({value, p});
  return out;
}

ChainDistribution pn_distribution(double x, int n) {
  if (n < 0) throw std::invalid_argument("pn_distribution: n must be >= 0");
  if (n > kMaxExactDepth) throw std::out_of_range("pn_distribution: depth overflow (n > 60)");
  ChainDistribution dist{{{x, 1.0}}};
  for (int step = 0; step < n; ++step) dist = propagate(dist);
  return dist;
}

double pn_exact(double x, int n, const Observable& f) { return pn_distribution(x, n).expect(f); }

LadderWeights h_g_values(double x, int n) {
  if (!(x >= 1.0)) throw std::invalid_argument("h_g_values: x must be >= 1");
  if (n < 0) throw std::invalid_argument("h_g_values: n must be >= 0");
  LadderWeights w;
  w.H.reserve(static_cast<std::size_t>(n) + 1);
  w.G.reserve(static_cast<std::size_t>(n));
  double exponent = 0.0;
  w.H.push_back(1.0);
  for (int k = 0; k < n; ++k) {
    const double y = x + k;
    w.G.push_back(jump_probability(y) * w.H.back());
    exponent += 1.0 / (y * y);
    w.H.push_back(std::exp(-exponent));
  }
  return w;
}

double inverse_square_sum(double x, double* tail_error) {
  if (!(x > 0.0)) throw std::invalid_argument("inverse_square_sum: x must be positive");
  // Kahan-summed head.
  double sum = 0.0;
  double carry = 0.0;
  double z = x;
  while (z < 40.0) {
    const double term = 1.0 / (z * z) - carry;
    const double t = sum + term;
    carry = (t - sum) - term;
    sum = t;
    z += 1.0;
  }
  // Asymptotic tail sum_{j>=0} (z+j)^-2 = 1/z + 1/(2z^2) + sum B_{2r} / z^{2r+1}.
  const double iz = 1.0 / z;
  const double iz2 = iz * iz;
  constexpr double bernoulli[] = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0};
  double tail = iz + 0.5 * iz2;
  double power = iz2 * iz;
  for (double b : bernoulli) {
    tail += b * power;
    power *= iz2;
  }
  if (tail_error) *tail_error = (691.0 / 2730.0) * power;  // first omitted term
  return sum + tail;
}

double h_infinity(double x) {
  if (!(x >= 1.0)) throw std::invalid_argument("h_infinity: x must be >= 1");
  return std::exp(-inverse_square_sum(x));
}

double pn_closed(double x, int n, const Observable& f) {
  if (!(x >= 1.0)) throw std::invalid_argument("pn_closed: x must be >= 1");
  if (n < 1) throw std::invalid_argument("pn_closed: n must be >= 1");
  const LadderWeights w = h_g_values(x, n);
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    double y = -x - k;
    for (int r = 0; r < n - 1 - k; ++r) y = t_map(y);
    sum += f(y) * w.G[static_cast<std::size_t>(k)];
  }
  return sum + w.H[static_cast<std::size_t>(n)] * f(x + n);
}

int poisson_truncation(double t, double tail) {
  int n = static_cast<int>(std::ceil(t + 10.0 * std::sqrt(t) + 20.0));
  if (t == 0.0) return 0;
  // Chernoff: P(N > n) <= exp(-t) (e t / n)^n for n > t.
  auto log_bound = [t](int k) { return -t + k * (1.0 + std::log(t / k)); };
  while (log_bound(n) > std::log(tail)) ++n;
  return n;
}

double pt_poisson(double x, double t, const Observable& f, double tol, double sup_norm) {
  if (!(tol > 0.0)) throw std::invalid_argument("pt_poisson: tol must be positive");
  if (!(t >= 0.0)) throw std::invalid_argument("pt_poisson: t must be nonnegative");
  if (t == 0.0) return f(x);
  const int n_max = poisson_truncation(t, tol / (2.0 * std::max(sup_norm, 1e-300)));
  if (n_max > 1000) throw std::out_of_range("pt_poisson: t too large for exact propagation");
  ChainDistribution dist{{{x, 1.0}}};
  double log_weight = -t;  // log(e^{-t} t^n / n!)
  double sum = std::exp(log_weight) * f(x);
  for (int n = 1; n <= n_max; ++n) {
    dist = propagate(dist);
    log_weight += std::log(t) - std::log(static_cast<double>(n));
    sum += std::exp(log_weight) * dist.expect(f);
  }
  return sum;
}

MonteCarloEstimate simulate(double x, int n, const Observable& f, std::uint64_t paths, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("simulate: n must be >= 0");
  if (paths < 2) throw std::invalid_argument("simulate: need at least two paths");
  const auto steps = static_cast<std::size_t>(n) + 1;
  std::vector<double> sum(steps, 0.0), sum_sq(steps, 0.0);
  RandomStream rng(seed);
  for (std::uint64_t p = 0; p < paths; ++p) {
    double state = x;
    for (std::size_t k = 0; k < steps; ++k) {
      if (k > 0) state = kernel_step(state, rng);
      const double v = f(state);
      sum[k] += v;
      sum_sq[k] += v * v;
    }
  }
  MonteCarloEstimate est;
  const double np = static_cast<double>(paths);
  for (std::size_t k = 0; k < steps; ++k) {
    const double mu = sum[k] / np;
    const double var = std::max(0.0, (sum_sq[k] - np * mu * mu) / (np - 1.0));
    est.mean.push_back(mu);
    est.stderr_of_mean.push_back(std::sqrt(var / np));
  }
  return est;
}

ProbeReport chain_probes(double x, const ProbeOptions& options, const Observable& f) {
  if (options.n_max < 1 || options.n_max > 40) throw std::invalid_argument("chain_probes: n_max must be in [1, 40]");
  ProbeReport report;
  report.x = x;
  report.ys = options.ys;

  std::vector<double> px;
  ChainDistribution dist{{{x, 1.0}}};
  for (int n = 0; n <= options.n_max; ++n) {
    if (n > 0) dist = propagate(dist);
    px.push_back(dist.expect(f));
    report.gap_mass_max = std::max(report.gap_mass_max, dist.mass_where(in_gap));
    if (x >= 1.0) {
      const double top = x + n;
      report.never_jumped.push_back(dist.mass_where([top](double v) { return v == top; }));
    }
  }
  for (double y : options.ys) {
    ChainDistribution dy{{{y, 1.0}}};
    double worst = 0.0;
    for (int n = 1; n <= options.n_max; ++n) {
      dy = propagate(dy);
      worst = std::max(worst, std::abs(px[static_cast<std::size_t>(n)] - dy.expect(f)));
    }
    report.sup_differences.push_back(worst);
  }

  if (x >= 1.0) {
    report.ladder_H = h_g_values(x, options.n_max).H;
    report.h_inf = h_infinity(x);
  }

  if (options.mc_paths >= 2 && options.mc_steps > 0) {
    report.mc_steps = options.mc_steps;
    RandomStream rng(options.seed);
    std::vector<double> escaped, climbed;
    escaped.reserve(options.mc_paths);
    climbed.reserve(options.mc_paths);
    for (std::uint64_t p = 0; p < options.mc_paths; ++p) {
      double state = x;
      bool never_jumped = x >= 1.0;
      for (int k = 0; k < options.mc_steps; ++k) {
        const double next = kernel_step(state, rng);
        if (next != state + 1.0) never_jumped = false;
        state = next;
      }
      escaped.push_back(std::abs(state) > options.radius ? 1.0 : 0.0);
      climbed.push_back(never_jumped ? 1.0 : 0.0);
    }
    report.mc_escape_fraction = mean(escaped);
    report.mc_escape_stderr = standard_error(escaped);
    report.mc_never_jumped = mean(climbed);
    report.mc_never_jumped_stderr = standard_error(climbed);
    if (x >= 1.0) report.exact_H_at_mc_steps = h_g_values(x, options.mc_steps).H.back();
  }
  return report;
}

}  // namespace tracerflow::chain
