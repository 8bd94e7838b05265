#pragma once

#include "tracerflow/random.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace tracerflow::chain {

using Observable = std::function<double(double)>;

/// Deterministic branch: T(x) = -(x+1)/2 - 1. Fixed point -1.
double t_map(double x);

/// Probability of climbing x -> x+1 from x >= 1, exp(-1/x^2).
double climb_probability(double x);

/// One transition. For x >= 1: x+1 with probability exp(-1/x^2), else -x.
/// For x < 1 (the declared space plus the gap (-1,1) that T reaches):
/// deterministic T(x).
double kernel_step(double x, RandomStream& rng);

inline bool in_gap(double x) { return x > -1.0 && x < 1.0; }

struct Atom {
  double value;
  double probability;
};

/// Exact law of the chain after some number of steps: finitely many atoms,
/// atoms with equal values merged.
struct ChainDistribution {
  std::vector<Atom> atoms;

  double total_mass() const;
  double expect(const Observable& f) const;
  double mass_where(const std::function<bool(double)>& pred) const;
};

/// Exact one-step push-forward of a distribution.
ChainDistribution propagate(const ChainDistribution& dist);

/// P^n delta_x by exact enumeration of the reachable tree. n <= 60.
ChainDistribution pn_distribution(double x, int n);

constexpr int kMaxExactDepth = 60;

/// Exact P^n f(x) from the enumerated tree.
double pn_exact(double x, int n, const Observable& f);

struct LadderWeights {
  std::vector<double> H;  // H_0 .. H_n
  std::vector<double> G;  // G_0 .. G_{n-1}
};

/// H_k(x) = exp(-sum_{j<k} (x+j)^-2) and G_k(x) = (1 - exp(-(x+k)^-2)) H_k(x).
LadderWeights h_g_values(double x, int n);

/// lim H_n(x) = exp(-sum_{j>=0} (x+j)^-2), x >= 1.
double h_infinity(double x);

/// sum_{j>=0} (x+j)^-2 (the trigamma function) by direct Kahan summation up to
/// x+N >= 40 and the asymptotic tail series; `tail_error` receives a bound on
/// the truncation error of the tail series.
double inverse_square_sum(double x, double* tail_error = nullptr);

/// Closed-form ladder expansion of P^n f(x), x >= 1, n >= 1:
/// sum_k f(T^{n-1-k}(-x-k)) G_k(x) + H_n(x) f(x+n).
double pn_closed(double x, int n, const Observable& f);

/// Poisson truncation depth: smallest N >= ceil(t + 10 sqrt(t) + 20) whose
/// Chernoff tail bound is below `tail`.
int poisson_truncation(double t, double tail);

/// P_t f(x) = sum_n e^{-t} t^n / n! P^n f(x), truncated so that the Poisson
/// tail mass is below tol / (2 ||f||_inf). `sup_norm` is ||f||_inf.
double pt_poisson(double x, double t, const Observable& f, double tol = 1e-10, double sup_norm = 1.0);

struct MonteCarloEstimate {
  std::vector<double> mean;    // per step 0..n
  std::vector<double> stderr_of_mean;
};

/// Simulates `paths` independent paths of n steps, averaging f(X_k) for k=0..n.
MonteCarloEstimate simulate(double x, int n, const Observable& f, std::uint64_t paths, std::uint64_t seed);

struct ProbeReport {
  double x = 0.0;
  std::vector<double> ys;
  std::vector<double> sup_differences;   // max_{1<=n<=n_max} |P^n f(x) - P^n f(y)|
  std::vector<double> never_jumped;      // exact tree mass at x+n, n = 0..n_max
  std::vector<double> ladder_H;          // H_n(x), n = 0..n_max
  double h_inf = 0.0;
  double gap_mass_max = 0.0;             // max over n of exact mass in (-1, 1)
  // Monte-Carlo at step mc_steps.
  int mc_steps = 0;
  double mc_escape_fraction = 0.0;       // |X_n| > R
  double mc_escape_stderr = 0.0;
  double mc_never_jumped = 0.0;
  double mc_never_jumped_stderr = 0.0;
  double exact_H_at_mc_steps = 0.0;
};

struct ProbeOptions {
  int n_max = 40;
  double radius = 10.0;
  std::vector<double> ys;
  int mc_steps = 100;
  std::uint64_t mc_paths = 100000;
  std::uint64_t seed = 1;
};

ProbeReport chain_probes(double x, const ProbeOptions& options, const Observable& f);

}  // namespace tracerflow::chain
