#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rhem/sampling.hpp"

namespace rhem {

enum class TieMethod { Efron, Breslow };

std::string tie_method_name(TieMethod t);
TieMethod tie_method_from_name(const std::string& name);

struct FitConfig {
  int max_iterations = 50;
  double rel_tolerance = 1e-9;  // on |delta logLik| / (|logLik| + 1)
  TieMethod ties = TieMethod::Efron;
  bool robust = true;
  double ridge = 0.0;  // fallback L2 penalty; reported logLik stays unpenalized

  void validate() const;
};

struct FitResult {
  std::vector<std::string> covariate_names;
  std::vector<double> beta;
  std::vector<double> se_model;
  std::vector<double> se_robust;  // empty unless robust
  double log_lik = 0;
  double log_lik_null = 0;
  double aic = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
  std::uint64_t n_events = 0;
  std::uint64_t n_instances = 0;
  std::uint64_t n_groups = 0;
  std::uint64_t n_informative = 0;
};

// Instances sharing one stratum label: the case(s) and their sampled controls.
// Groups without a control cannot discriminate and are skipped by the fit.
struct StratumGroup {
  std::string stratum;
  std::vector<std::uint32_t> cases;
  std::vector<std::uint32_t> pool;  // all row indices, cases included
  bool informative = false;
};

std::vector<StratumGroup> group_strata(const ParsedInstances& data);

struct Likelihood {
  double value = 0;
  std::vector<double> grad;  // length p
  std::vector<double> hess;  // p x p, row major
};

Likelihood log_partial_likelihood(const ParsedInstances& data,
                                  std::span<const double> beta, TieMethod ties);

FitResult fit(const ParsedInstances& data, const FitConfig& cfg);

struct ContributionRow {
  std::string name;
  double gain_over_null = 0;    // single-covariate logLik minus null logLik
  double loss_if_dropped = 0;   // full logLik minus leave-one-out logLik
};

struct ContributionResult {
  std::vector<ContributionRow> rows;  // ordered by gain_over_null descending
  double log_lik_full = 0;
  double log_lik_null = 0;
};

ContributionResult contribution_analysis(const ParsedInstances& data,
                                         const FitConfig& cfg);

struct BootstrapResult {
  std::vector<std::string> covariate_names;
  std::vector<double> full_beta;
  std::vector<std::vector<double>> estimates;  // one row per successful replicate
  int n_requested = 0;
  int n_failed = 0;
  // Per covariate: share of successful replicates whose estimate has the same
  // sign as the full-data estimate.
  std::vector<double> sign_agreement;
};

// Resamples stratum groups with replacement, refitting on each replicate with
// the full-data estimate as warm start.
BootstrapResult bootstrap(const ParsedInstances& data, const FitConfig& cfg,
                          int replicates, std::uint64_t seed);

// Deterministic variant: replicate r uses exactly group_indices[r] (indices
// into the stratum-group list in group_strata order, multiplicity =
// repetition).
BootstrapResult bootstrap_with_indices(
    const ParsedInstances& data, const FitConfig& cfg,
    const std::vector<std::vector<std::uint32_t>>& group_indices);

}  // namespace rhem
