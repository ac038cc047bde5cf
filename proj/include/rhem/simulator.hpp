#pragma once

#include <cstdint>
#include <vector>

#include "rhem/sampling.hpp"

namespace rhem {

// Synthetic-stream generator with known coefficients. Each step draws a set
// of distinct candidate hyperedges uniformly (exactly like control sampling)
// and publishes one of them with probability proportional to
// exp(trueBeta . x). Conditional on the drawn candidate set, the winner
// follows the same likelihood the estimator maximizes, so fits of the
// emitted choice table target trueBeta exactly.
struct SimConfig {
  int num_seed_authors = 300;
  int num_seed_papers = 500;
  int num_events = 2000;
  // team_size_probs[k] is the probability of k+1 authors; likewise for refs.
  std::vector<double> team_size_probs;
  std::vector<double> ref_count_probs;
  std::vector<CovariateSpec> specs;
  std::vector<double> true_beta;  // aligned to specs
  Model model = Model::Joint;
  int candidates_per_event = 6;  // C
  double new_author_rate = 0.0;
  std::uint64_t seed = 0;
  double time_start = 0.0;
  double time_step = 0.01;
  DecayConfig decay;

  void validate() const;
};

struct SimOutput {
  EventStream stream;  // seed batch at time_start, then one event per step
  std::vector<double> true_beta;
  // The generator's own candidate sets as a case-control table: winner =
  // case, remaining candidates = controls. Seed events are not included.
  InstanceTable choice_instances;
};

SimOutput simulate(const SimConfig& cfg);

}  // namespace rhem
