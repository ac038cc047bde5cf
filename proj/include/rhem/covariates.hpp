#pragma once

#include <span>
#include <string>
#include <vector>

#include "rhem/attributes.hpp"

namespace rhem {

// Which hyperedge space a model ranges over: author sets only, reference sets
// conditional on the observed author set, or full (authors, references) pairs.
enum class Model { Coauthoring, Citation, Joint };

std::string model_name(Model m);
Model model_from_name(const std::string& name);

enum class Transform { Sqrt, None };

struct CovariateSpec {
  std::string name;
  Transform transform = Transform::Sqrt;
};

// Registry entry for one covariate. `author_side` marks covariates that are
// functions of the author set alone; those are the only ones allowed in the
// coauthoring model and are rejected in the citation model, where the author
// set is fixed per event and such a covariate would be constant within every
// comparison group.
struct CovariateInfo {
  std::string name;
  char type_letter;  // 'A' authorship history only, 'C' citations only, 'M' mixed
  bool author_side;
  std::vector<SubsetOrder> orders;  // subset-counter orders the evaluator reads
  double (*eval)(const AttributeLedger&, std::span<const AuthorId>,
                 std::span<const PaperId>, double);
};

const std::vector<CovariateInfo>& covariate_registry();
const CovariateInfo& covariate_info(const std::string& name);

// The default covariate list of each model variant (all with sqrt transform).
std::vector<CovariateSpec> default_covariates(Model m);

// Rejects unknown names, duplicates, and covariates that are not identified
// under the given model.
void validate_specs(std::span<const CovariateSpec> specs, Model m);

// Ledger configuration covering every subset order the specs need.
LedgerConfig ledger_config_for(std::span<const CovariateSpec> specs,
                               DecayConfig decay);

// Mean subset citation count over all (k-author-subset, l-paper-subset)
// combinations; zero when either binomial is zero, rejected for (k,l)=(0,0).
double subset_repetition(const AttributeLedger& ledger,
                         std::span<const AuthorId> I, std::span<const PaperId> J,
                         int k, int l, double t);

// Evaluates the covariate vector of candidate hyperedge (I, J) at time t,
// applying each spec's transform. I and J must be sorted; the coauthoring
// model passes an empty J.
std::vector<double> compute_vector(const AttributeLedger& ledger,
                                   std::span<const CovariateSpec> specs,
                                   std::span<const AuthorId> I,
                                   std::span<const PaperId> J, double t);

double binomial(std::size_t n, std::size_t k);

}  // namespace rhem
