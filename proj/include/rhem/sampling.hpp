#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rhem/covariates.hpp"
#include "rhem/events.hpp"
#include "rhem/rng.hpp"

namespace rhem {

struct SamplingConfig {
  int q = 5;
  std::uint64_t seed = 0;
  Model model = Model::Joint;
  int max_rejections = 1000;

  void validate() const;
};

using Hyperedge = std::pair<std::vector<AuthorId>, std::vector<PaperId>>;

struct ControlDraw {
  std::vector<Hyperedge> controls;
  // Fewer than q distinct non-case candidates exist in the risk set.
  bool short_stratum = false;
  // Collisions with already-drawn candidates (or the case) that were redrawn.
  int rejections = 0;
  // Gave up after max_rejections collisions with controls still missing.
  bool exhausted = false;
};

// Draws up to q control hyperedges for one event: author sets uniform over
// C(authors-at-risk, |I|), reference sets uniform over C(papers-at-risk minus
// the event's own focal paper, |J|). The coauthoring model draws author sets
// only; the citation model keeps the event's author set and draws references
// only. Controls are distinct from each other and from the case.
ControlDraw sample_controls(const RiskSetState& risk, const Event& ev,
                            const SamplingConfig& cfg, Rng& rng);

struct Instance {
  std::uint32_t event_index = 0;
  double time = 0;
  std::string stratum;
  bool is_case = false;
  std::vector<AuthorId> authors;
  std::vector<PaperId> refs;
  std::vector<double> covariates;
};

struct InstanceTable {
  Model model = Model::Joint;
  std::vector<CovariateSpec> specs;
  std::vector<Instance> rows;
  std::uint64_t n_events = 0;
  std::uint64_t short_events = 0;      // events with structurally < q controls
  std::uint64_t exhausted_events = 0;  // events that hit max_rejections
};

// Comparison-group label shared by an event's case and controls: time and
// candidate set sizes, which index the baseline rate.
std::string stratum_label(Model model, double time, std::size_t n_authors,
                          std::size_t n_refs);

// One pass over the stream: per timestamp batch, the risk set is advanced
// first, then every event in the batch gets its case and sampled controls
// evaluated against the ledger state holding strictly earlier events only,
// and finally the batch is applied to the ledger.
InstanceTable build_instance_table(const EventStream& stream,
                                   std::span<const CovariateSpec> specs,
                                   const SamplingConfig& cfg, DecayConfig decay);

void write_instance_csv(const InstanceTable& table, std::ostream& out);
void write_instance_csv_file(const InstanceTable& table, const std::string& path);

// The estimator-facing view of an instance table file.
struct ParsedRow {
  std::uint32_t event_index = 0;
  double time = 0;
  std::string stratum;
  bool is_case = false;
  std::uint32_t n_authors = 0;
  std::uint32_t n_refs = 0;
  std::vector<double> x;
};

struct ParsedInstances {
  std::vector<std::string> covariate_names;
  std::vector<ParsedRow> rows;
};

// In-memory equivalent of write + read, used when no artifact is wanted.
ParsedInstances to_parsed(const InstanceTable& table);

ParsedInstances read_instance_csv(std::istream& in);
ParsedInstances read_instance_csv_file(const std::string& path);

}  // namespace rhem
