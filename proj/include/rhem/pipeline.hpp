#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rhem/estimator.hpp"
#include "rhem/sampling.hpp"

namespace rhem {

enum class InputFormat { AminerJson, EventTsv };

std::string input_format_name(InputFormat f);
InputFormat input_format_from_name(const std::string& name);

// Settings for an end-to-end run. The JSON config accepts exactly the
// camelCase keys named in run_config_from_json and rejects anything else.
struct RunConfig {
  std::string input_path;
  InputFormat input_format = InputFormat::AminerJson;
  Model model = Model::Joint;
  std::vector<CovariateSpec> covariates;  // empty selects the model defaults
  double half_life = 3.0;                 // +infinity disables decay
  int q = 5;
  std::uint64_t seed = 0;
  TieMethod ties = TieMethod::Efron;
  bool robust = true;
  int bootstrap_b = 0;  // 0 skips the bootstrap stage
  std::string output_dir;

  std::vector<CovariateSpec> effective_covariates() const;
  DecayConfig decay() const { return DecayConfig{half_life}; }
  void validate() const;
};

RunConfig run_config_from_json(const std::string& text);
RunConfig read_run_config_file(const std::string& path);

struct IngestReport {
  std::uint64_t events_kept = 0;
  std::uint64_t events_dropped_empty_refs = 0;
  std::uint64_t records_skipped = 0;  // unparseable or defective records
  std::uint64_t authors_seen = 0;     // distinct authors over kept events
  std::uint64_t papers_seen = 0;      // citable universe, dropped papers included
  std::uint64_t refs_dropped_out_of_corpus = 0;
  double time_min = 0;
  double time_max = 0;
  std::map<double, std::uint64_t> events_per_time;  // kept events only
};

struct IngestResult {
  EventStream stream;
  IngestReport report;
};

// Newline-delimited JSON corpus reader. Pass 1 collects the ids of journal
// records ("doc_type": "Journal"); pass 2 keeps journal records, restricts
// each reference list to collected ids, and drops events whose list becomes
// empty while leaving the paper citable. Unparseable lines and journal
// records without a usable id, year, or author list are skipped and counted.
IngestResult ingest_aminer(std::istream& in);
IngestResult ingest_aminer_file(const std::string& path);

// Report describing an already-assembled stream (TSV input skips ingestion).
IngestReport report_for_stream(const EventStream& stream);

std::string ingest_report_json(const IngestReport& report);
std::string fit_report_json(const FitResult& fit);
std::string fit_report_text(const FitResult& fit);
void write_contribution_csv_file(const ContributionResult& contrib,
                                 const std::string& path);
void write_bootstrap_csv_file(const BootstrapResult& boot,
                              const std::string& path);

// ingest -> covariates -> fit -> contribution (-> bootstrap). Writes
// ingest.json, instances.csv, fit.json, fit.txt, contrib.csv and, when
// bootstrapB > 0, bootstrap.csv under outputDir. The fit stage reads the
// instance table back from instances.csv, so that artifact alone reproduces
// the fit. Errors are rethrown with the failing stage named.
FitResult run_pipeline(const RunConfig& cfg);

}  // namespace rhem
