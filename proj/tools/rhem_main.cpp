#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "rhem/pipeline.hpp"
#include "rhem/simulator.hpp"

namespace {

using rhem::ErrorCode;

const char* code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateFocalPaper: return "DuplicateFocalPaper";
    case ErrorCode::SelfReference: return "SelfReference";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::TimeRegression: return "TimeRegression";
    case ErrorCode::UnknownCovariate: return "UnknownCovariate";
    case ErrorCode::InapplicableCovariate: return "InapplicableCovariate";
    case ErrorCode::BadSubsetOrder: return "BadSubsetOrder";
    case ErrorCode::RiskSetTooSmall: return "RiskSetTooSmall";
    case ErrorCode::SingularHessian: return "SingularHessian";
    case ErrorCode::NoCaseInStratum: return "NoCaseInStratum";
    case ErrorCode::NoInformativeStrata: return "NoInformativeStrata";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IoError: return "IoError";
  }
  return "Error";
}

std::vector<rhem::CovariateSpec> parse_covariates(
    const std::vector<std::string>& names) {
  std::vector<rhem::CovariateSpec> specs;
  for (const std::string& entry : names) {
    rhem::CovariateSpec spec;
    const auto colon = entry.find(':');
    spec.name = entry.substr(0, colon);
    if (colon != std::string::npos) {
      const std::string t = entry.substr(colon + 1);
      if (t == "sqrt")
        spec.transform = rhem::Transform::Sqrt;
      else if (t == "none")
        spec.transform = rhem::Transform::None;
      else
        rhem::fail(ErrorCode::ConfigInvalid, "unknown transform: " + t);
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    rhem::fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << text;
}

std::string join_path(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) rhem::fail(ErrorCode::IoError, "cannot create " + dir);
}

rhem::EventStream load_stream(const std::string& path, rhem::InputFormat fmt,
                              rhem::IngestReport* report) {
  if (fmt == rhem::InputFormat::AminerJson) {
    rhem::IngestResult r = rhem::ingest_aminer_file(path);
    if (report) *report = std::move(r.report);
    return std::move(r.stream);
  }
  rhem::EventStream stream = rhem::read_event_tsv_file(path);
  if (report) *report = rhem::report_for_stream(stream);
  return stream;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relational hyperevent engine for scientific networks"};
  app.require_subcommand(1);

  std::string input, output, instances, config_path, format = "aminer-json";
  std::string model = "joint", ties = "efron", half_life = "3";
  std::vector<std::string> covariates;
  std::uint64_t seed = 0;
  int q = 5, bootstrap_b = 0, replicates = 200;
  bool robust = true;

  const auto parse_half_life = [&]() {
    if (half_life == "Infinite")
      return std::numeric_limits<double>::infinity();
    try {
      std::size_t used = 0;
      const double v = std::stod(half_life, &used);
      if (used == half_life.size() && v > 0) return v;
    } catch (const std::exception&) {
    }
    rhem::fail(ErrorCode::ConfigInvalid,
               "--half-life must be a positive number or Infinite");
  };

  auto* ingest = app.add_subcommand("ingest", "Read a corpus, emit canonical "
                                              "events.tsv and ingest.json");
  ingest->add_option("--input", input, "corpus file")->required();
  ingest->add_option("--format", format, "aminer-json or event-tsv");
  ingest->add_option("--output", output, "output directory")->required();

  auto* cov = app.add_subcommand(
      "covariates", "Sample controls and emit the instance table");
  cov->add_option("--input", input, "corpus file")->required();
  cov->add_option("--format", format, "aminer-json or event-tsv");
  cov->add_option("--model", model, "joint, coauthoring or citation");
  cov->add_option("--covariates", covariates,
                  "covariate names, optional :none suffix")
      ->delimiter(',');
  cov->add_option("--half-life", half_life, "decay half life or Infinite");
  cov->add_option("--q", q, "controls per event");
  cov->add_option("--seed", seed, "sampling seed")->required();
  cov->add_option("--output", output, "output directory")->required();

  auto* fit_cmd = app.add_subcommand("fit", "Fit a stratified model to an "
                                            "instance table");
  fit_cmd->add_option("--instances", instances, "instance table CSV")
      ->required();
  fit_cmd->add_option("--ties", ties, "efron or breslow");
  fit_cmd->add_flag("--robust,!--no-robust", robust, "sandwich errors");
  fit_cmd->add_option("--output", output, "output directory")->required();

  auto* contrib_cmd = app.add_subcommand(
      "contrib", "Rank covariates by likelihood contribution");
  contrib_cmd->add_option("--instances", instances, "instance table CSV")
      ->required();
  contrib_cmd->add_option("--ties", ties, "efron or breslow");
  contrib_cmd->add_option("--output", output, "output directory")->required();

  auto* boot_cmd = app.add_subcommand(
      "bootstrap", "Resample strata to check estimate stability");
  boot_cmd->add_option("--instances", instances, "instance table CSV")
      ->required();
  boot_cmd->add_option("--ties", ties, "efron or breslow");
  boot_cmd->add_option("--replicates", replicates, "bootstrap replicates");
  boot_cmd->add_option("--seed", seed, "resampling seed");
  boot_cmd->add_option("--output", output, "output directory")->required();

  int sim_events = 2000, sim_authors = 300, sim_papers = 500, candidates = 6;
  double new_author_rate = 0.0, time_start = 0.0, time_step = 0.01;
  std::vector<double> beta, team_probs{0.2, 0.3, 0.3, 0.2},
      ref_probs{0.1, 0.2, 0.3, 0.2, 0.2};
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Generate a synthetic stream with known coefficients");
  sim_cmd->add_option("--events", sim_events, "events to generate");
  sim_cmd->add_option("--seed-authors", sim_authors, "seed author pool");
  sim_cmd->add_option("--seed-papers", sim_papers, "seed paper pool");
  sim_cmd->add_option("--candidates", candidates, "candidates per event");
  sim_cmd->add_option("--model", model, "joint, coauthoring or citation");
  sim_cmd->add_option("--covariates", covariates,
                      "covariate names, optional :none suffix")
      ->delimiter(',');
  sim_cmd->add_option("--beta", beta, "true coefficients, one per covariate")
      ->delimiter(',');
  sim_cmd->add_option("--team-probs", team_probs,
                      "P(1 author), P(2 authors), ...")
      ->delimiter(',');
  sim_cmd->add_option("--ref-probs", ref_probs, "P(1 ref), P(2 refs), ...")
      ->delimiter(',');
  sim_cmd->add_option("--half-life", half_life, "decay half life or Infinite");
  sim_cmd->add_option("--new-author-rate", new_author_rate,
                      "probability a fresh author joins each event");
  sim_cmd->add_option("--time-start", time_start, "time of the seed batch");
  sim_cmd->add_option("--time-step", time_step, "spacing between events");
  sim_cmd->add_option("--seed", seed, "generator seed")->required();
  sim_cmd->add_option("--output", output, "output directory")->required();

  auto* run_cmd = app.add_subcommand("run", "Full pipeline: ingest, "
                                            "covariates, fit, reports");
  run_cmd->add_option("--config", config_path, "JSON config file");
  run_cmd->add_option("--input", input, "corpus file");
  run_cmd->add_option("--format", format, "aminer-json or event-tsv");
  run_cmd->add_option("--model", model, "joint, coauthoring or citation");
  run_cmd->add_option("--covariates", covariates,
                      "covariate names, optional :none suffix")
      ->delimiter(',');
  run_cmd->add_option("--half-life", half_life, "decay half life or Infinite");
  run_cmd->add_option("--q", q, "controls per event");
  run_cmd->add_option("--ties", ties, "efron or breslow");
  run_cmd->add_flag("--robust,!--no-robust", robust, "sandwich errors");
  run_cmd->add_option("--bootstrap", bootstrap_b,
                      "bootstrap replicates, 0 skips");
  run_cmd->add_option("--seed", seed, "sampling seed")->required();
  run_cmd->add_option("--output", output, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(ingest)) {
      make_dir(output);
      rhem::IngestReport report;
      rhem::EventStream stream =
          load_stream(input, rhem::input_format_from_name(format), &report);
      rhem::write_event_tsv_file(stream, join_path(output, "events.tsv"));
      write_file(join_path(output, "ingest.json"),
                 rhem::ingest_report_json(report));
      std::printf("kept %llu events, %llu authors, %llu papers\n",
                  (unsigned long long)report.events_kept,
                  (unsigned long long)report.authors_seen,
                  (unsigned long long)report.papers_seen);
    } else if (app.got_subcommand(cov)) {
      make_dir(output);
      rhem::EventStream stream =
          load_stream(input, rhem::input_format_from_name(format), nullptr);
      rhem::SamplingConfig scfg;
      scfg.q = q;
      scfg.seed = seed;
      scfg.model = rhem::model_from_name(model);
      auto specs = covariates.empty()
                       ? rhem::default_covariates(scfg.model)
                       : parse_covariates(covariates);
      const rhem::InstanceTable table = rhem::build_instance_table(
          stream, specs, scfg, rhem::DecayConfig{parse_half_life()});
      rhem::write_instance_csv_file(table,
                                    join_path(output, "instances.csv"));
      std::printf("%zu instances over %llu events\n", table.rows.size(),
                  (unsigned long long)table.n_events);
    } else if (app.got_subcommand(fit_cmd)) {
      make_dir(output);
      const rhem::ParsedInstances data =
          rhem::read_instance_csv_file(instances);
      rhem::FitConfig fcfg;
      fcfg.ties = rhem::tie_method_from_name(ties);
      fcfg.robust = robust;
      const rhem::FitResult fit = rhem::fit(data, fcfg);
      const std::string text = rhem::fit_report_text(fit);
      write_file(join_path(output, "fit.json"), rhem::fit_report_json(fit));
      write_file(join_path(output, "fit.txt"), text);
      std::fputs(text.c_str(), stdout);
      if (!fit.converged) {
        std::fprintf(stderr, "fit did not converge after %d iterations\n",
                     fit.iterations);
        return 1;
      }
    } else if (app.got_subcommand(contrib_cmd)) {
      make_dir(output);
      const rhem::ParsedInstances data =
          rhem::read_instance_csv_file(instances);
      rhem::FitConfig fcfg;
      fcfg.ties = rhem::tie_method_from_name(ties);
      fcfg.robust = false;
      rhem::write_contribution_csv_file(
          rhem::contribution_analysis(data, fcfg),
          join_path(output, "contrib.csv"));
    } else if (app.got_subcommand(boot_cmd)) {
      make_dir(output);
      const rhem::ParsedInstances data =
          rhem::read_instance_csv_file(instances);
      rhem::FitConfig fcfg;
      fcfg.ties = rhem::tie_method_from_name(ties);
      fcfg.robust = false;
      const rhem::BootstrapResult boot =
          rhem::bootstrap(data, fcfg, replicates, seed);
      rhem::write_bootstrap_csv_file(boot,
                                     join_path(output, "bootstrap.csv"));
      if (boot.n_failed > 0)
        std::fprintf(stderr, "%d of %d replicates failed to fit\n",
                     boot.n_failed, boot.n_requested);
    } else if (app.got_subcommand(sim_cmd)) {
      make_dir(output);
      rhem::SimConfig scfg;
      scfg.num_events = sim_events;
      scfg.num_seed_authors = sim_authors;
      scfg.num_seed_papers = sim_papers;
      scfg.candidates_per_event = candidates;
      scfg.model = rhem::model_from_name(model);
      scfg.specs = covariates.empty() ? rhem::default_covariates(scfg.model)
                                      : parse_covariates(covariates);
      scfg.true_beta = beta.empty()
                           ? std::vector<double>(scfg.specs.size(), 0.0)
                           : beta;
      scfg.team_size_probs = team_probs;
      scfg.ref_count_probs = ref_probs;
      scfg.decay = rhem::DecayConfig{parse_half_life()};
      scfg.new_author_rate = new_author_rate;
      scfg.time_start = time_start;
      scfg.time_step = time_step;
      scfg.seed = seed;
      const rhem::SimOutput sim = rhem::simulate(scfg);
      rhem::write_event_tsv_file(sim.stream, join_path(output, "events.tsv"));
      rhem::write_instance_csv_file(sim.choice_instances,
                                    join_path(output, "choices.csv"));
      nlohmann::ordered_json prov;
      prov["model"] = rhem::model_name(scfg.model);
      nlohmann::ordered_json names = nlohmann::ordered_json::array();
      for (const auto& spec : scfg.specs) names.push_back(spec.name);
      prov["covariates"] = std::move(names);
      prov["trueBeta"] = scfg.true_beta;
      prov["seed"] = scfg.seed;
      prov["numEvents"] = scfg.num_events;
      prov["numSeedAuthors"] = scfg.num_seed_authors;
      prov["numSeedPapers"] = scfg.num_seed_papers;
      prov["candidatesPerEvent"] = scfg.candidates_per_event;
      prov["teamSizeProbs"] = scfg.team_size_probs;
      prov["refCountProbs"] = scfg.ref_count_probs;
      prov["halfLife"] = scfg.decay.infinite()
                             ? nlohmann::ordered_json("Infinite")
                             : nlohmann::ordered_json(scfg.decay.half_life);
      prov["newAuthorRate"] = scfg.new_author_rate;
      prov["timeStart"] = scfg.time_start;
      prov["timeStep"] = scfg.time_step;
      write_file(join_path(output, "provenance.json"), prov.dump(2) + "\n");
      std::printf("%d events, %zu choice instances\n", scfg.num_events,
                  sim.choice_instances.rows.size());
    } else if (app.got_subcommand(run_cmd)) {
      rhem::RunConfig cfg;
      if (!config_path.empty()) cfg = rhem::read_run_config_file(config_path);
      const auto passed = [&](const char* flag) {
        return run_cmd->count(flag) > 0;
      };
      if (passed("--input")) cfg.input_path = input;
      if (passed("--format"))
        cfg.input_format = rhem::input_format_from_name(format);
      if (passed("--model")) cfg.model = rhem::model_from_name(model);
      if (passed("--covariates")) cfg.covariates = parse_covariates(covariates);
      if (passed("--half-life")) cfg.half_life = parse_half_life();
      if (passed("--q")) cfg.q = q;
      if (passed("--ties")) cfg.ties = rhem::tie_method_from_name(ties);
      if (passed("--robust")) cfg.robust = robust;
      if (passed("--bootstrap")) cfg.bootstrap_b = bootstrap_b;
      if (passed("--output")) cfg.output_dir = output;
      cfg.seed = seed;
      const rhem::FitResult fit = rhem::run_pipeline(cfg);
      std::fputs(rhem::fit_report_text(fit).c_str(), stdout);
      if (!fit.converged) {
        std::fprintf(stderr, "fit did not converge after %d iterations\n",
                     fit.iterations);
        return 1;
      }
    }
  } catch (const rhem::Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", code_name(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
