#include "rhem/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <unordered_set>

namespace rhem {

namespace {

using json = nlohmann::ordered_json;

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << text;
  if (!out) fail(ErrorCode::IoError, "write to " + path + " failed");
}

template <class Fn>
void with_stage(const char* stage, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    fail(e.code(), std::string(stage) + " stage: " + e.what());
  }
}

}  // namespace

std::string input_format_name(InputFormat f) {
  return f == InputFormat::AminerJson ? "aminer-json" : "event-tsv";
}

InputFormat input_format_from_name(const std::string& name) {
  if (name == "aminer-json") return InputFormat::AminerJson;
  if (name == "event-tsv") return InputFormat::EventTsv;
  fail(ErrorCode::ConfigInvalid, "unknown input format: " + name);
}

std::vector<CovariateSpec> RunConfig::effective_covariates() const {
  return covariates.empty() ? default_covariates(model) : covariates;
}

void RunConfig::validate() const {
  if (input_path.empty())
    fail(ErrorCode::ConfigInvalid, "inputPath must not be empty");
  if (output_dir.empty())
    fail(ErrorCode::ConfigInvalid, "outputDir must not be empty");
  if (!(half_life > 0))
    fail(ErrorCode::ConfigInvalid, "halfLife must be positive or Infinite");
  if (q < 1) fail(ErrorCode::ConfigInvalid, "q must be at least 1");
  if (bootstrap_b < 0)
    fail(ErrorCode::ConfigInvalid, "bootstrapB must be non-negative");
  validate_specs(effective_covariates(), model);
}

namespace {

const json& expect(const json& j, const char* key, json::value_t type,
                   const char* type_name) {
  const json& v = j.at(key);
  const bool numeric_ok = type == json::value_t::number_integer &&
                          (v.is_number_integer() || v.is_number_unsigned());
  if (v.type() != type && !numeric_ok)
    fail(ErrorCode::ConfigInvalid,
         std::string("config key ") + key + " must be a " + type_name);
  return v;
}

std::string get_string(const json& j, const char* key) {
  return expect(j, key, json::value_t::string, "string").get<std::string>();
}

long long get_int(const json& j, const char* key) {
  return expect(j, key, json::value_t::number_integer, "integer")
      .get<long long>();
}

}  // namespace

RunConfig run_config_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    fail(ErrorCode::ConfigInvalid, "config is not a JSON object");
  static const std::set<std::string> known = {
      "version",  "inputPath", "inputFormat", "model",
      "covariates", "halfLife", "q",          "seed",
      "tieMethod", "robust",    "bootstrapB", "outputDir"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key))
      fail(ErrorCode::ConfigInvalid, "unknown config key: " + key);
  }
  for (const char* key : {"inputPath", "outputDir"})
    if (!j.contains(key))
      fail(ErrorCode::MissingField, std::string("config key ") + key +
                                        " is required");

  RunConfig cfg;
  if (j.contains("version") && get_int(j, "version") != 1)
    fail(ErrorCode::ConfigInvalid, "unsupported config version");
  cfg.input_path = get_string(j, "inputPath");
  cfg.output_dir = get_string(j, "outputDir");
  if (j.contains("inputFormat"))
    cfg.input_format = input_format_from_name(get_string(j, "inputFormat"));
  if (j.contains("model")) cfg.model = model_from_name(get_string(j, "model"));
  if (j.contains("covariates")) {
    const json& list = expect(j, "covariates", json::value_t::array, "list");
    for (const json& item : list) {
      CovariateSpec spec;
      if (item.is_string()) {
        spec.name = item.get<std::string>();
      } else if (item.is_object()) {
        spec.name = get_string(item, "name");
        if (item.contains("transform")) {
          const std::string t = get_string(item, "transform");
          if (t == "sqrt")
            spec.transform = Transform::Sqrt;
          else if (t == "none")
            spec.transform = Transform::None;
          else
            fail(ErrorCode::ConfigInvalid, "unknown transform: " + t);
        }
        for (const auto& [key, value] : item.items()) {
          (void)value;
          if (key != "name" && key != "transform")
            fail(ErrorCode::ConfigInvalid,
                 "unknown covariate entry key: " + key);
        }
      } else {
        fail(ErrorCode::ConfigInvalid,
             "covariates entries must be names or {name, transform} objects");
      }
      cfg.covariates.push_back(std::move(spec));
    }
  }
  if (j.contains("halfLife")) {
    const json& h = j.at("halfLife");
    if (h.is_string() && h.get<std::string>() == "Infinite")
      cfg.half_life = std::numeric_limits<double>::infinity();
    else if (h.is_number())
      cfg.half_life = h.get<double>();
    else
      fail(ErrorCode::ConfigInvalid,
           "halfLife must be a number or \"Infinite\"");
  }
  if (j.contains("q")) cfg.q = int(get_int(j, "q"));
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_integer() && !s.is_number_unsigned())
      fail(ErrorCode::ConfigInvalid, "config key seed must be an integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (j.contains("tieMethod"))
    cfg.ties = tie_method_from_name(get_string(j, "tieMethod"));
  if (j.contains("robust"))
    cfg.robust = expect(j, "robust", json::value_t::boolean, "boolean")
                     .get<bool>();
  if (j.contains("bootstrapB")) cfg.bootstrap_b = int(get_int(j, "bootstrapB"));
  cfg.validate();
  return cfg;
}

RunConfig read_run_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return run_config_from_json(buf.str());
}

IngestResult ingest_aminer(std::istream& in) {
  // Pass 1: ids of journal records. Papers keep their spot in this set even
  // when their own event is later dropped, so they stay citable.
  std::unordered_set<std::string> retained;
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    lines.push_back(line);
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) continue;
    if (rec.value("doc_type", "") != "Journal") continue;
    const auto id = rec.find("id");
    if (id != rec.end() && id->is_string() && !id->get<std::string>().empty())
      retained.insert(id->get<std::string>());
  }

  IngestResult result;
  IngestReport& report = result.report;
  report.papers_seen = retained.size();
  std::unordered_set<std::string> published;

  for (const std::string& text : lines) {
    json rec = json::parse(text, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
      ++report.records_skipped;
      continue;
    }
    if (rec.value("doc_type", "") != "Journal") continue;

    const auto id_it = rec.find("id");
    const auto year_it = rec.find("year");
    const auto authors_it = rec.find("authors");
    std::vector<std::string> author_ids;
    if (authors_it != rec.end() && authors_it->is_array()) {
      for (const json& a : *authors_it) {
        if (!a.is_object()) continue;
        const auto aid = a.find("id");
        if (aid != a.end() && aid->is_string() &&
            !aid->get<std::string>().empty())
          author_ids.push_back(aid->get<std::string>());
      }
    }
    const bool usable =
        id_it != rec.end() && id_it->is_string() &&
        !id_it->get<std::string>().empty() && year_it != rec.end() &&
        year_it->is_number() && !author_ids.empty();
    if (!usable) {
      ++report.records_skipped;
      continue;
    }
    const std::string paper_id = id_it->get<std::string>();
    if (!published.insert(paper_id).second) {
      ++report.records_skipped;
      continue;
    }

    std::set<std::string> refs;
    const auto refs_it = rec.find("references");
    if (refs_it != rec.end() && refs_it->is_array()) {
      for (const json& r : *refs_it) {
        if (!r.is_string()) continue;
        const std::string ref = r.get<std::string>();
        if (retained.count(ref))
          refs.insert(ref);
        else
          ++report.refs_dropped_out_of_corpus;
      }
    }
    refs.erase(paper_id);
    if (refs.empty()) {
      ++report.events_dropped_empty_refs;
      continue;
    }

    Event ev;
    ev.time = year_it->get<double>();
    ev.focal = result.stream.papers.intern(paper_id);
    for (const std::string& a : author_ids)
      ev.authors.push_back(result.stream.authors.intern(a));
    for (const std::string& r : refs)
      ev.refs.push_back(result.stream.papers.intern(r));
    result.stream.events.push_back(std::move(ev));
  }

  validate_stream(result.stream);
  report.events_kept = result.stream.events.size();
  report.authors_seen = result.stream.authors.size();
  for (const Event& ev : result.stream.events) ++report.events_per_time[ev.time];
  if (!result.stream.events.empty()) {
    report.time_min = result.stream.events.front().time;
    report.time_max = result.stream.events.back().time;
  }
  return result;
}

IngestResult ingest_aminer_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  return ingest_aminer(in);
}

IngestReport report_for_stream(const EventStream& stream) {
  IngestReport report;
  report.events_kept = stream.events.size();
  report.authors_seen = stream.authors.size();
  report.papers_seen = stream.papers.size();
  for (const Event& ev : stream.events) ++report.events_per_time[ev.time];
  if (!stream.events.empty()) {
    report.time_min = stream.events.front().time;
    report.time_max = stream.events.back().time;
  }
  return report;
}

std::string ingest_report_json(const IngestReport& report) {
  json j;
  j["eventsKept"] = report.events_kept;
  j["eventsDroppedEmptyRefs"] = report.events_dropped_empty_refs;
  j["recordsSkipped"] = report.records_skipped;
  j["authorsSeen"] = report.authors_seen;
  j["papersSeen"] = report.papers_seen;
  j["refsDroppedOutOfCorpus"] = report.refs_dropped_out_of_corpus;
  j["timeRange"] = {report.time_min, report.time_max};
  json per_time = json::object();
  for (const auto& [time, count] : report.events_per_time)
    per_time[format_double(time)] = count;
  j["eventsPerTime"] = std::move(per_time);
  return j.dump(2) + "\n";
}

namespace {

struct Significance {
  double z = 0;
  double p = 1;
  const char* stars = "";
};

Significance significance(const FitResult& fit, std::size_t i) {
  Significance s;
  const double se =
      !fit.se_robust.empty() ? fit.se_robust[i] : fit.se_model[i];
  if (se > 0) {
    s.z = fit.beta[i] / se;
    s.p = std::erfc(std::abs(s.z) / std::sqrt(2.0));
  }
  if (s.p < 0.001)
    s.stars = "***";
  else if (s.p < 0.01)
    s.stars = "**";
  else if (s.p < 0.05)
    s.stars = "*";
  return s;
}

}  // namespace

std::string fit_report_json(const FitResult& fit) {
  json j;
  json coefs = json::array();
  for (std::size_t i = 0; i < fit.beta.size(); ++i) {
    const Significance s = significance(fit, i);
    json row;
    row["name"] = fit.covariate_names[i];
    row["estimate"] = fit.beta[i];
    row["seModel"] = fit.se_model[i];
    if (!fit.se_robust.empty()) row["seRobust"] = fit.se_robust[i];
    row["z"] = s.z;
    row["p"] = s.p;
    coefs.push_back(std::move(row));
  }
  j["coefficients"] = std::move(coefs);
  j["logLik"] = fit.log_lik;
  j["logLikNull"] = fit.log_lik_null;
  j["aic"] = fit.aic;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["nEvents"] = fit.n_events;
  j["nInstances"] = fit.n_instances;
  j["nGroups"] = fit.n_groups;
  j["nInformative"] = fit.n_informative;
  j["warnings"] = fit.warnings;
  return j.dump(2) + "\n";
}

std::string fit_report_text(const FitResult& fit) {
  std::ostringstream out;
  char buf[256];
  const bool robust = !fit.se_robust.empty();
  std::size_t width = 12;
  for (const auto& name : fit.covariate_names)
    width = std::max(width, name.size());
  std::snprintf(buf, sizeof buf, "%-*s %12s %12s %12s %9s %11s\n", int(width),
                "covariate", "estimate", "se(model)",
                robust ? "se(robust)" : "", "z", "p");
  out << buf;
  for (std::size_t i = 0; i < fit.beta.size(); ++i) {
    const Significance s = significance(fit, i);
    char se_robust[32] = "";
    if (robust)
      std::snprintf(se_robust, sizeof se_robust, "%12.4f", fit.se_robust[i]);
    std::snprintf(buf, sizeof buf, "%-*s %12.4f %12.4f %12s %9.2f %11.3g %s\n",
                  int(width), fit.covariate_names[i].c_str(), fit.beta[i],
                  fit.se_model[i], se_robust, s.z, s.p, s.stars);
    out << buf;
  }
  std::snprintf(buf, sizeof buf,
                "\nevents %llu  instances %llu  groups %llu  informative "
                "%llu\n",
                (unsigned long long)fit.n_events,
                (unsigned long long)fit.n_instances,
                (unsigned long long)fit.n_groups,
                (unsigned long long)fit.n_informative);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "logLik %.6f  null %.6f  AIC %.6f  iterations %d  converged "
                "%s\n",
                fit.log_lik, fit.log_lik_null, fit.aic, fit.iterations,
                fit.converged ? "yes" : "no");
  out << buf;
  for (const auto& w : fit.warnings) out << "warning: " << w << "\n";
  return out.str();
}

void write_contribution_csv_file(const ContributionResult& contrib,
                                 const std::string& path) {
  std::ostringstream out;
  out << "covariate,gain_over_null,loss_if_dropped\n";
  for (const auto& row : contrib.rows)
    out << row.name << ',' << format_double(row.gain_over_null) << ','
        << format_double(row.loss_if_dropped) << '\n';
  write_text_file(path, out.str());
}

void write_bootstrap_csv_file(const BootstrapResult& boot,
                              const std::string& path) {
  std::ostringstream out;
  out << "covariate,estimate,boot_mean,boot_sd,sign_agreement,n_ok\n";
  const std::size_t n = boot.estimates.size();
  for (std::size_t i = 0; i < boot.covariate_names.size(); ++i) {
    double mean = 0;
    for (const auto& est : boot.estimates) mean += est[i];
    if (n > 0) mean /= double(n);
    double ss = 0;
    for (const auto& est : boot.estimates)
      ss += (est[i] - mean) * (est[i] - mean);
    const double sd = n > 1 ? std::sqrt(ss / double(n - 1)) : 0.0;
    out << boot.covariate_names[i] << ',' << format_double(boot.full_beta[i])
        << ',' << format_double(mean) << ',' << format_double(sd) << ','
        << format_double(boot.sign_agreement[i]) << ',' << n << '\n';
  }
  write_text_file(path, out.str());
}

FitResult run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec)
    fail(ErrorCode::IoError,
         "cannot create " + cfg.output_dir + ": " + ec.message());
  const auto artifact = [&](const char* name) {
    return (fs::path(cfg.output_dir) / name).string();
  };

  EventStream stream;
  with_stage("ingest", [&] {
    IngestReport report;
    if (cfg.input_format == InputFormat::AminerJson) {
      IngestResult r = ingest_aminer_file(cfg.input_path);
      stream = std::move(r.stream);
      report = std::move(r.report);
    } else {
      stream = read_event_tsv_file(cfg.input_path);
      report = report_for_stream(stream);
    }
    write_text_file(artifact("ingest.json"), ingest_report_json(report));
  });

  with_stage("covariates", [&] {
    SamplingConfig scfg;
    scfg.q = cfg.q;
    scfg.seed = cfg.seed;
    scfg.model = cfg.model;
    const InstanceTable table =
        build_instance_table(stream, cfg.effective_covariates(), scfg,
                             cfg.decay());
    write_instance_csv_file(table, artifact("instances.csv"));
  });

  FitResult fit_result;
  ParsedInstances parsed;
  with_stage("fit", [&] {
    parsed = read_instance_csv_file(artifact("instances.csv"));
    FitConfig fcfg;
    fcfg.ties = cfg.ties;
    fcfg.robust = cfg.robust;
    fit_result = fit(parsed, fcfg);
    write_text_file(artifact("fit.json"), fit_report_json(fit_result));
    write_text_file(artifact("fit.txt"), fit_report_text(fit_result));
  });

  with_stage("contrib", [&] {
    FitConfig fcfg;
    fcfg.ties = cfg.ties;
    fcfg.robust = false;
    write_contribution_csv_file(contribution_analysis(parsed, fcfg),
                                artifact("contrib.csv"));
  });

  if (cfg.bootstrap_b > 0) {
    with_stage("bootstrap", [&] {
      FitConfig fcfg;
      fcfg.ties = cfg.ties;
      fcfg.robust = false;
      // Decorrelated from the sampling substreams, which use cfg.seed.
      const std::uint64_t boot_seed = cfg.seed ^ 0x9e3779b97f4a7c15ULL;
      write_bootstrap_csv_file(
          bootstrap(parsed, fcfg, cfg.bootstrap_b, boot_seed),
          artifact("bootstrap.csv"));
    });
  }

  return fit_result;
}

}  // namespace rhem
