#include "rhem/sampling.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace rhem {

namespace {

// Binomial coefficient clamped at `cap`; only the comparison against small
// control counts matters, so the clamp never affects behavior.
double capped_binomial(std::size_t n, std::size_t k, double cap) {
  if (k > n) return 0.0;
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * double(n - k + i) / double(i);
    if (r > cap) return cap;
  }
  return r;
}

// Uniform size-k subset of the author pool, as sorted ids.
std::vector<AuthorId> draw_author_set(const RiskSetState& risk, std::size_t k,
                                      Rng& rng) {
  auto pos = draw_distinct(std::uint32_t(risk.author_pool.size()),
                           std::uint32_t(k), rng);
  std::vector<AuthorId> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = risk.author_pool[pos[i]];
  std::sort(out.begin(), out.end());
  return out;
}

// Uniform size-l subset of the paper pool with one position excluded (the
// event's own focal paper): draw over a virtual pool of size n-1 and shift
// positions at or past the excluded one.
std::vector<PaperId> draw_ref_set(const RiskSetState& risk, std::size_t l,
                                  std::uint32_t excluded_pos, Rng& rng) {
  auto pos = draw_distinct(std::uint32_t(risk.paper_pool.size()) - 1,
                           std::uint32_t(l), rng);
  std::vector<PaperId> out(l);
  for (std::size_t i = 0; i < l; ++i) {
    std::uint32_t p = pos[i];
    if (p >= excluded_pos) ++p;
    out[i] = risk.paper_pool[p];
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void SamplingConfig::validate() const {
  if (q < 1) fail(ErrorCode::ConfigInvalid, "q must be at least 1");
  if (max_rejections < 1)
    fail(ErrorCode::ConfigInvalid, "maxRejections must be at least 1");
}

ControlDraw sample_controls(const RiskSetState& risk, const Event& ev,
                            const SamplingConfig& cfg, Rng& rng) {
  cfg.validate();
  for (AuthorId i : ev.authors)
    if (i >= risk.author_in.size() || !risk.author_in[i])
      fail(ErrorCode::RiskSetTooSmall,
           "event author not present in the risk set");
  if (ev.focal >= risk.paper_in.size() || !risk.paper_in[ev.focal])
    fail(ErrorCode::RiskSetTooSmall,
         "event focal paper not present in the risk set");

  const bool draw_authors = cfg.model != Model::Citation;
  const bool draw_refs = cfg.model != Model::Coauthoring;
  const std::size_t k = ev.authors.size();
  const std::size_t l = draw_refs ? ev.refs.size() : 0;
  const std::uint32_t focal_pos = risk.paper_pos[ev.focal];

  // Distinct candidate hyperedges available, case included.
  const double cap = 1e18;
  double space = 1.0;
  if (draw_authors) space *= capped_binomial(risk.author_pool.size(), k, cap);
  if (draw_refs)
    space = std::min(cap, space * capped_binomial(risk.paper_pool.size() - 1, l, cap));

  ControlDraw out;
  // The case itself is one of the `space` candidates, so space >= 1 always.
  const std::size_t target = space >= double(cfg.q) + 2.0
                                 ? std::size_t(cfg.q)
                                 : std::size_t(std::max(space, 1.0)) - 1;
  out.short_stratum = target < std::size_t(cfg.q);

  std::set<Hyperedge> seen;
  seen.insert({ev.authors, draw_refs ? ev.refs : std::vector<PaperId>{}});
  while (out.controls.size() < target) {
    Hyperedge cand;
    cand.first = draw_authors ? draw_author_set(risk, k, rng) : ev.authors;
    if (draw_refs) cand.second = draw_ref_set(risk, l, focal_pos, rng);
    if (!seen.insert(cand).second) {
      if (++out.rejections > cfg.max_rejections) {
        out.exhausted = true;
        break;
      }
      continue;
    }
    out.controls.push_back(std::move(cand));
  }
  return out;
}

std::string stratum_label(Model model, double time, std::size_t n_authors,
                          std::size_t n_refs) {
  std::string s = format_double(time) + "|" + std::to_string(n_authors);
  if (model != Model::Coauthoring) s += "|" + std::to_string(n_refs);
  return s;
}

InstanceTable build_instance_table(const EventStream& stream,
                                   std::span<const CovariateSpec> specs,
                                   const SamplingConfig& cfg, DecayConfig decay) {
  cfg.validate();
  validate_specs(specs, cfg.model);

  InstanceTable table;
  table.model = cfg.model;
  table.specs.assign(specs.begin(), specs.end());
  table.n_events = stream.events.size();

  AttributeLedger ledger(ledger_config_for(specs, decay));
  RiskSetState risk;

  const bool with_refs = cfg.model != Model::Coauthoring;
  for_each_batch(stream.events, [&](std::size_t first, std::size_t last) {
    risk.advance(std::span<const Event>(stream.events.data() + first,
                                        last - first));
    for (std::size_t m = first; m < last; ++m) {
      const Event& ev = stream.events[m];
      Rng rng = Rng::substream(cfg.seed, m);
      ControlDraw draw = sample_controls(risk, ev, cfg, rng);
      if (draw.short_stratum) ++table.short_events;
      if (draw.exhausted) ++table.exhausted_events;

      const std::string label = stratum_label(
          cfg.model, ev.time, ev.authors.size(), with_refs ? ev.refs.size() : 0);
      auto push = [&](std::vector<AuthorId> I, std::vector<PaperId> J,
                      bool is_case) {
        Instance inst;
        inst.event_index = std::uint32_t(m);
        inst.time = ev.time;
        inst.stratum = label;
        inst.is_case = is_case;
        inst.covariates = compute_vector(ledger, specs, I, J, ev.time);
        inst.authors = std::move(I);
        inst.refs = std::move(J);
        table.rows.push_back(std::move(inst));
      };
      push(ev.authors, with_refs ? ev.refs : std::vector<PaperId>{}, true);
      for (auto& c : draw.controls)
        push(std::move(c.first), std::move(c.second), false);
    }
    for (std::size_t m = first; m < last; ++m)
      ledger.apply_event(stream.events[m]);
  });
  return table;
}

void write_instance_csv(const InstanceTable& table, std::ostream& out) {
  out << "event_index,time,stratum,is_case,n_authors,n_refs";
  for (const auto& s : table.specs) out << "," << s.name;
  out << "\n";
  for (const auto& r : table.rows) {
    out << r.event_index << "," << format_double(r.time) << "," << r.stratum
        << "," << (r.is_case ? 1 : 0) << "," << r.authors.size() << ","
        << r.refs.size();
    for (double v : r.covariates) out << "," << format_double(v);
    out << "\n";
  }
}

void write_instance_csv_file(const InstanceTable& table,
                             const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  write_instance_csv(table, f);
  if (!f.good()) fail(ErrorCode::IoError, "write failed: " + path);
}

ParsedInstances read_instance_csv(std::istream& in) {
  ParsedInstances out;
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorCode::MalformedRecord, "instance table is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  std::stringstream hs(line);
  std::string field;
  while (std::getline(hs, field, ',')) header.push_back(field);
  const std::vector<std::string> fixed = {"event_index", "time",      "stratum",
                                          "is_case",     "n_authors", "n_refs"};
  if (header.size() < fixed.size())
    fail(ErrorCode::MalformedRecord, "instance table header too short");
  for (std::size_t i = 0; i < fixed.size(); ++i)
    if (header[i] != fixed[i])
      fail(ErrorCode::MalformedRecord,
           "instance table header column " + std::to_string(i) + " is '" +
               header[i] + "', expected '" + fixed[i] + "'");
  out.covariate_names.assign(header.begin() + long(fixed.size()), header.end());

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    while (std::getline(ls, field, ',')) cells.push_back(field);
    if (cells.size() != header.size())
      fail(ErrorCode::MalformedRecord,
           "instance table line " + std::to_string(lineno) + " has " +
               std::to_string(cells.size()) + " cells, expected " +
               std::to_string(header.size()));
    ParsedRow row;
    char* end = nullptr;
    row.event_index = std::uint32_t(std::strtoul(cells[0].c_str(), &end, 10));
    row.time = std::strtod(cells[1].c_str(), &end);
    row.stratum = cells[2];
    row.is_case = cells[3] == "1";
    row.n_authors = std::uint32_t(std::strtoul(cells[4].c_str(), &end, 10));
    row.n_refs = std::uint32_t(std::strtoul(cells[5].c_str(), &end, 10));
    row.x.reserve(out.covariate_names.size());
    for (std::size_t i = 6; i < cells.size(); ++i) {
      end = nullptr;
      double v = std::strtod(cells[i].c_str(), &end);
      if (end == cells[i].c_str())
        fail(ErrorCode::MalformedRecord,
             "instance table line " + std::to_string(lineno) +
                 ": bad real value '" + cells[i] + "'");
      row.x.push_back(v);
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

ParsedInstances read_instance_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::IoError, "cannot open " + path);
  return read_instance_csv(f);
}

ParsedInstances to_parsed(const InstanceTable& table) {
  ParsedInstances out;
  for (const auto& s : table.specs) out.covariate_names.push_back(s.name);
  out.rows.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    ParsedRow row;
    row.event_index = r.event_index;
    row.time = r.time;
    row.stratum = r.stratum;
    row.is_case = r.is_case;
    row.n_authors = std::uint32_t(r.authors.size());
    row.n_refs = std::uint32_t(r.refs.size());
    row.x = r.covariates;
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace rhem
