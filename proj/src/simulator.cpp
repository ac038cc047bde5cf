#include "rhem/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace rhem {

namespace {

void validate_probs(const std::vector<double>& probs, const char* what) {
  if (probs.empty())
    fail(ErrorCode::ConfigInvalid, std::string(what) + " distribution is empty");
  double sum = 0;
  for (double p : probs) {
    if (!(p >= 0))
      fail(ErrorCode::ConfigInvalid,
           std::string(what) + " distribution has a negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    fail(ErrorCode::ConfigInvalid,
         std::string(what) + " distribution sums to " + std::to_string(sum));
}

// Largest size with positive probability.
std::size_t max_size(const std::vector<double>& probs) {
  std::size_t m = 0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (probs[i] > 0) m = i + 1;
  return m;
}

std::size_t draw_size(const std::vector<double>& probs, Rng& rng) {
  const double u = rng.next_double();
  double acc = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i + 1;
  }
  return max_size(probs);
}

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

std::vector<std::uint32_t> draw_sorted_subset(
    const std::vector<std::uint32_t>& pool, std::size_t k, Rng& rng) {
  auto pos = draw_distinct(std::uint32_t(pool.size()), std::uint32_t(k), rng);
  std::vector<std::uint32_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = pool[pos[i]];
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void SimConfig::validate() const {
  if (num_seed_authors < 1 || num_seed_papers < 1)
    fail(ErrorCode::ConfigInvalid, "seed pools must be non-empty");
  if (num_events < 1)
    fail(ErrorCode::ConfigInvalid, "numEvents must be at least 1");
  if (candidates_per_event < 1)
    fail(ErrorCode::ConfigInvalid, "candidatesPerEvent must be at least 1");
  if (!(time_step > 0))
    fail(ErrorCode::ConfigInvalid, "timeStep must be positive");
  if (!(new_author_rate >= 0 && new_author_rate <= 1))
    fail(ErrorCode::ConfigInvalid, "newAuthorRate must lie in [0, 1]");
  validate_probs(team_size_probs, "team size");
  validate_probs(ref_count_probs, "reference count");
  if (specs.empty()) fail(ErrorCode::ConfigInvalid, "no covariates configured");
  if (true_beta.size() != specs.size())
    fail(ErrorCode::ConfigInvalid,
         "trueBeta length does not match the covariate list");
  validate_specs(specs, model);
  if (max_size(team_size_probs) > std::size_t(num_seed_authors))
    fail(ErrorCode::RiskSetTooSmall,
         "seed author pool smaller than the largest team size");
  if (max_size(ref_count_probs) > std::size_t(num_seed_papers))
    fail(ErrorCode::RiskSetTooSmall,
         "seed paper pool smaller than the largest reference count");
}

SimOutput simulate(const SimConfig& cfg) {
  cfg.validate();

  SimOutput out;
  out.true_beta = cfg.true_beta;
  out.choice_instances.model = cfg.model;
  out.choice_instances.specs = cfg.specs;
  out.choice_instances.n_events = std::uint64_t(cfg.num_events);

  EventStream& stream = out.stream;
  std::vector<AuthorId> author_pool;
  std::vector<PaperId> paper_pool;
  for (int i = 0; i < cfg.num_seed_authors; ++i)
    author_pool.push_back(stream.authors.intern("a" + std::to_string(i)));
  for (int j = 0; j < cfg.num_seed_papers; ++j)
    paper_pool.push_back(stream.papers.intern("p" + std::to_string(j)));

  // Seed batch: a few bulk events at time_start put every seed node into the
  // replayed risk set and give the ledger non-trivial starting history.
  const std::size_t chunk = 50;
  const std::size_t n_seed_events =
      (std::size_t(cfg.num_seed_papers) + chunk - 1) / chunk;
  AttributeLedger ledger(ledger_config_for(cfg.specs, cfg.decay));
  for (std::size_t g = 0; g < n_seed_events; ++g) {
    Event ev;
    ev.time = cfg.time_start;
    ev.focal = stream.papers.intern("s" + std::to_string(g));
    for (std::size_t i = g; i < std::size_t(cfg.num_seed_authors);
         i += n_seed_events)
      ev.authors.push_back(author_pool[i]);
    for (std::size_t j = g * chunk;
         j < std::min((g + 1) * chunk, std::size_t(cfg.num_seed_papers)); ++j)
      ev.refs.push_back(paper_pool[j]);
    std::sort(ev.authors.begin(), ev.authors.end());
    std::sort(ev.refs.begin(), ev.refs.end());
    if (ev.authors.empty())
      fail(ErrorCode::RiskSetTooSmall,
           "fewer seed authors than seed batch events");
    stream.events.push_back(ev);
    paper_pool.push_back(ev.focal);
  }
  for (std::size_t g = 0; g < n_seed_events; ++g)
    ledger.apply_event(stream.events[g]);

  const bool choose_authors = cfg.model != Model::Citation;
  const bool choose_refs = cfg.model != Model::Coauthoring;
  const double cap = 1e18;
  int fresh_authors = 0;

  for (int m = 0; m < cfg.num_events; ++m) {
    Rng rng = Rng::substream(cfg.seed, std::uint64_t(m));
    const double t = cfg.time_start + double(m + 1) * cfg.time_step;
    const std::size_t k = draw_size(cfg.team_size_probs, rng);
    const std::size_t l = draw_size(cfg.ref_count_probs, rng);

    // A fresh author joins through this event: every candidate author set
    // contains them, so the winner does too and the replayed risk set stays
    // identical to the generator's pool.
    AuthorId fresh = 0;
    bool with_fresh = false;
    if (cfg.new_author_rate > 0 &&
        rng.next_double() < cfg.new_author_rate && k >= 1) {
      fresh = stream.authors.intern(
          "a" + std::to_string(cfg.num_seed_authors + fresh_authors));
      ++fresh_authors;
      with_fresh = true;
    }

    // Author set of the event when it is not part of the choice.
    std::vector<AuthorId> fixed_authors;
    if (!choose_authors) {
      fixed_authors = draw_sorted_subset(author_pool, k, rng);
    }

    double space = 1.0;
    if (choose_authors) {
      const std::size_t free_k = with_fresh ? k - 1 : k;
      space *= capped_binomial(author_pool.size(), free_k, cap);
    }
    if (choose_refs)
      space = std::min(cap, space * capped_binomial(paper_pool.size(), l, cap));
    const std::size_t target =
        std::min(double(cfg.candidates_per_event), std::max(space, 1.0));

    std::set<Hyperedge> seen;
    std::vector<Hyperedge> candidates;
    int rejections = 0;
    while (candidates.size() < target && rejections <= 1000) {
      Hyperedge cand;
      if (choose_authors) {
        const std::size_t free_k = with_fresh ? k - 1 : k;
        cand.first = draw_sorted_subset(author_pool, free_k, rng);
        if (with_fresh) {
          cand.first.insert(std::upper_bound(cand.first.begin(),
                                             cand.first.end(), fresh),
                            fresh);
        }
      } else {
        cand.first = fixed_authors;
      }
      if (choose_refs) cand.second = draw_sorted_subset(paper_pool, l, rng);
      if (!seen.insert(cand).second) {
        ++rejections;
        continue;
      }
      candidates.push_back(std::move(cand));
    }
    if (candidates.size() < std::size_t(cfg.candidates_per_event))
      ++out.choice_instances.short_events;
    if (rejections > 1000) ++out.choice_instances.exhausted_events;

    std::vector<std::vector<double>> xs;
    xs.reserve(candidates.size());
    double max_eta = -std::numeric_limits<double>::infinity();
    std::vector<double> etas(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      xs.push_back(compute_vector(ledger, cfg.specs, candidates[c].first,
                                  candidates[c].second, t));
      double eta = 0;
      for (std::size_t j = 0; j < xs[c].size(); ++j)
        eta += cfg.true_beta[j] * xs[c][j];
      etas[c] = eta;
      max_eta = std::max(max_eta, eta);
    }
    double total = 0;
    for (double& e : etas) {
      e = std::exp(e - max_eta);
      total += e;
    }
    const double u = rng.next_double() * total;
    std::size_t winner = candidates.size() - 1;
    double acc = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      acc += etas[c];
      if (u < acc) {
        winner = c;
        break;
      }
    }

    Event ev;
    ev.time = t;
    ev.focal = stream.papers.intern("g" + std::to_string(m));
    ev.authors = choose_authors ? candidates[winner].first : fixed_authors;
    ev.refs = choose_refs ? candidates[winner].second
                          : draw_sorted_subset(paper_pool, l, rng);

    const std::string label = stratum_label(cfg.model, t, ev.authors.size(),
                                            choose_refs ? ev.refs.size() : 0);
    auto push = [&](std::size_t c, bool is_case) {
      Instance inst;
      inst.event_index = std::uint32_t(m);
      inst.time = t;
      inst.stratum = label;
      inst.is_case = is_case;
      inst.authors = candidates[c].first;
      inst.refs = candidates[c].second;
      inst.covariates = xs[c];
      out.choice_instances.rows.push_back(std::move(inst));
    };
    push(winner, true);
    for (std::size_t c = 0; c < candidates.size(); ++c)
      if (c != winner) push(c, false);

    ledger.apply_event(ev);
    stream.events.push_back(std::move(ev));
    paper_pool.push_back(stream.events.back().focal);
    if (with_fresh) author_pool.push_back(fresh);
  }

  validate_stream(stream);
  return out;
}

}  // namespace rhem
