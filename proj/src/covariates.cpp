#include "rhem/covariates.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "rhem/combos.hpp"

namespace rhem {

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return r;
}

double subset_repetition(const AttributeLedger& ledger,
                         std::span<const AuthorId> I, std::span<const PaperId> J,
                         int k, int l, double t) {
  if (k == 0 && l == 0)
    fail(ErrorCode::BadSubsetOrder, "subset repetition of order (0,0) is not defined");
  if (k < 0 || l < 0 || k > 3 || l > 3)
    fail(ErrorCode::BadSubsetOrder,
         "subset repetition order (" + std::to_string(k) + "," +
             std::to_string(l) + ") is outside the supported range");
  const double denom = binomial(I.size(), std::size_t(k)) *
                       binomial(J.size(), std::size_t(l));
  if (denom == 0.0) return 0.0;
  double sum = 0.0;
  for_each_combo<AuthorId>(I, std::uint8_t(k), [&](std::span<const AuthorId> Is) {
    for_each_combo<PaperId>(J, std::uint8_t(l), [&](std::span<const PaperId> Js) {
      sum += ledger.cite_subset(Is, Js, t);
    });
  });
  return sum / denom;
}

namespace {

// Number of papers coauthored by the (unordered) pair {a, b}.
double coauth(const AttributeLedger& L, AuthorId a, AuthorId b, double t) {
  std::array<AuthorId, 2> pair{std::min(a, b), std::max(a, b)};
  return L.cite_subset(pair, {}, t);
}

// Number of papers of author i citing paper j.
double cite_single(const AttributeLedger& L, AuthorId i, PaperId j, double t) {
  return L.cite_subset(std::span<const AuthorId>(&i, 1),
                       std::span<const PaperId>(&j, 1), t);
}

// Walks the intersection of two ascending id lists.
template <typename Fn>
void for_common(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b,
                Fn&& fn) {
  std::size_t x = 0, y = 0;
  while (x < a.size() && y < b.size()) {
    if (a[x] < b[y]) {
      ++x;
    } else if (b[y] < a[x]) {
      ++y;
    } else {
      fn(a[x]);
      ++x;
      ++y;
    }
  }
}

double pair_abs_diff_mean(std::span<const double> a) {
  const std::size_t n = a.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) sum += std::abs(a[i] - a[j]);
  return sum / binomial(n, 2);
}

using AI = std::span<const AuthorId>;
using PJ = std::span<const PaperId>;

double ev_prior_papers(const AttributeLedger& L, AI I, PJ, double t) {
  return subset_repetition(L, I, {}, 1, 0, t);
}

double ev_diff_prior_papers(const AttributeLedger& L, AI I, PJ, double t) {
  std::vector<double> vals;
  vals.reserve(I.size());
  for (AuthorId i : I) vals.push_back(L.cite_subset(AI(&i, 1), {}, t));
  return pair_abs_diff_mean(vals);
}

double ev_prior_joint_papers(const AttributeLedger& L, AI I, PJ, double t) {
  return subset_repetition(L, I, {}, 2, 0, t);
}

double ev_author_citation_popularity(const AttributeLedger& L, AI I, PJ, double t) {
  if (I.empty()) fail(ErrorCode::EmptySet, "author set is empty");
  double sum = 0.0;
  for (AuthorId i : I) sum += L.author_citedness(i, t);
  return sum / double(I.size());
}

double ev_diff_auth_cite_pop(const AttributeLedger& L, AI I, PJ, double t) {
  std::vector<double> vals;
  vals.reserve(I.size());
  for (AuthorId i : I) vals.push_back(L.author_citedness(i, t));
  return pair_abs_diff_mean(vals);
}

double ev_collab_w_citing_author(const AttributeLedger& L, AI I, PJ, double t) {
  const std::size_t n = I.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t a = 0; a + 1 < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      sum += L.cite_author_author(I[a], I[b], t) +
             L.cite_author_author(I[b], I[a], t);
  return sum / (double(n) * double(n - 1));
}

double ev_common_coauthor(const AttributeLedger& L, AI I, PJ, double t) {
  const std::size_t n = I.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t a = 0; a + 1 < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const AuthorId i = I[a], ip = I[b];
      for_common(L.coauthors_of(i), L.coauthors_of(ip), [&](AuthorId z) {
        if (z == i || z == ip) return;
        sum += std::min(coauth(L, i, z, t), coauth(L, ip, z, t));
      });
    }
  return sum / binomial(n, 2);
}

double ev_citing_common_paper(const AttributeLedger& L, AI I, PJ, double t) {
  const std::size_t n = I.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t a = 0; a + 1 < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const AuthorId i = I[a], ip = I[b];
      for_common(L.papers_cited_by(i), L.papers_cited_by(ip), [&](PaperId j) {
        sum += std::min(cite_single(L, i, j, t), cite_single(L, ip, j, t));
      });
    }
  return sum / binomial(n, 2);
}

double ev_citing_common_author(const AttributeLedger& L, AI I, PJ, double t) {
  const std::size_t n = I.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t a = 0; a + 1 < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const AuthorId i = I[a], ip = I[b];
      for_common(L.authors_cited_by(i), L.authors_cited_by(ip), [&](AuthorId z) {
        if (z == i || z == ip) return;
        sum += std::min(L.cite_author_author(i, z, t),
                        L.cite_author_author(ip, z, t));
      });
    }
  return sum / binomial(n, 2);
}

double ev_cited_by_common_author(const AttributeLedger& L, AI I, PJ, double t) {
  const std::size_t n = I.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t a = 0; a + 1 < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const AuthorId i = I[a], ip = I[b];
      for_common(L.authors_citing(i), L.authors_citing(ip), [&](AuthorId z) {
        if (z == i || z == ip) return;
        sum += std::min(L.cite_author_author(z, i, t),
                        L.cite_author_author(z, ip, t));
      });
    }
  return sum / binomial(n, 2);
}

double ev_paper_citation_popularity(const AttributeLedger& L, AI, PJ J, double t) {
  return subset_repetition(L, {}, J, 0, 1, t);
}

double ev_paper_pair_cocitation(const AttributeLedger& L, AI, PJ J, double t) {
  return subset_repetition(L, {}, J, 0, 2, t);
}

double ev_paper_triple_cocitation(const AttributeLedger& L, AI, PJ J, double t) {
  return subset_repetition(L, {}, J, 0, 3, t);
}

double ev_author_citation_repetition(const AttributeLedger& L, AI I, PJ J, double t) {
  return subset_repetition(L, I, J, 1, 1, t);
}

double ev_author_pair_citation_repetition(const AttributeLedger& L, AI I, PJ J,
                                          double t) {
  return subset_repetition(L, I, J, 2, 1, t);
}

double ev_author_triple_citation_repetition(const AttributeLedger& L, AI I, PJ J,
                                            double t) {
  return subset_repetition(L, I, J, 3, 1, t);
}

double ev_paper_outdegree_popularity(const AttributeLedger& L, AI, PJ J, double t) {
  if (J.empty()) fail(ErrorCode::EmptySet, "paper set is empty");
  double sum = 0.0;
  for (PaperId j : J) sum += L.outdegree(j, t);
  return sum / double(J.size());
}

double ev_cite_paper_and_its_refs(const AttributeLedger& L, AI, PJ J, double t) {
  const std::size_t n = J.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t a = 0; a + 1 < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      sum += L.cite_paper_paper(J[a], J[b], t) +
             L.cite_paper_paper(J[b], J[a], t);
  return sum / (double(n) * double(n - 1));
}

double ev_adopt_citation_of_coauthor(const AttributeLedger& L, AI I, PJ J, double t) {
  if (I.empty() || J.empty()) fail(ErrorCode::EmptySet, "candidate set is empty");
  double sum = 0.0;
  for (AuthorId i : I)
    for (AuthorId z : L.coauthors_of(i)) {
      const double cz = coauth(L, i, z, t);
      for_common(L.papers_cited_by(z), J, [&](PaperId j) {
        sum += std::min(cz, cite_single(L, z, j, t));
      });
    }
  return sum / (double(I.size()) * double(J.size()));
}

double ev_self_citation(const AttributeLedger& L, AI I, PJ J, double t) {
  if (I.empty() || J.empty()) fail(ErrorCode::EmptySet, "candidate set is empty");
  double sum = 0.0;
  for (AuthorId i : I)
    for (PaperId j : J) sum += L.authored(i, j, t);
  return sum / (double(I.size()) * double(J.size()));
}

double ev_cite_coauthors_paper(const AttributeLedger& L, AI I, PJ J, double t) {
  if (I.empty() || J.empty()) fail(ErrorCode::EmptySet, "candidate set is empty");
  double sum = 0.0;
  for (AuthorId i : I)
    for (PaperId j : J) {
      if (!L.published(j)) continue;
      for_common(L.coauthors_of(i), L.paper_authors(j), [&](AuthorId z) {
        sum += std::min(coauth(L, i, z, t), L.authored(z, j, t));
      });
    }
  return sum / (double(I.size()) * double(J.size()));
}

double ev_author_author_citation_repetition(const AttributeLedger& L, AI I, PJ J,
                                            double t) {
  if (I.empty() || J.empty()) fail(ErrorCode::EmptySet, "candidate set is empty");
  double sum = 0.0;
  for (AuthorId i : I)
    for (PaperId j : J) {
      if (!L.published(j)) continue;
      for (AuthorId z : L.paper_authors(j)) {
        if (z == i) continue;
        sum += std::min(L.cite_author_author(i, z, t), L.authored(z, j, t));
      }
    }
  return sum / (double(I.size()) * double(J.size()));
}

double ev_author_author_citation_reciprocation(const AttributeLedger& L, AI I,
                                               PJ J, double t) {
  if (I.empty() || J.empty()) fail(ErrorCode::EmptySet, "candidate set is empty");
  double sum = 0.0;
  for (AuthorId i : I)
    for (PaperId j : J) {
      if (!L.published(j)) continue;
      for (AuthorId z : L.paper_authors(j)) {
        if (z == i) continue;
        sum += std::min(L.cite_author_author(z, i, t), L.authored(z, j, t));
      }
    }
  return sum / (double(I.size()) * double(J.size()));
}

}  // namespace

const std::vector<CovariateInfo>& covariate_registry() {
  // Author-side covariates (functions of I alone) first, then the rest.
  static const std::vector<CovariateInfo> reg = {
      {"prior_papers", 'A', true, {{1, 0}}, ev_prior_papers},
      {"diff_prior_papers", 'A', true, {{1, 0}}, ev_diff_prior_papers},
      {"prior_joint_papers", 'A', true, {{2, 0}}, ev_prior_joint_papers},
      {"author_citation_popularity", 'M', true, {}, ev_author_citation_popularity},
      {"diff_auth_cite_pop", 'M', true, {}, ev_diff_auth_cite_pop},
      {"collab_w_citing_author", 'M', true, {}, ev_collab_w_citing_author},
      {"common_coauthor", 'A', true, {{2, 0}}, ev_common_coauthor},
      {"citing_common_paper", 'M', true, {{1, 1}}, ev_citing_common_paper},
      {"citing_common_author", 'M', true, {}, ev_citing_common_author},
      {"cited_by_common_author", 'M', true, {}, ev_cited_by_common_author},
      {"paper_citation_popularity", 'C', false, {{0, 1}}, ev_paper_citation_popularity},
      {"paper_pair_cocitation", 'C', false, {{0, 2}}, ev_paper_pair_cocitation},
      {"paper_triple_cocitation", 'C', false, {{0, 3}}, ev_paper_triple_cocitation},
      {"author_citation_repetition", 'M', false, {{1, 1}}, ev_author_citation_repetition},
      {"author_pair_citation_repetition", 'M', false, {{2, 1}},
       ev_author_pair_citation_repetition},
      {"author_triple_citation_repetition", 'M', false, {{3, 1}},
       ev_author_triple_citation_repetition},
      {"paper_outdegree_popularity", 'C', false, {}, ev_paper_outdegree_popularity},
      {"cite_paper_and_its_refs", 'C', false, {}, ev_cite_paper_and_its_refs},
      {"adopt_citation_of_coauthor", 'M', false, {{2, 0}, {1, 1}},
       ev_adopt_citation_of_coauthor},
      {"self_citation", 'M', false, {}, ev_self_citation},
      {"cite_coauthors_paper", 'M', false, {{2, 0}}, ev_cite_coauthors_paper},
      {"author_author_citation_repetition", 'M', false, {},
       ev_author_author_citation_repetition},
      {"author_author_citation_reciprocation", 'M', false, {},
       ev_author_author_citation_reciprocation},
  };
  return reg;
}

const CovariateInfo& covariate_info(const std::string& name) {
  for (const auto& info : covariate_registry())
    if (info.name == name) return info;
  fail(ErrorCode::UnknownCovariate, "unknown covariate: " + name);
}

std::string model_name(Model m) {
  switch (m) {
    case Model::Coauthoring: return "coauthoring";
    case Model::Citation: return "citation";
    case Model::Joint: return "joint";
  }
  fail(ErrorCode::ConfigInvalid, "bad model enum value");
}

Model model_from_name(const std::string& name) {
  if (name == "coauthoring") return Model::Coauthoring;
  if (name == "citation") return Model::Citation;
  if (name == "joint") return Model::Joint;
  fail(ErrorCode::ConfigInvalid, "unknown model: " + name);
}

std::vector<CovariateSpec> default_covariates(Model m) {
  std::vector<CovariateSpec> out;
  for (const auto& info : covariate_registry()) {
    if (m == Model::Coauthoring && !info.author_side) continue;
    if (m == Model::Citation && info.author_side) continue;
    // The two highest-order repetition covariates are kept out of the joint
    // default list; they stay available by explicit request.
    if (m == Model::Joint && (info.name == "author_pair_citation_repetition" ||
                              info.name == "author_triple_citation_repetition"))
      continue;
    out.push_back({info.name, Transform::Sqrt});
  }
  return out;
}

void validate_specs(std::span<const CovariateSpec> specs, Model m) {
  std::vector<std::string> seen;
  for (const auto& s : specs) {
    const auto& info = covariate_info(s.name);
    if (std::find(seen.begin(), seen.end(), s.name) != seen.end())
      fail(ErrorCode::ConfigInvalid, "covariate listed twice: " + s.name);
    seen.push_back(s.name);
    if (m == Model::Citation && info.author_side)
      fail(ErrorCode::InapplicableCovariate,
           s.name + " is a function of the author set alone and is constant "
                    "within every comparison group of the citation model");
    if (m == Model::Coauthoring && !info.author_side)
      fail(ErrorCode::InapplicableCovariate,
           s.name + " reads the reference set, which the coauthoring model "
                    "does not sample");
  }
}

LedgerConfig ledger_config_for(std::span<const CovariateSpec> specs,
                               DecayConfig decay) {
  LedgerConfig cfg;
  cfg.decay = decay;
  for (const auto& s : specs) {
    for (auto o : covariate_info(s.name).orders) {
      bool present = false;
      for (auto have : cfg.orders)
        present = present || (have.k == o.k && have.l == o.l);
      if (!present) cfg.orders.push_back(o);
    }
  }
  std::sort(cfg.orders.begin(), cfg.orders.end(),
            [](SubsetOrder a, SubsetOrder b) {
              return a.k != b.k ? a.k < b.k : a.l < b.l;
            });
  cfg.validate();
  return cfg;
}

std::vector<double> compute_vector(const AttributeLedger& ledger,
                                   std::span<const CovariateSpec> specs,
                                   std::span<const AuthorId> I,
                                   std::span<const PaperId> J, double t) {
  std::vector<double> out;
  out.reserve(specs.size());
  for (const auto& s : specs) {
    double v = covariate_info(s.name).eval(ledger, I, J, t);
    if (s.transform == Transform::Sqrt) v = std::sqrt(v);
    out.push_back(v);
  }
  return out;
}

}  // namespace rhem
