#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace oracle {

namespace {

using rhem::AuthorId;
using rhem::Event;
using rhem::PaperId;

template <class T>
bool contains(const std::vector<T>& v, T x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

template <class T>
bool contains_all(const std::vector<T>& v, std::span<const T> wanted) {
  for (T x : wanted)
    if (!contains(v, x)) return false;
  return true;
}

// Authors of the papers cited by history[m] that an earlier list position
// published.
std::set<AuthorId> cited_authors(std::span<const Event> history,
                                 std::size_t m) {
  std::set<AuthorId> out;
  for (PaperId r : history[m].refs)
    for (std::size_t e = 0; e < m; ++e)
      if (history[e].focal == r)
        out.insert(history[e].authors.begin(), history[e].authors.end());
  return out;
}

std::set<AuthorId> all_authors(std::span<const Event> history, double t) {
  std::set<AuthorId> out;
  for (const Event& ev : history)
    if (ev.time < t) out.insert(ev.authors.begin(), ev.authors.end());
  return out;
}

std::set<PaperId> all_papers(std::span<const Event> history, double t) {
  std::set<PaperId> out;
  for (const Event& ev : history)
    if (ev.time < t) {
      out.insert(ev.focal);
      out.insert(ev.refs.begin(), ev.refs.end());
    }
  return out;
}

template <class T, class Fn>
void each_subset_rec(std::span<const T> v, int k, std::size_t start,
                     std::vector<T>& cur, Fn&& fn) {
  if (int(cur.size()) == k) {
    fn(cur);
    return;
  }
  for (std::size_t i = start; i < v.size(); ++i) {
    cur.push_back(v[i]);
    each_subset_rec(v, k, i + 1, cur, fn);
    cur.pop_back();
  }
}

template <class T, class Fn>
void each_subset(std::span<const T> v, int k, Fn&& fn) {
  std::vector<T> cur;
  each_subset_rec(v, k, 0, cur, fn);
}

double coauth(std::span<const Event> history, double half_life, AuthorId a,
              AuthorId b, double t) {
  const AuthorId pair[2] = {a, b};
  return cite_subset(history, half_life, pair, {}, t);
}

double cites_paper(std::span<const Event> history, double half_life,
                   AuthorId i, PaperId j, double t) {
  const AuthorId one_author[1] = {i};
  const PaperId one_paper[1] = {j};
  return cite_subset(history, half_life, one_author, one_paper, t);
}

}  // namespace

double weight(double half_life, double dt) {
  if (!std::isfinite(half_life)) return 1.0;
  return std::exp2(-dt / half_life);
}

double cite_subset(std::span<const Event> history, double half_life,
                   std::span<const AuthorId> sub_authors,
                   std::span<const PaperId> sub_refs, double t) {
  double sum = 0;
  for (const Event& ev : history) {
    if (!(ev.time < t)) continue;
    if (!contains_all(ev.authors, sub_authors)) continue;
    if (!contains_all(ev.refs, sub_refs)) continue;
    sum += weight(half_life, t - ev.time);
  }
  return sum;
}

double cite_author_author(std::span<const Event> history, double half_life,
                          AuthorId citing, AuthorId cited, double t) {
  double sum = 0;
  for (std::size_t m = 0; m < history.size(); ++m) {
    if (!(history[m].time < t)) continue;
    if (!contains(history[m].authors, citing)) continue;
    if (cited_authors(history, m).count(cited))
      sum += weight(half_life, t - history[m].time);
  }
  return sum;
}

double cite_paper_paper(std::span<const Event> history, double half_life,
                        PaperId citing, PaperId cited, double t) {
  for (const Event& ev : history) {
    if (!(ev.time < t)) continue;
    if (ev.focal != citing) continue;
    if (contains(ev.refs, cited)) return weight(half_life, t - ev.time);
    return 0.0;
  }
  return 0.0;
}

double authored(std::span<const Event> history, double half_life, AuthorId i,
                PaperId j, double t) {
  for (const Event& ev : history) {
    if (!(ev.time < t)) continue;
    if (ev.focal != j) continue;
    if (contains(ev.authors, i)) return weight(half_life, t - ev.time);
    return 0.0;
  }
  return 0.0;
}

double author_citedness(std::span<const Event> history, double half_life,
                        AuthorId i, double t) {
  double sum = 0;
  for (std::size_t m = 0; m < history.size(); ++m) {
    if (!(history[m].time < t)) continue;
    if (cited_authors(history, m).count(i))
      sum += weight(half_life, t - history[m].time);
  }
  return sum;
}

double outdegree(std::span<const Event> history, double half_life, PaperId j,
                 double t) {
  for (const Event& ev : history) {
    if (!(ev.time < t)) continue;
    if (ev.focal == j)
      return weight(half_life, t - ev.time) * double(ev.refs.size());
  }
  return 0.0;
}

double subset_repetition(std::span<const Event> history, double half_life,
                         std::span<const AuthorId> authors,
                         std::span<const PaperId> refs, int k, int l,
                         double t) {
  double sum = 0;
  long n = 0;
  each_subset(authors, k, [&](const std::vector<AuthorId>& sub_a) {
    each_subset(refs, l, [&](const std::vector<PaperId>& sub_j) {
      sum += cite_subset(history, half_life, sub_a, sub_j, t);
      ++n;
    });
  });
  return n > 0 ? sum / double(n) : 0.0;
}

double covariate(std::span<const Event> history, double half_life,
                 const std::string& name, std::span<const AuthorId> authors,
                 std::span<const PaperId> refs, double t) {
  const std::size_t na = authors.size();
  const std::size_t nj = refs.size();

  // Mean over unordered author pairs of fn(i, i').
  const auto pair_mean = [&](auto&& fn) {
    if (na < 2) return 0.0;
    double sum = 0;
    long n = 0;
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t b = a + 1; b < na; ++b) {
        sum += fn(authors[a], authors[b]);
        ++n;
      }
    return sum / double(n);
  };
  // Mean over (i in I, j in J, third author i' != i) of fn(i, j, i').
  const auto author_paper_third = [&](auto&& fn) {
    const std::set<AuthorId> third = all_authors(history, t);
    double sum = 0;
    for (AuthorId i : authors)
      for (PaperId j : refs)
        for (AuthorId z : third)
          if (z != i) sum += fn(i, j, z);
    return sum / double(na * nj);
  };

  if (name == "prior_papers")
    return subset_repetition(history, half_life, authors, refs, 1, 0, t);
  if (name == "diff_prior_papers")
    return pair_mean([&](AuthorId a, AuthorId b) {
      const AuthorId one_a[1] = {a}, one_b[1] = {b};
      return std::abs(cite_subset(history, half_life, one_a, {}, t) -
                      cite_subset(history, half_life, one_b, {}, t));
    });
  if (name == "prior_joint_papers")
    return subset_repetition(history, half_life, authors, refs, 2, 0, t);
  if (name == "author_citation_popularity") {
    double sum = 0;
    for (AuthorId i : authors) sum += author_citedness(history, half_life, i, t);
    return sum / double(na);
  }
  if (name == "diff_auth_cite_pop")
    return pair_mean([&](AuthorId a, AuthorId b) {
      return std::abs(author_citedness(history, half_life, a, t) -
                      author_citedness(history, half_life, b, t));
    });
  if (name == "collab_w_citing_author") {
    if (na < 2) return 0.0;
    double sum = 0;
    for (AuthorId a : authors)
      for (AuthorId b : authors)
        if (a != b) sum += cite_author_author(history, half_life, a, b, t);
    return sum / double(na * (na - 1));
  }
  if (name == "common_coauthor")
    return pair_mean([&](AuthorId a, AuthorId b) {
      double sum = 0;
      for (AuthorId z : all_authors(history, t))
        if (z != a && z != b)
          sum += std::min(coauth(history, half_life, a, z, t),
                          coauth(history, half_life, b, z, t));
      return sum;
    });
  if (name == "citing_common_paper")
    return pair_mean([&](AuthorId a, AuthorId b) {
      double sum = 0;
      for (PaperId j : all_papers(history, t))
        sum += std::min(cites_paper(history, half_life, a, j, t),
                        cites_paper(history, half_life, b, j, t));
      return sum;
    });
  if (name == "citing_common_author")
    return pair_mean([&](AuthorId a, AuthorId b) {
      double sum = 0;
      for (AuthorId z : all_authors(history, t))
        if (z != a && z != b)
          sum += std::min(cite_author_author(history, half_life, a, z, t),
                          cite_author_author(history, half_life, b, z, t));
      return sum;
    });
  if (name == "cited_by_common_author")
    return pair_mean([&](AuthorId a, AuthorId b) {
      double sum = 0;
      for (AuthorId z : all_authors(history, t))
        if (z != a && z != b)
          sum += std::min(cite_author_author(history, half_life, z, a, t),
                          cite_author_author(history, half_life, z, b, t));
      return sum;
    });
  if (name == "paper_citation_popularity")
    return subset_repetition(history, half_life, authors, refs, 0, 1, t);
  if (name == "paper_pair_cocitation")
    return subset_repetition(history, half_life, authors, refs, 0, 2, t);
  if (name == "paper_triple_cocitation")
    return subset_repetition(history, half_life, authors, refs, 0, 3, t);
  if (name == "author_citation_repetition")
    return subset_repetition(history, half_life, authors, refs, 1, 1, t);
  if (name == "author_pair_citation_repetition")
    return subset_repetition(history, half_life, authors, refs, 2, 1, t);
  if (name == "author_triple_citation_repetition")
    return subset_repetition(history, half_life, authors, refs, 3, 1, t);
  if (name == "paper_outdegree_popularity") {
    double sum = 0;
    for (PaperId j : refs) sum += outdegree(history, half_life, j, t);
    return sum / double(nj);
  }
  if (name == "cite_paper_and_its_refs") {
    if (nj < 2) return 0.0;
    double sum = 0;
    for (PaperId a : refs)
      for (PaperId b : refs)
        if (a != b) sum += cite_paper_paper(history, half_life, a, b, t);
    return sum / double(nj * (nj - 1));
  }
  if (name == "adopt_citation_of_coauthor")
    return author_paper_third([&](AuthorId i, PaperId j, AuthorId z) {
      return std::min(coauth(history, half_life, i, z, t),
                      cites_paper(history, half_life, z, j, t));
    });
  if (name == "self_citation") {
    double sum = 0;
    for (AuthorId i : authors)
      for (PaperId j : refs) sum += authored(history, half_life, i, j, t);
    return sum / double(na * nj);
  }
  if (name == "cite_coauthors_paper")
    return author_paper_third([&](AuthorId i, PaperId j, AuthorId z) {
      return std::min(coauth(history, half_life, i, z, t),
                      authored(history, half_life, z, j, t));
    });
  if (name == "author_author_citation_repetition")
    return author_paper_third([&](AuthorId i, PaperId j, AuthorId z) {
      return std::min(cite_author_author(history, half_life, i, z, t),
                      authored(history, half_life, z, j, t));
    });
  if (name == "author_author_citation_reciprocation")
    return author_paper_third([&](AuthorId i, PaperId j, AuthorId z) {
      return std::min(cite_author_author(history, half_life, z, i, t),
                      authored(history, half_life, z, j, t));
    });
  throw std::logic_error("oracle has no covariate named " + name);
}

}  // namespace oracle
