#pragma once

#include <utility>
#include <vector>

#include "rhem/events.hpp"

// Hand-checked covariate values on miniature event histories, all evaluated
// with no decay so the expected numbers are exact small fractions. Node-id
// convention shared by the histories: authors are 0..5 (9 is a filler author
// when the author set does not matter), pre-existing papers are 0..5, papers
// published inside the history get ids 6, 7, 8 in publication order, and ids
// 90..92 are filler references for events whose reference lists do not
// matter.
namespace goldens {

struct Check {
  const char* label;
  const char* covariate;
  std::vector<rhem::Event> history;
  std::vector<rhem::AuthorId> authors;
  std::vector<rhem::PaperId> refs;
  double t;
  double want;
};

inline std::vector<Check> checks() {
  using rhem::Event;
  auto ev = [](double t, rhem::PaperId f, std::vector<rhem::AuthorId> a,
               std::vector<rhem::PaperId> r) {
    Event e;
    e.time = t;
    e.focal = f;
    e.authors = std::move(a);
    e.refs = std::move(r);
    return e;
  };

  std::vector<Check> out;

  // One prior paper by {0,1,2}; the candidate team {1,2,3} shares two
  // members with it and the candidate references overlap it in {1,2,3}.
  std::vector<Event> one = {ev(1, 6, {0, 1, 2}, {0, 1, 2, 3})};
  std::vector<rhem::AuthorId> team{1, 2, 3};
  std::vector<rhem::PaperId> refs5{1, 2, 3, 4, 5};
  out.push_back({"two of three authors have a prior paper", "prior_papers",
                 one, team, refs5, 2, 2.0 / 3.0});
  out.push_back({"one of three author pairs published jointly",
                 "prior_joint_papers", one, team, refs5, 2, 1.0 / 3.0});
  out.push_back({"activity gap of the fresh author", "diff_prior_papers", one,
                 team, refs5, 2, 2.0 / 3.0});
  out.push_back({"three of five candidate references cited before",
                 "paper_citation_popularity", one, {}, refs5, 2, 3.0 / 5.0});
  out.push_back({"three of ten reference pairs cocited",
                 "paper_pair_cocitation", one, {}, refs5, 2, 3.0 / 10.0});
  out.push_back({"one of ten reference triples cocited",
                 "paper_triple_cocitation", one, {}, refs5, 2, 1.0 / 10.0});
  out.push_back({"two authors already cited three of the references",
                 "author_citation_repetition", one, team, refs5, 2,
                 6.0 / 15.0});
  out.push_back({"one author pair already cited three of the references",
                 "author_pair_citation_repetition", one, team, refs5, 2,
                 3.0 / 15.0});
  out.push_back({"no author triple cited jointly",
                 "author_triple_citation_repetition", one, team, refs5, 2,
                 0.0});

  // Second event on top: the same team publishes paper 7 citing {1..5}.
  std::vector<Event> two = {ev(1, 6, {0, 1, 2}, {0, 1, 2, 3}),
                            ev(2, 7, {1, 2, 3}, {1, 2, 3, 4, 5})};
  out.push_back({"two of three reference pairs cocited after second event",
                 "paper_pair_cocitation", two, {}, {0, 3, 4}, 3, 2.0 / 3.0});
  out.push_back({"no reference triple cocited by one earlier paper",
                 "paper_triple_cocitation", two, {}, {0, 3, 4}, 3, 0.0});
  out.push_back({"three authors cited the references but never jointly",
                 "author_triple_citation_repetition", two, {0, 1, 3}, refs5, 3,
                 0.0});

  // Candidate cites paper 6 together with two of the references of paper 6.
  out.push_back({"two realized citation links among five references",
                 "cite_paper_and_its_refs",
                 {ev(1, 6, {9}, {0, 1, 2, 3})},
                 {},
                 {2, 3, 4, 5, 6},
                 2,
                 2.0 / 20.0});

  // Author 2 cited the paper of author 1; the two now form a candidate team.
  out.push_back({"team contains one past citer of the other member",
                 "collab_w_citing_author",
                 {ev(1, 6, {0, 1}, {0, 1}), ev(2, 7, {2, 3}, {4, 6})},
                 {1, 2},
                 {2, 3},
                 3,
                 1.0 / 2.0});

  // Two candidate authors wrote cited paper 6 themselves.
  out.push_back({"two of twelve author-reference pairs are self-citations",
                 "self_citation",
                 {ev(1, 6, {0, 1, 2}, {0, 1, 2})},
                 {1, 2, 3},
                 {3, 4, 5, 6},
                 2,
                 2.0 / 12.0});

  // Authors 0 and 3 never met but share coauthors 1 and 2.
  out.push_back({"two shared coauthors bridge the candidate pair",
                 "common_coauthor",
                 {ev(1, 6, {0, 1, 2}, {90}), ev(2, 7, {1, 2, 3, 4}, {91})},
                 {0, 3},
                 {},
                 3,
                 2.0});

  // Authors 1 and 2 both cited paper 1 in their separate past papers.
  out.push_back({"candidate pair cited one common paper",
                 "citing_common_paper",
                 {ev(1, 6, {0, 1}, {0, 1}), ev(2, 7, {2, 3}, {1, 4})},
                 {1, 2},
                 {},
                 3,
                 1.0});

  // Papers 1 and 5 are both by author 4; authors 1 and 2 cited one each.
  out.push_back({"candidate pair cited papers of one common author",
                 "citing_common_author",
                 {ev(0.25, 1, {4}, {90}), ev(0.5, 5, {4}, {91}),
                  ev(1, 6, {0, 1}, {0, 1}), ev(2, 7, {2, 3}, {4, 5})},
                 {1, 2},
                 {},
                 3,
                 1.0});

  // Author 2 cites paper 1, which their past coauthor 1 had cited before.
  std::vector<Event> chain = {ev(1, 6, {0, 1}, {0, 1}),
                              ev(2, 7, {1, 2}, {2, 3})};
  out.push_back({"one of four author-reference pairs adopts a coauthor citation",
                 "adopt_citation_of_coauthor", chain, {2, 3}, {1, 4}, 3,
                 1.0 / 4.0});
  out.push_back({"one of four author-reference pairs cites a coauthor paper",
                 "cite_coauthors_paper", chain, {2, 3}, {4, 6}, 3, 1.0 / 4.0});

  // Author 3 cited author 1 once already and now cites another paper of 1.
  out.push_back({"repeat citation of the same author's papers",
                 "author_author_citation_repetition",
                 {ev(1, 6, {0, 1}, {0, 1}), ev(2, 7, {1, 2}, {2, 3}),
                  ev(3, 8, {3}, {4, 6})},
                 {3},
                 {7},
                 4,
                 1.0});

  // Author 3 cited author 1 earlier; author 1 now cites back a paper of 3.
  out.push_back({"citation returned to a past citer",
                 "author_author_citation_reciprocation",
                 {ev(1, 6, {0, 1}, {0, 1}), ev(2, 7, {3}, {4, 6}),
                  ev(3, 8, {3}, {3})},
                 {1, 2},
                 {2, 8},
                 4,
                 1.0 / 4.0});

  return out;
}

}  // namespace goldens
