#pragma once

#include <span>
#include <string>
#include <vector>

#include "rhem/events.hpp"

// Reference implementations recomputed from the raw event list on every
// call. Deliberately slow and structurally unlike the incremental ledger:
// plain loops over the whole history, recursive subset enumeration, and
// exp2-based decay. "history" is the replayed stream in order; queries see
// events with time strictly before t, and a reference resolves to authors
// only when an earlier list position published the paper.
namespace oracle {

double weight(double half_life, double dt);

double cite_subset(std::span<const rhem::Event> history, double half_life,
                   std::span<const rhem::AuthorId> sub_authors,
                   std::span<const rhem::PaperId> sub_refs, double t);

double cite_author_author(std::span<const rhem::Event> history,
                          double half_life, rhem::AuthorId citing,
                          rhem::AuthorId cited, double t);

double cite_paper_paper(std::span<const rhem::Event> history,
                        double half_life, rhem::PaperId citing,
                        rhem::PaperId cited, double t);

double authored(std::span<const rhem::Event> history, double half_life,
                rhem::AuthorId i, rhem::PaperId j, double t);

double author_citedness(std::span<const rhem::Event> history,
                        double half_life, rhem::AuthorId i, double t);

double outdegree(std::span<const rhem::Event> history, double half_life,
                 rhem::PaperId j, double t);

double subset_repetition(std::span<const rhem::Event> history,
                         double half_life,
                         std::span<const rhem::AuthorId> authors,
                         std::span<const rhem::PaperId> refs, int k, int l,
                         double t);

// Raw covariate value, before any transform.
double covariate(std::span<const rhem::Event> history, double half_life,
                 const std::string& name,
                 std::span<const rhem::AuthorId> authors,
                 std::span<const rhem::PaperId> refs, double t);

}  // namespace oracle
