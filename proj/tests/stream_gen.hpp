#pragma once

#include <algorithm>
#include <cstdint>
#include <string>

#include "rhem/events.hpp"
#include "rhem/rng.hpp"

// Small random event streams for property tests. `n_ext` external papers are
// citable from the start; every event publishes a fresh focal paper and cites
// one to three papers seen before it (externals plus earlier focals, which
// includes earlier entries of the same timestamp batch). Roughly a quarter of
// consecutive events share a timestamp so batch handling gets exercised.
namespace testgen {

inline rhem::EventStream stream_of(rhem::Rng& rng, int n_events,
                                   std::uint32_t n_authors,
                                   std::uint32_t n_ext) {
  rhem::EventStream s;
  for (std::uint32_t i = 0; i < n_authors; ++i)
    s.authors.intern("a" + std::to_string(i));
  for (std::uint32_t j = 0; j < n_ext; ++j)
    s.papers.intern("x" + std::to_string(j));

  double t = 1.0;
  for (int m = 0; m < n_events; ++m) {
    if (m > 0 && rng.below(4) != 0) t += 0.25 + rng.next_double();

    rhem::Event ev;
    ev.time = t;
    auto team = 1 + static_cast<std::uint32_t>(
                        rng.below(std::min<std::uint32_t>(3, n_authors)));
    ev.authors = rhem::draw_distinct(n_authors, team, rng);

    auto citable = static_cast<std::uint32_t>(s.papers.size());
    auto n_refs = 1 + static_cast<std::uint32_t>(
                          rng.below(std::min<std::uint32_t>(3, citable)));
    ev.refs = rhem::draw_distinct(citable, n_refs, rng);

    ev.focal = s.papers.intern("w" + std::to_string(m));
    s.events.push_back(std::move(ev));
  }
  rhem::validate_stream(s);
  return s;
}

inline rhem::EventStream random_stream(rhem::Rng& rng, int max_events,
                                       std::uint32_t n_authors,
                                       std::uint32_t n_ext) {
  int n_events = 1 + static_cast<int>(rng.below(max_events));
  return stream_of(rng, n_events, n_authors, n_ext);
}

}  // namespace testgen
