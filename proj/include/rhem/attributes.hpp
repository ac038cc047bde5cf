#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "rhem/events.hpp"

namespace rhem {

// Exponential down-weighting of history by elapsed time, parameterized by the
// half-life in time units. An infinite half-life keeps plain counts.
struct DecayConfig {
  double half_life = 3.0;

  bool infinite() const { return !std::isfinite(half_life); }
  double weight(double dt) const {
    if (infinite()) return 1.0;
    return std::exp(-dt * (M_LN2 / half_life));
  }
  static DecayConfig none() {
    return DecayConfig{std::numeric_limits<double>::infinity()};
  }
};

// A decayed count. The stored value is exact as of `last_t`; reads multiply by
// the decay weight for the remaining gap, writes first bring the value forward.
// Because the kernel is multiplicative over concatenated gaps, updating lazily
// on touch gives the same number as re-summing the whole history.
struct DecayedCount {
  double value = 0.0;
  double last_t = 0.0;

  double read(double t, const DecayConfig& d) const {
    if (value == 0.0) return 0.0;
    return value * d.weight(t - last_t);
  }
  void bump(double t, const DecayConfig& d) {
    value = value * d.weight(t - last_t) + 1.0;
    last_t = t;
  }
};

// A (k,l) subset-tuple order of the joint citation counter: k authors crossed
// with l cited papers. Orders up to (3,3) are supported; (0,0) is meaningless.
struct SubsetOrder {
  std::uint8_t k = 0;
  std::uint8_t l = 0;
  bool operator==(const SubsetOrder&) const = default;
};

struct LedgerConfig {
  DecayConfig decay;
  std::vector<SubsetOrder> orders;  // subset orders to materialize

  void validate() const;
};

// Incrementally maintained, time-decayed network attributes of the event
// history. All reads take the query time t and decay on the fly; apply_event
// must be called in nondecreasing time order, and reads must not precede the
// last applied event.
//
// Stored relations:
//   subset citation counters  joint (author-subset, paper-subset) tuples, one
//                             increment per event containing the tuple;
//                             materialized only for configured orders
//   author->author citations  one increment per citing event per cited author
//                             (an event counts once toward (i,i') if it cites
//                             at least one of i' papers)
//   author citedness          one increment per citing event per cited author
//   publication records       focal paper's time, author list, reference list
//                             (immutable once published)
// Derived exactly from publication records (a paper publishes at most once):
//   paper->paper citation     cite_pp(j,j') = decay since j's publication if
//                             j' is among j's references
//   authorship relation       author(i,j) = decay since publication if i wrote j
//   reference outdegree       outdegree(j) = decay * |refs(j)|
class AttributeLedger {
 public:
  explicit AttributeLedger(LedgerConfig config);

  void apply_event(const Event& ev);

  // Joint subset citation counter for sorted tuples (I, J). The order
  // (|I|,|J|) must be one of the configured orders.
  double cite_subset(std::span<const AuthorId> I, std::span<const PaperId> J,
                     double t) const;
  double cite_author_author(AuthorId citing, AuthorId cited, double t) const;
  double cite_paper_paper(PaperId citing, PaperId cited, double t) const;
  double authored(AuthorId i, PaperId j, double t) const;
  double author_citedness(AuthorId i, double t) const;
  double outdegree(PaperId j, double t) const;

  bool published(PaperId j) const;
  std::span<const AuthorId> paper_authors(PaperId j) const;
  std::span<const PaperId> paper_refs(PaperId j) const;

  // Sorted neighbor-id lists for closure covariates. Entries are nodes whose
  // shared counter has ever been touched (the decayed value may be tiny but is
  // mathematically nonzero).
  std::span<const AuthorId> coauthors_of(AuthorId i) const;
  std::span<const PaperId> papers_cited_by(AuthorId i) const;
  std::span<const AuthorId> authors_cited_by(AuthorId i) const;
  std::span<const AuthorId> authors_citing(AuthorId i) const;

  const LedgerConfig& config() const { return config_; }
  double last_event_time() const { return last_time_; }
  bool order_materialized(std::uint8_t k, std::uint8_t l) const {
    return k <= 3 && l <= 3 && materialized_[k][l];
  }

  // Text checkpoint with exact (17 significant digit) round-trip semantics.
  void save(std::ostream& out) const;
  static AttributeLedger load(std::istream& in);
  bool operator==(const AttributeLedger& other) const;

 private:
  struct TupleKey {
    std::array<std::uint32_t, 6> id{};
    std::uint8_t k = 0;
    std::uint8_t l = 0;
    bool operator==(const TupleKey&) const = default;
  };
  struct TupleKeyHash {
    std::size_t operator()(const TupleKey& key) const;
  };
  struct Publication {
    double time = 0.0;
    std::vector<AuthorId> authors;
    std::vector<PaperId> refs;
    bool present = false;
  };

  void bump_tuple(std::span<const AuthorId> I, std::span<const PaperId> J,
                  double t);
  const DecayedCount* find_tuple(std::span<const AuthorId> I,
                                 std::span<const PaperId> J) const;

  LedgerConfig config_;
  bool materialized_[4][4] = {};
  double last_time_ = -std::numeric_limits<double>::infinity();

  std::vector<DecayedCount> per_author_;      // order (1,0)
  std::vector<DecayedCount> per_paper_;       // order (0,1)
  std::unordered_map<TupleKey, DecayedCount, TupleKeyHash> tuples_;
  std::unordered_map<std::uint64_t, DecayedCount> author_author_;
  std::vector<DecayedCount> citedness_;
  std::vector<Publication> publications_;

  std::vector<std::vector<AuthorId>> coauthor_nbrs_;
  std::vector<std::vector<PaperId>> cited_paper_nbrs_;
  std::vector<std::vector<AuthorId>> aa_out_nbrs_;
  std::vector<std::vector<AuthorId>> aa_in_nbrs_;
};

}  // namespace rhem
