#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rhem/errors.hpp"

namespace rhem {

using AuthorId = std::uint32_t;
using PaperId = std::uint32_t;

// One publication event: at `time` the new paper `focal` appears, written by
// the author set and citing the reference set. Both sets are kept sorted and
// de-duplicated; `refs` never contains `focal`.
struct Event {
  double time = 0.0;
  PaperId focal = 0;
  std::vector<AuthorId> authors;
  std::vector<PaperId> refs;
};

// Maps external string ids to dense indices (first-appearance order).
class IdInterner {
 public:
  std::uint32_t intern(const std::string& key) {
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(names_.size());
    index_.emplace(key, id);
    names_.push_back(key);
    return id;
  }
  const std::string& name(std::uint32_t id) const { return names_[id]; }
  std::uint32_t size() const { return static_cast<std::uint32_t>(names_.size()); }
  bool contains(const std::string& key) const { return index_.count(key) != 0; }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::string> names_;
};

struct EventStream {
  std::vector<Event> events;  // sorted by time after validate_stream
  IdInterner authors;
  IdInterner papers;
};

// Canonicalizes and checks a stream in place: sorts events stably by time,
// sorts/uniques each set, and rejects empty author or reference sets, a focal
// paper citing itself, and a focal paper published twice.
void validate_stream(EventStream& stream);

// Authors and papers ever seen up to the current batch. Pools grow only; the
// position vectors let the sampler treat each pool as a dense array.
struct RiskSetState {
  std::vector<AuthorId> author_pool;
  std::vector<PaperId> paper_pool;
  std::vector<std::uint8_t> author_in;             // indexed by dense id
  std::vector<std::uint8_t> paper_in;
  std::vector<std::uint32_t> paper_pos;            // dense id -> index in paper_pool
  double last_time = -std::numeric_limits<double>::infinity();

  // Adds every node of a same-timestamp batch. All events of the batch must
  // share one time, and time must not move backwards across calls.
  void advance(std::span<const Event> batch);
};

// Invokes fn(first, last) for each maximal run of equal-time events.
template <typename Fn>
void for_each_batch(const std::vector<Event>& events, Fn&& fn) {
  std::size_t i = 0;
  while (i < events.size()) {
    std::size_t j = i + 1;
    while (j < events.size() && events[j].time == events[i].time) ++j;
    fn(i, j);
    i = j;
  }
}

// Tab-separated event lines: time, focal paper id, comma-joined author ids,
// comma-joined reference ids. Reading interns ids in line order and validates.
EventStream read_event_tsv(std::istream& in);
EventStream read_event_tsv_file(const std::string& path);
void write_event_tsv(const EventStream& stream, std::ostream& out);
void write_event_tsv_file(const EventStream& stream, const std::string& path);

// Formats a double with enough digits to round-trip exactly.
std::string format_double(double v);

}  // namespace rhem
