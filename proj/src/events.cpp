#include "rhem/events.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace rhem {

void validate_stream(EventStream& stream) {
  std::stable_sort(stream.events.begin(), stream.events.end(),
                   [](const Event& a, const Event& b) { return a.time < b.time; });
  std::unordered_set<PaperId> published;
  published.reserve(stream.events.size());
  for (auto& ev : stream.events) {
    std::sort(ev.authors.begin(), ev.authors.end());
    ev.authors.erase(std::unique(ev.authors.begin(), ev.authors.end()),
                     ev.authors.end());
    std::sort(ev.refs.begin(), ev.refs.end());
    ev.refs.erase(std::unique(ev.refs.begin(), ev.refs.end()), ev.refs.end());
    if (ev.authors.empty())
      fail(ErrorCode::EmptySet, "event for paper " + std::to_string(ev.focal) +
                                    " has an empty author set");
    if (ev.refs.empty())
      fail(ErrorCode::EmptySet, "event for paper " + std::to_string(ev.focal) +
                                    " has an empty reference set");
    if (std::binary_search(ev.refs.begin(), ev.refs.end(), ev.focal))
      fail(ErrorCode::SelfReference,
           "paper " + std::to_string(ev.focal) + " cites itself");
    if (!published.insert(ev.focal).second)
      fail(ErrorCode::DuplicateFocalPaper,
           "paper " + std::to_string(ev.focal) + " is published twice");
  }
}

void RiskSetState::advance(std::span<const Event> batch) {
  if (batch.empty()) return;
  const double t = batch.front().time;
  if (t < last_time)
    fail(ErrorCode::TimeRegression,
         "batch at time " + format_double(t) + " arrives after time " +
             format_double(last_time));
  for (const auto& ev : batch) {
    if (ev.time != t)
      fail(ErrorCode::TimeRegression, "batch mixes distinct timestamps");
  }
  auto add_author = [&](AuthorId a) {
    if (a >= author_in.size()) author_in.resize(a + 1, 0);
    if (!author_in[a]) {
      author_in[a] = 1;
      author_pool.push_back(a);
    }
  };
  auto add_paper = [&](PaperId p) {
    if (p >= paper_in.size()) {
      paper_in.resize(p + 1, 0);
      paper_pos.resize(p + 1, 0);
    }
    if (!paper_in[p]) {
      paper_in[p] = 1;
      paper_pos[p] = static_cast<std::uint32_t>(paper_pool.size());
      paper_pool.push_back(p);
    }
  };
  for (const auto& ev : batch) {
    for (AuthorId a : ev.authors) add_author(a);
    add_paper(ev.focal);
    for (PaperId r : ev.refs) add_paper(r);
  }
  last_time = t;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_time(const std::string& text, std::size_t lineno) {
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0')
    fail(ErrorCode::MalformedRecord,
         "line " + std::to_string(lineno) + ": bad time value '" + text + "'");
  return v;
}

}  // namespace

EventStream read_event_tsv(std::istream& in) {
  EventStream stream;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 4)
      fail(ErrorCode::MalformedRecord,
           "line " + std::to_string(lineno) + ": expected 4 tab-separated fields");
    Event ev;
    ev.time = parse_time(fields[0], lineno);
    if (fields[1].empty())
      fail(ErrorCode::MalformedRecord,
           "line " + std::to_string(lineno) + ": empty paper id");
    ev.focal = stream.papers.intern(fields[1]);
    for (const auto& a : split(fields[2], ','))
      if (!a.empty()) ev.authors.push_back(stream.authors.intern(a));
    for (const auto& r : split(fields[3], ','))
      if (!r.empty()) ev.refs.push_back(stream.papers.intern(r));
    stream.events.push_back(std::move(ev));
  }
  validate_stream(stream);
  return stream;
}

EventStream read_event_tsv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  return read_event_tsv(in);
}

void write_event_tsv(const EventStream& stream, std::ostream& out) {
  for (const auto& ev : stream.events) {
    out << format_double(ev.time) << '\t' << stream.papers.name(ev.focal) << '\t';
    for (std::size_t i = 0; i < ev.authors.size(); ++i) {
      if (i) out << ',';
      out << stream.authors.name(ev.authors[i]);
    }
    out << '\t';
    for (std::size_t i = 0; i < ev.refs.size(); ++i) {
      if (i) out << ',';
      out << stream.papers.name(ev.refs[i]);
    }
    out << '\n';
  }
}

void write_event_tsv_file(const EventStream& stream, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  write_event_tsv(stream, out);
}

}  // namespace rhem
