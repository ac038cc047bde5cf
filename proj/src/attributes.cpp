#include "rhem/attributes.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "rhem/combos.hpp"
#include "rhem/rng.hpp"

namespace rhem {

namespace {

void insert_sorted_unique(std::vector<std::uint32_t>& v, std::uint32_t x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it == v.end() || *it != x) v.insert(it, x);
}

template <typename T>
void ensure_size(std::vector<T>& v, std::size_t idx) {
  if (idx >= v.size()) v.resize(idx + 1);
}

std::uint64_t aa_key(AuthorId citing, AuthorId cited) {
  return (static_cast<std::uint64_t>(citing) << 32) | cited;
}

}  // namespace

void LedgerConfig::validate() const {
  for (auto o : orders) {
    if (o.k == 0 && o.l == 0)
      fail(ErrorCode::BadSubsetOrder, "subset order (0,0) is not defined");
    if (o.k > 3 || o.l > 3)
      fail(ErrorCode::BadSubsetOrder,
           "subset order (" + std::to_string(o.k) + "," + std::to_string(o.l) +
               ") exceeds the supported bound (3,3)");
  }
  if (!(decay.half_life > 0))
    fail(ErrorCode::ConfigInvalid, "half life must be positive");
}

std::size_t AttributeLedger::TupleKeyHash::operator()(const TupleKey& key) const {
  std::uint64_t h = (static_cast<std::uint64_t>(key.k) << 8) | key.l;
  for (auto v : key.id) h = Rng::mix(h ^ v);
  return static_cast<std::size_t>(h);
}

AttributeLedger::AttributeLedger(LedgerConfig config) : config_(std::move(config)) {
  config_.validate();
  for (auto o : config_.orders) materialized_[o.k][o.l] = true;
}

void AttributeLedger::bump_tuple(std::span<const AuthorId> I,
                                 std::span<const PaperId> J, double t) {
  const auto k = static_cast<std::uint8_t>(I.size());
  const auto l = static_cast<std::uint8_t>(J.size());
  if (k == 1 && l == 0) {
    ensure_size(per_author_, I[0]);
    per_author_[I[0]].bump(t, config_.decay);
    return;
  }
  if (k == 0 && l == 1) {
    ensure_size(per_paper_, J[0]);
    per_paper_[J[0]].bump(t, config_.decay);
    return;
  }
  TupleKey key;
  key.k = k;
  key.l = l;
  for (std::uint8_t i = 0; i < k; ++i) key.id[i] = I[i];
  for (std::uint8_t i = 0; i < l; ++i) key.id[k + i] = J[i];
  auto [it, inserted] = tuples_.try_emplace(key);
  it->second.bump(t, config_.decay);
  if (inserted) {
    // First touch: record the pair in the neighbor indexes used by closures.
    if (k == 2 && l == 0) {
      ensure_size(coauthor_nbrs_, std::max(I[0], I[1]));
      insert_sorted_unique(coauthor_nbrs_[I[0]], I[1]);
      insert_sorted_unique(coauthor_nbrs_[I[1]], I[0]);
    } else if (k == 1 && l == 1) {
      ensure_size(cited_paper_nbrs_, I[0]);
      insert_sorted_unique(cited_paper_nbrs_[I[0]], J[0]);
    }
  }
}

void AttributeLedger::apply_event(const Event& ev) {
  const double t = ev.time;
  if (t < last_time_)
    fail(ErrorCode::TimeRegression, "events applied out of time order");

  // Subset citation counters for every configured order present in the event.
  for (auto o : config_.orders) {
    if (o.k > ev.authors.size() || o.l > ev.refs.size()) continue;
    for_each_combo<AuthorId>(ev.authors, o.k, [&](std::span<const AuthorId> I) {
      for_each_combo<PaperId>(ev.refs, o.l, [&](std::span<const PaperId> J) {
        bump_tuple(I, J, t);
      });
    });
  }

  // Authors of the cited papers, de-duplicated: each cited author picks up one
  // citedness increment per citing event, and each (citing author, cited
  // author) pair one author->author increment, regardless of how many of the
  // cited author's papers appear among the references.
  std::vector<AuthorId> cited_authors;
  for (PaperId r : ev.refs) {
    if (!published(r)) continue;
    const auto& pub = publications_[r];
    cited_authors.insert(cited_authors.end(), pub.authors.begin(),
                         pub.authors.end());
  }
  std::sort(cited_authors.begin(), cited_authors.end());
  cited_authors.erase(std::unique(cited_authors.begin(), cited_authors.end()),
                      cited_authors.end());
  for (AuthorId cited : cited_authors) {
    ensure_size(citedness_, cited);
    citedness_[cited].bump(t, config_.decay);
  }
  for (AuthorId citing : ev.authors) {
    for (AuthorId cited : cited_authors) {
      auto [it, inserted] = author_author_.try_emplace(aa_key(citing, cited));
      it->second.bump(t, config_.decay);
      if (inserted) {
        ensure_size(aa_out_nbrs_, citing);
        ensure_size(aa_in_nbrs_, cited);
        insert_sorted_unique(aa_out_nbrs_[citing], cited);
        insert_sorted_unique(aa_in_nbrs_[cited], citing);
      }
    }
  }

  // Publication record, written once.
  ensure_size(publications_, ev.focal);
  auto& pub = publications_[ev.focal];
  if (pub.present)
    fail(ErrorCode::DuplicateFocalPaper,
         "paper " + std::to_string(ev.focal) + " published twice");
  pub.present = true;
  pub.time = t;
  pub.authors = ev.authors;
  pub.refs = ev.refs;

  last_time_ = t;
}

const DecayedCount* AttributeLedger::find_tuple(std::span<const AuthorId> I,
                                                std::span<const PaperId> J) const {
  TupleKey key;
  key.k = static_cast<std::uint8_t>(I.size());
  key.l = static_cast<std::uint8_t>(J.size());
  for (std::uint8_t i = 0; i < key.k; ++i) key.id[i] = I[i];
  for (std::uint8_t i = 0; i < key.l; ++i) key.id[key.k + i] = J[i];
  auto it = tuples_.find(key);
  return it == tuples_.end() ? nullptr : &it->second;
}

double AttributeLedger::cite_subset(std::span<const AuthorId> I,
                                    std::span<const PaperId> J, double t) const {
  const auto k = I.size();
  const auto l = J.size();
  if (!order_materialized(static_cast<std::uint8_t>(k),
                          static_cast<std::uint8_t>(l)))
    fail(ErrorCode::BadSubsetOrder,
         "subset order (" + std::to_string(k) + "," + std::to_string(l) +
             ") was not materialized in this ledger");
  if (k == 1 && l == 0)
    return I[0] < per_author_.size() ? per_author_[I[0]].read(t, config_.decay)
                                     : 0.0;
  if (k == 0 && l == 1)
    return J[0] < per_paper_.size() ? per_paper_[J[0]].read(t, config_.decay)
                                    : 0.0;
  const DecayedCount* c = find_tuple(I, J);
  return c ? c->read(t, config_.decay) : 0.0;
}

double AttributeLedger::cite_author_author(AuthorId citing, AuthorId cited,
                                           double t) const {
  auto it = author_author_.find(aa_key(citing, cited));
  return it == author_author_.end() ? 0.0 : it->second.read(t, config_.decay);
}

double AttributeLedger::cite_paper_paper(PaperId citing, PaperId cited,
                                         double t) const {
  if (!published(citing)) return 0.0;
  const auto& pub = publications_[citing];
  if (!std::binary_search(pub.refs.begin(), pub.refs.end(), cited)) return 0.0;
  return config_.decay.weight(t - pub.time);
}

double AttributeLedger::authored(AuthorId i, PaperId j, double t) const {
  if (!published(j)) return 0.0;
  const auto& pub = publications_[j];
  if (!std::binary_search(pub.authors.begin(), pub.authors.end(), i)) return 0.0;
  return config_.decay.weight(t - pub.time);
}

double AttributeLedger::author_citedness(AuthorId i, double t) const {
  return i < citedness_.size() ? citedness_[i].read(t, config_.decay) : 0.0;
}

double AttributeLedger::outdegree(PaperId j, double t) const {
  if (!published(j)) return 0.0;
  const auto& pub = publications_[j];
  return config_.decay.weight(t - pub.time) *
         static_cast<double>(pub.refs.size());
}

bool AttributeLedger::published(PaperId j) const {
  return j < publications_.size() && publications_[j].present;
}

std::span<const AuthorId> AttributeLedger::paper_authors(PaperId j) const {
  if (!published(j)) return {};
  return publications_[j].authors;
}

std::span<const PaperId> AttributeLedger::paper_refs(PaperId j) const {
  if (!published(j)) return {};
  return publications_[j].refs;
}

namespace {
std::span<const std::uint32_t> nbrs(
    const std::vector<std::vector<std::uint32_t>>& lists, std::uint32_t i) {
  if (i >= lists.size()) return {};
  return lists[i];
}
}  // namespace

std::span<const AuthorId> AttributeLedger::coauthors_of(AuthorId i) const {
  return nbrs(coauthor_nbrs_, i);
}
std::span<const PaperId> AttributeLedger::papers_cited_by(AuthorId i) const {
  return nbrs(cited_paper_nbrs_, i);
}
std::span<const AuthorId> AttributeLedger::authors_cited_by(AuthorId i) const {
  return nbrs(aa_out_nbrs_, i);
}
std::span<const AuthorId> AttributeLedger::authors_citing(AuthorId i) const {
  return nbrs(aa_in_nbrs_, i);
}

// ---------------------------------------------------------------------------
// Checkpointing. Lines are tab separated, doubles printed with 17 significant
// digits (enough to reconstruct the exact bit pattern), entries emitted in
// sorted key order so identical ledgers serialize identically.

void AttributeLedger::save(std::ostream& out) const {
  out << "ledger\t1\n";
  out << "halflife\t" << format_double(config_.decay.half_life) << '\n';
  out << "lasttime\t" << format_double(last_time_) << '\n';
  out << "orders";
  for (auto o : config_.orders)
    out << '\t' << int(o.k) << ',' << int(o.l);
  out << '\n';

  for (PaperId j = 0; j < publications_.size(); ++j) {
    const auto& pub = publications_[j];
    if (!pub.present) continue;
    out << "pub\t" << j << '\t' << format_double(pub.time) << '\t';
    for (std::size_t i = 0; i < pub.authors.size(); ++i)
      out << (i ? "," : "") << pub.authors[i];
    out << '\t';
    for (std::size_t i = 0; i < pub.refs.size(); ++i)
      out << (i ? "," : "") << pub.refs[i];
    out << '\n';
  }

  auto dump_dense = [&](const char* tag, const std::vector<DecayedCount>& v) {
    for (std::uint32_t i = 0; i < v.size(); ++i) {
      if (v[i].value == 0.0) continue;
      out << tag << '\t' << i << '\t' << format_double(v[i].value) << '\t'
          << format_double(v[i].last_t) << '\n';
    }
  };
  dump_dense("ap1", per_author_);
  dump_dense("pc1", per_paper_);

  std::map<std::pair<std::array<std::uint32_t, 6>, std::pair<int, int>>,
           const DecayedCount*>
      sorted_tuples;
  for (const auto& [key, cnt] : tuples_)
    sorted_tuples[{key.id, {key.k, key.l}}] = &cnt;
  for (const auto& [key, cnt] : sorted_tuples) {
    out << "tup\t" << key.second.first << '\t' << key.second.second;
    for (int i = 0; i < key.second.first + key.second.second; ++i)
      out << '\t' << key.first[i];
    out << '\t' << format_double(cnt->value) << '\t'
        << format_double(cnt->last_t) << '\n';
  }

  std::map<std::uint64_t, const DecayedCount*> sorted_aa;
  for (const auto& [key, cnt] : author_author_) sorted_aa[key] = &cnt;
  for (const auto& [key, cnt] : sorted_aa)
    out << "aa\t" << (key >> 32) << '\t' << (key & 0xffffffffu) << '\t'
        << format_double(cnt->value) << '\t' << format_double(cnt->last_t)
        << '\n';

  dump_dense("pop", citedness_);
  out << "end\n";
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::uint32_t> parse_id_list(const std::string& text) {
  std::vector<std::uint32_t> ids;
  std::size_t start = 0;
  if (text.empty()) return ids;
  while (true) {
    auto pos = text.find(',', start);
    ids.push_back(
        static_cast<std::uint32_t>(std::strtoul(text.c_str() + start, nullptr, 10)));
    if (pos == std::string::npos) return ids;
    start = pos + 1;
  }
}

[[noreturn]] void bad_ckpt(const std::string& why) {
  fail(ErrorCode::MalformedRecord, "bad ledger checkpoint: " + why);
}

}  // namespace

AttributeLedger AttributeLedger::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || split_tabs(line)[0] != "ledger")
    bad_ckpt("missing header");
  LedgerConfig config;
  double last_time = -std::numeric_limits<double>::infinity();
  std::vector<std::string> pending;
  bool saw_end = false;
  // First the scalar/config lines, then record lines in any order.
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split_tabs(line);
    if (f[0] == "halflife") {
      config.decay.half_life = std::strtod(f.at(1).c_str(), nullptr);
    } else if (f[0] == "lasttime") {
      last_time = std::strtod(f.at(1).c_str(), nullptr);
    } else if (f[0] == "orders") {
      for (std::size_t i = 1; i < f.size(); ++i) {
        auto ids = parse_id_list(f[i]);
        if (ids.size() != 2) bad_ckpt("bad order entry");
        config.orders.push_back({static_cast<std::uint8_t>(ids[0]),
                                 static_cast<std::uint8_t>(ids[1])});
      }
    } else if (f[0] == "end") {
      saw_end = true;
      break;
    } else {
      pending.push_back(line);
    }
  }
  if (!saw_end) bad_ckpt("truncated checkpoint");

  AttributeLedger ledger(config);
  ledger.last_time_ = last_time;
  auto load_count = [](const std::vector<std::string>& f, std::size_t at) {
    DecayedCount c;
    c.value = std::strtod(f.at(at).c_str(), nullptr);
    c.last_t = std::strtod(f.at(at + 1).c_str(), nullptr);
    return c;
  };
  for (const auto& rec : pending) {
    auto f = split_tabs(rec);
    if (f[0] == "pub") {
      auto j = static_cast<PaperId>(std::strtoul(f.at(1).c_str(), nullptr, 10));
      ensure_size(ledger.publications_, j);
      auto& pub = ledger.publications_[j];
      pub.present = true;
      pub.time = std::strtod(f.at(2).c_str(), nullptr);
      pub.authors = parse_id_list(f.at(3));
      pub.refs = parse_id_list(f.at(4));
    } else if (f[0] == "ap1" || f[0] == "pc1" || f[0] == "pop") {
      auto i = static_cast<std::uint32_t>(std::strtoul(f.at(1).c_str(), nullptr, 10));
      auto& dense = f[0] == "ap1" ? ledger.per_author_
                    : f[0] == "pc1" ? ledger.per_paper_
                                    : ledger.citedness_;
      ensure_size(dense, i);
      dense[i] = load_count(f, 2);
    } else if (f[0] == "tup") {
      TupleKey key;
      key.k = static_cast<std::uint8_t>(std::strtoul(f.at(1).c_str(), nullptr, 10));
      key.l = static_cast<std::uint8_t>(std::strtoul(f.at(2).c_str(), nullptr, 10));
      if (f.size() != std::size_t(3 + key.k + key.l + 2)) bad_ckpt("bad tuple");
      for (int i = 0; i < key.k + key.l; ++i)
        key.id[i] =
            static_cast<std::uint32_t>(std::strtoul(f.at(3 + i).c_str(), nullptr, 10));
      ledger.tuples_[key] = load_count(f, 3 + key.k + key.l);
      if (key.k == 2 && key.l == 0) {
        ensure_size(ledger.coauthor_nbrs_, std::max(key.id[0], key.id[1]));
        insert_sorted_unique(ledger.coauthor_nbrs_[key.id[0]], key.id[1]);
        insert_sorted_unique(ledger.coauthor_nbrs_[key.id[1]], key.id[0]);
      } else if (key.k == 1 && key.l == 1) {
        ensure_size(ledger.cited_paper_nbrs_, key.id[0]);
        insert_sorted_unique(ledger.cited_paper_nbrs_[key.id[0]], key.id[1]);
      }
    } else if (f[0] == "aa") {
      auto i = static_cast<AuthorId>(std::strtoul(f.at(1).c_str(), nullptr, 10));
      auto j = static_cast<AuthorId>(std::strtoul(f.at(2).c_str(), nullptr, 10));
      ledger.author_author_[aa_key(i, j)] = load_count(f, 3);
      ensure_size(ledger.aa_out_nbrs_, i);
      ensure_size(ledger.aa_in_nbrs_, j);
      insert_sorted_unique(ledger.aa_out_nbrs_[i], j);
      insert_sorted_unique(ledger.aa_in_nbrs_[j], i);
    } else {
      bad_ckpt("unknown record '" + f[0] + "'");
    }
  }
  return ledger;
}

bool AttributeLedger::operator==(const AttributeLedger& other) const {
  std::ostringstream a, b;
  save(a);
  other.save(b);
  return a.str() == b.str();
}

}  // namespace rhem
