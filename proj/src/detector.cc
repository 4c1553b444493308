#include "nerscrub/detector.h"

#include <algorithm>
#include <random>
#include <unordered_map>

#include "nerscrub/hash.h"

namespace nerscrub {

std::int64_t TokenProfile::in_mention() const {
  std::int64_t n = 0;
  for (const auto& [type, count] : count_by_type) n += count;
  return n;
}

bool TokenProfile::consistent() const {
  if (total < 0 || count_o < 0) return false;
  for (const auto& [type, count] : count_by_type) {
    if (count < 0) return false;
  }
  return total == count_o + in_mention();
}

void ProfileTable::Add(const Sentence& s) {
  for (const LabeledToken& t : s.tokens) {
    TokenProfile& p = entries_[t.text];
    ++p.total;
    if (t.tag.is_outside()) {
      ++p.count_o;
    } else {
      ++p.count_by_type[t.tag.type];
    }
  }
}

void ProfileTable::Add(const Corpus& c) {
  for (const Sentence& s : c.sentences) Add(s);
}

void ProfileTable::Subtract(const ProfileTable& other) {
  for (const auto& [surface, theirs] : other.entries_) {
    auto it = entries_.find(surface);
    if (it == entries_.end()) continue;
    TokenProfile& mine = it->second;
    mine.total -= theirs.total;
    mine.count_o -= theirs.count_o;
    for (const auto& [type, count] : theirs.count_by_type) {
      auto t = mine.count_by_type.find(type);
      if (t == mine.count_by_type.end()) continue;
      t->second -= count;
      if (t->second <= 0) mine.count_by_type.erase(t);
    }
    if (mine.total <= 0) entries_.erase(it);
  }
}

const TokenProfile* ProfileTable::Find(const std::string& surface) const {
  auto it = entries_.find(surface);
  return it == entries_.end() ? nullptr : &it->second;
}

ProfileTable BuildProfile(const Corpus& reference) {
  ProfileTable table;
  table.Add(reference);
  return table;
}

const char* ToString(SubsetLabel label) {
  switch (label) {
    case SubsetLabel::kUnseenI:
      return "unseen-I";
    case SubsetLabel::kDiffI:
      return "diff-I";
    case SubsetLabel::kDiffEtype:
      return "diff-etype";
  }
  return "unknown";
}

std::optional<SubsetLabel> ParseSubsetLabel(const std::string& s) {
  for (SubsetLabel l : {SubsetLabel::kUnseenI, SubsetLabel::kDiffI, SubsetLabel::kDiffEtype}) {
    if (s == ToString(l)) return l;
  }
  return std::nullopt;
}

std::optional<SubsetLabel> ClassifyToken(const ProfileTable& profile, const std::string& surface,
                                         const std::string& observed_type) {
  const TokenProfile* p = profile.Find(surface);
  if (p == nullptr) return SubsetLabel::kUnseenI;
  if (p->count_o > p->in_mention()) return SubsetLabel::kDiffI;

  // Strict plurality among mention types; a tie names no winner.
  const std::string* best = nullptr;
  std::int64_t best_count = 0;
  bool tied = false;
  for (const auto& [type, count] : p->count_by_type) {
    if (count > best_count) {
      best = &type;
      best_count = count;
      tied = false;
    } else if (count == best_count) {
      tied = true;
    }
  }
  if (best == nullptr || tied) return std::nullopt;
  if (*best != observed_type) return SubsetLabel::kDiffEtype;
  return std::nullopt;
}

const char* ToString(CandidateSource s) {
  switch (s) {
    case CandidateSource::kHardEval:
      return "hardeval";
    case CandidateSource::kPairList:
      return "pair_list";
    case CandidateSource::kRule:
      return "rule";
  }
  return "unknown";
}

const char* ToString(CandidateStatus s) {
  switch (s) {
    case CandidateStatus::kPending:
      return "pending";
    case CandidateStatus::kConfirmedError:
      return "confirmed_error";
    case CandidateStatus::kDismissed:
      return "dismissed";
    case CandidateStatus::kAmbiguous:
      return "ambiguous";
  }
  return "unknown";
}

std::optional<CandidateSource> ParseCandidateSource(const std::string& s) {
  for (auto v : {CandidateSource::kHardEval, CandidateSource::kPairList, CandidateSource::kRule}) {
    if (s == ToString(v)) return v;
  }
  return std::nullopt;
}

std::optional<CandidateStatus> ParseCandidateStatus(const std::string& s) {
  for (auto v : {CandidateStatus::kPending, CandidateStatus::kConfirmedError,
                 CandidateStatus::kDismissed, CandidateStatus::kAmbiguous}) {
    if (s == ToString(v)) return v;
  }
  return std::nullopt;
}

namespace {

std::string FlagPattern(const std::vector<TokenFlag>& flags) {
  std::string out;
  for (const TokenFlag& f : flags) {
    out += std::to_string(f.offset);
    out += ':';
    out += ToString(f.label);
    out += ';';
  }
  return out;
}

// Groups flagged mention occurrences into candidates keyed by surface, type
// and flag pattern.
class CandidateCollector {
 public:
  void Add(const Sentence& s, const Mention& m, std::vector<TokenFlag> flags) {
    std::string key = m.surface;
    key += '\x1f';
    key += m.etype;
    key += '\x1f';
    key += FlagPattern(flags);
    auto [it, inserted] = index_.try_emplace(std::move(key), candidates_.size());
    if (inserted) {
      Candidate c;
      c.mention = m;
      c.flags = std::move(flags);
      c.source = CandidateSource::kHardEval;
      c.context.reserve(s.tokens.size());
      for (const LabeledToken& t : s.tokens) c.context.push_back(t.text);
      c.id = StableHasher()
                 .Add(ToString(c.source))
                 .Add(m.surface)
                 .Add(m.etype)
                 .Add(FlagPattern(c.flags))
                 .hex();
      candidates_.push_back(std::move(c));
    }
    candidates_[it->second].occurrences.push_back({m.doc_id, m.sent_index, m.start, m.end});
  }

  void Scan(const Sentence& s, const ProfileTable& profile) {
    for (Mention& m : ExtractMentions(s)) {
      std::vector<TokenFlag> flags;
      for (std::size_t i = m.start; i < m.end; ++i) {
        if (auto label = ClassifyToken(profile, s.tokens[i].text, m.etype)) {
          flags.push_back({i - m.start, *label});
        }
      }
      if (!flags.empty()) Add(s, m, std::move(flags));
    }
  }

  std::vector<Candidate> Finish() && {
    std::stable_sort(candidates_.begin(), candidates_.end(),
                     [](const Candidate& a, const Candidate& b) {
                       if (a.occurrences.size() != b.occurrences.size()) {
                         return a.occurrences.size() > b.occurrences.size();
                       }
                       if (a.mention.surface != b.mention.surface) {
                         return a.mention.surface < b.mention.surface;
                       }
                       if (a.mention.etype != b.mention.etype) {
                         return a.mention.etype < b.mention.etype;
                       }
                       return a.flags < b.flags;
                     });
    return std::move(candidates_);
  }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Candidate> candidates_;
};

}  // namespace

std::vector<Candidate> FlagPartition(const Corpus& target, const ProfileTable& profile) {
  CandidateCollector collector;
  for (const Sentence& s : target.sentences) collector.Scan(s, profile);
  return std::move(collector).Finish();
}

std::map<std::string, std::size_t> AssignFolds(const Corpus& c, std::size_t k,
                                               std::uint64_t seed) {
  if (k < 2) throw FoldError("fold count must be at least 2");
  std::vector<std::string> docs = c.document_ids();
  if (docs.size() < k) {
    throw FoldError("corpus has " + std::to_string(docs.size()) + " document(s), fewer than " +
                    std::to_string(k) + " folds; use a smaller fold count");
  }
  // Fisher-Yates with rejection sampling: mt19937_64 output is fully
  // specified, unlike std::shuffle and the std distributions.
  std::mt19937_64 rng(seed);
  for (std::size_t i = docs.size() - 1; i > 0; --i) {
    const std::uint64_t bound = i + 1;
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(docs[i], docs[r % bound]);
  }
  std::map<std::string, std::size_t> folds;
  for (std::size_t i = 0; i < docs.size(); ++i) folds[docs[i]] = i % k;
  return folds;
}

std::vector<Candidate> CrossValidatedFlags(const Corpus& train, std::size_t k,
                                           std::uint64_t seed) {
  const auto folds = AssignFolds(train, k, seed);
  std::vector<std::size_t> fold_of(train.sentences.size());
  std::vector<ProfileTable> fold_profiles(k);
  ProfileTable all;
  for (std::size_t i = 0; i < train.sentences.size(); ++i) {
    const Sentence& s = train.sentences[i];
    fold_of[i] = folds.at(s.doc_id);
    fold_profiles[fold_of[i]].Add(s);
    all.Add(s);
  }
  // Held-out profile of fold f = everything minus fold f.
  std::vector<ProfileTable> rest(k, all);
  for (std::size_t f = 0; f < k; ++f) rest[f].Subtract(fold_profiles[f]);

  CandidateCollector collector;
  for (std::size_t i = 0; i < train.sentences.size(); ++i) {
    collector.Scan(train.sentences[i], rest[fold_of[i]]);
  }
  return std::move(collector).Finish();
}

std::vector<PairEntry> MentionTypePairs(const Corpus& c, const std::vector<std::string>& types) {
  std::map<std::pair<std::string, std::string>, std::int64_t> counts;
  for (const Sentence& s : c.sentences) {
    for (Mention& m : ExtractMentions(s)) {
      if (!types.empty() && std::find(types.begin(), types.end(), m.etype) == types.end()) {
        continue;
      }
      ++counts[{std::move(m.surface), std::move(m.etype)}];
    }
  }
  std::vector<PairEntry> out;
  out.reserve(counts.size());
  for (auto& [key, count] : counts) out.push_back({key.first, key.second, count});
  // The map already yields (surface, type) order; stable sort keeps it.
  std::stable_sort(out.begin(), out.end(),
                   [](const PairEntry& a, const PairEntry& b) { return a.count > b.count; });
  return out;
}

std::vector<Candidate> PairCandidates(const Corpus& c, const std::vector<PairEntry>& pairs,
                                      std::size_t top) {
  std::map<std::pair<std::string, std::string>, std::size_t> wanted;
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < pairs.size() && i < top; ++i) {
    wanted[{pairs[i].surface, pairs[i].etype}] = i;
    Candidate cand;
    cand.source = CandidateSource::kPairList;
    cand.id = StableHasher().Add(ToString(cand.source)).Add(pairs[i].surface).Add(pairs[i].etype).hex();
    cand.note = "pair count " + std::to_string(pairs[i].count);
    out.push_back(std::move(cand));
  }
  for (const Sentence& s : c.sentences) {
    for (Mention& m : ExtractMentions(s)) {
      auto it = wanted.find({m.surface, m.etype});
      if (it == wanted.end()) continue;
      Candidate& cand = out[it->second];
      if (cand.occurrences.empty()) {
        for (const LabeledToken& t : s.tokens) cand.context.push_back(t.text);
        cand.mention = m;
      }
      cand.occurrences.push_back({m.doc_id, m.sent_index, m.start, m.end});
    }
  }
  return out;
}

}  // namespace nerscrub
