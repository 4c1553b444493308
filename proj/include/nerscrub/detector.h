// Token-frequency divergence detection.
//
// A profile table counts, for every surface form in a reference partition,
// how often it was tagged O and how often it occurred inside a mention of
// each type. Mention tokens of a target partition are then labeled against
// the profile:
//
//   UnseenI    surface absent from the reference
//   DiffI      reference occurrences are a strict majority O
//   DiffEtype  reference plurality type differs from the observed type
//
// Plurality ties and O/mention ties are not flagged.

#ifndef NERSCRUB_DETECTOR_H_
#define NERSCRUB_DETECTOR_H_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nerscrub/corpus.h"

namespace nerscrub {

struct TokenProfile {
  std::int64_t total = 0;
  std::int64_t count_o = 0;
  std::map<std::string, std::int64_t> count_by_type;

  std::int64_t in_mention() const;
  bool consistent() const;

  friend bool operator==(const TokenProfile&, const TokenProfile&) = default;
};

class ProfileTable {
 public:
  void Add(const Corpus& c);
  void Add(const Sentence& s);
  // Subtracts counts previously added; entries reaching zero are erased.
  void Subtract(const ProfileTable& other);

  const TokenProfile* Find(const std::string& surface) const;
  std::size_t size() const { return entries_.size(); }
  const std::unordered_map<std::string, TokenProfile>& entries() const { return entries_; }

  friend bool operator==(const ProfileTable&, const ProfileTable&) = default;

 private:
  std::unordered_map<std::string, TokenProfile> entries_;
};

ProfileTable BuildProfile(const Corpus& reference);

enum class SubsetLabel { kUnseenI, kDiffI, kDiffEtype };

const char* ToString(SubsetLabel label);
std::optional<SubsetLabel> ParseSubsetLabel(const std::string& s);

std::optional<SubsetLabel> ClassifyToken(const ProfileTable& profile, const std::string& surface,
                                         const std::string& observed_type);

enum class CandidateSource { kHardEval, kPairList, kRule };
enum class CandidateStatus { kPending, kConfirmedError, kDismissed, kAmbiguous };

const char* ToString(CandidateSource s);
const char* ToString(CandidateStatus s);
std::optional<CandidateSource> ParseCandidateSource(const std::string& s);
std::optional<CandidateStatus> ParseCandidateStatus(const std::string& s);

struct TokenFlag {
  std::size_t offset = 0;  // token index within the mention
  SubsetLabel label = SubsetLabel::kUnseenI;

  friend bool operator==(const TokenFlag&, const TokenFlag&) = default;
  friend auto operator<=>(const TokenFlag&, const TokenFlag&) = default;
};

struct MentionLocation {
  std::string doc_id;
  std::size_t sent_index = 0;
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const MentionLocation&, const MentionLocation&) = default;
  friend auto operator<=>(const MentionLocation&, const MentionLocation&) = default;
};

struct Candidate {
  std::string id;
  Mention mention;  // first occurrence
  std::vector<TokenFlag> flags;
  CandidateSource source = CandidateSource::kHardEval;
  std::vector<std::string> context;  // token texts of the first occurrence's sentence
  std::vector<MentionLocation> occurrences;
  CandidateStatus status = CandidateStatus::kPending;
  std::string note;  // free text for rule/pair-list candidates

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// One candidate per unique (surface, etype, flag pattern) among mentions
// with at least one flagged token, ordered by occurrence count desc then
// surface, type and flags.
std::vector<Candidate> FlagPartition(const Corpus& target, const ProfileTable& profile);

class FoldError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Assigns each document to a fold by a seeded Fisher-Yates shuffle of the
// documents in order of first appearance; fold = shuffled position mod k.
std::map<std::string, std::size_t> AssignFolds(const Corpus& c, std::size_t k,
                                               std::uint64_t seed);

// Flags every fold against a profile of the remaining k-1 folds and merges
// the per-fold candidate lists.
std::vector<Candidate> CrossValidatedFlags(const Corpus& train, std::size_t k = 10,
                                           std::uint64_t seed = 0);

struct PairEntry {
  std::string surface;
  std::string etype;
  std::int64_t count = 0;

  friend bool operator==(const PairEntry&, const PairEntry&) = default;
};

// Counts of exact (surface, type) mention pairs, sorted by count desc, then
// surface, then type. An empty filter keeps every type.
std::vector<PairEntry> MentionTypePairs(const Corpus& c,
                                        const std::vector<std::string>& types = {});

// Review candidates (source pair_list) for the first `top` pair entries.
std::vector<Candidate> PairCandidates(const Corpus& c, const std::vector<PairEntry>& pairs,
                                      std::size_t top);

}  // namespace nerscrub

#endif  // NERSCRUB_DETECTOR_H_
