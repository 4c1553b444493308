// Guideline-derived re-annotation rules.
//
// Each rule looks at one mention and either proposes an edit, marks the
// mention for human review without proposing anything, or ignores it. Rules
// only see the mention itself: its surface is the space-joined token texts,
// and token texts never contain spaces, so the tokens are recoverable.

#ifndef NERSCRUB_RULES_H_
#define NERSCRUB_RULES_H_

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nerscrub/corpus.h"
#include "nerscrub/detector.h"
#include "nerscrub/edit.h"

namespace nerscrub {

std::vector<std::string_view> MentionTokens(const Mention& m);

// True for tokens made only of Unicode punctuation (categories P*), the
// backtick quotes used by PTB-style corpora, or a PTB bracket escape such as
// -LRB-.
bool IsPunctuationToken(std::string_view token);

inline constexpr std::string_view kLeadingDeterminer = "leading_determiner";
inline constexpr std::string_view kTrailingPossessive = "trailing_possessive";
inline constexpr std::string_view kEdgePunctuation = "edge_punctuation";

// shrink_left(1) when the first token is the/a/an (any case) and the mention
// is neither DATE nor TIME.
std::optional<EditProposal> RuleLeadingDeterminer(const Mention& m);

// shrink_right(1) when the last token is a split-off "'s" or "'".
std::optional<EditProposal> RuleTrailingPossessive(const Mention& m);

// Combined shrink over the maximal punctuation-only token runs at both
// edges. Never proposes emptying the mention.
std::optional<EditProposal> RuleEdgePunctuation(const Mention& m);

struct RuleSpec {
  std::string id;
  std::function<std::optional<EditProposal>(const Mention&)> propose;
  // Returns a reviewer note for mentions the rule will not edit but that
  // still deserve a look.
  std::function<std::optional<std::string>(const Mention&)> review;
  bool enabled = true;
};

// Named rules, toggled independently. The edit vocabulary already covers
// growth, so span-extending rules plug in through the same interface.
class RuleSet {
 public:
  // The three built-in rules, all enabled.
  static RuleSet Default();

  void Add(RuleSpec spec);
  // Returns false if no rule has this id.
  bool SetEnabled(std::string_view id, bool enabled);
  // Keeps only the named rules enabled; throws std::invalid_argument on an
  // unknown id.
  void EnableOnly(const std::vector<std::string>& ids);

  const std::vector<RuleSpec>& rules() const { return rules_; }

 private:
  std::vector<RuleSpec> rules_;
};

// Every enabled rule over every mention, ordered by (doc_id, sent_index,
// start, rule_id).
std::vector<EditProposal> Scan(const Corpus& c, const RuleSet& rules);

// Review-only findings (source = rule), one candidate per (rule, surface,
// type) with all occurrences.
std::vector<Candidate> ScanReviewCandidates(const Corpus& c, const RuleSet& rules);

}  // namespace nerscrub

#endif  // NERSCRUB_RULES_H_
