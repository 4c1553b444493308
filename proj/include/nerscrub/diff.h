// Mention-level comparison of two versions of a corpus.
//
// Mentions of the old and new version of a sentence are linked by token
// overlap; each connected component of the overlap graph becomes one link.
// A component with several old and several new mentions has no single
// category and is counted as "complex".

#ifndef NERSCRUB_DIFF_H_
#define NERSCRUB_DIFF_H_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nerscrub/corpus.h"

namespace nerscrub {

enum class LinkKind { kDeleted, kAdded, kOneToOne, kSplit, kMerged, kComplex };

const char* ToString(LinkKind k);

struct AlignmentLink {
  LinkKind kind = LinkKind::kOneToOne;
  std::vector<Mention> old_mentions;  // sorted by start
  std::vector<Mention> new_mentions;
};

struct MentionAlignment {
  std::vector<AlignmentLink> links;  // ordered by leftmost token
};

enum class OneToOneChange { kUnchanged, kSpanOnly, kTypeOnly, kSpanAndType };

const char* ToString(OneToOneChange c);

class DiffError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws DiffError when the two sentences differ in token texts.
MentionAlignment AlignMentions(const Sentence& old_s, const Sentence& new_s);

OneToOneChange ClassifyOneToOne(const Mention& old_m, const Mention& new_m);

struct CategoryCounts {
  std::int64_t deleted = 0;
  std::int64_t added = 0;
  std::int64_t span_only = 0;
  std::int64_t type_only = 0;
  std::int64_t span_and_type = 0;
  std::int64_t split = 0;
  std::int64_t merged = 0;
  std::int64_t complex = 0;

  friend bool operator==(const CategoryCounts&, const CategoryCounts&) = default;
};

struct TypeDelta {
  std::string etype;
  std::int64_t before = 0;
  std::int64_t after = 0;
  std::int64_t delta() const { return after - before; }
  // Percent of the old count; nullopt when the type was absent before.
  std::optional<double> pct() const;

  friend bool operator==(const TypeDelta&, const TypeDelta&) = default;
};

struct DiffReport {
  std::int64_t changed_tokens = 0;  // tag differs once both sides are read as IOB1
  std::int64_t total_tokens = 0;
  std::int64_t changed_sentences = 0;
  std::int64_t total_sentences = 0;
  std::int64_t mentions_before = 0;
  std::int64_t mentions_after = 0;
  CategoryCounts categories;
  std::int64_t unchanged = 0;  // one-to-one links with no change

  // Conservation terms: sums of (|new|-1) over splits, (|old|-1) over merges
  // and (|new|-|old|) over complex components.
  std::int64_t split_extra = 0;
  std::int64_t merged_extra = 0;
  std::int64_t complex_net = 0;

  std::vector<TypeDelta> per_type;  // sorted by type name

  double changed_tokens_pct() const;
  double changed_sentences_pct() const;

  // after == before + added - deleted + split_extra - merged_extra + complex_net
  bool conserves_mentions() const;

  void Merge(const DiffReport& other);

  friend bool operator==(const DiffReport&, const DiffReport&) = default;
};

// Diffs sentence i of `old_c` against sentence i of `new_c`. Throws DiffError
// on differing sentence counts or token texts.
DiffReport DiffCorpora(const Corpus& old_c, const Corpus& new_c);

// Diff of a single sentence pair; DiffCorpora merges these.
DiffReport DiffSentences(const Sentence& old_s, const Sentence& new_s);

// Two plain-text tables: change statistics and per-type frequency deltas.
std::string RenderDiffTables(const DiffReport& r);

}  // namespace nerscrub

#endif  // NERSCRUB_DIFF_H_
