// In-memory model of a BIO2-tagged corpus.
//
// A corpus is an ordered list of sentences, each tagged with the document it
// belongs to. Document boundaries are kept as separate records so that files
// round-trip through parse/serialize byte for byte, including boundary lines
// that open an empty document.

#ifndef NERSCRUB_CORPUS_H_
#define NERSCRUB_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nerscrub/tag.h"

namespace nerscrub {

struct LabeledToken {
  std::string text;
  Tag tag;

  // Original line with the tag column cut out at `tag_offset`. Empty when the
  // line was in canonical "<text><sep><tag>" form.
  std::string layout;
  std::uint32_t tag_offset = 0;

  // Layout is presentation only; equality is over text and tag.
  friend bool operator==(const LabeledToken& a, const LabeledToken& b) {
    return a.text == b.text && a.tag == b.tag;
  }
};

struct Sentence {
  std::string doc_id;
  std::size_t sent_index = 0;
  std::vector<LabeledToken> tokens;

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct DocumentBoundary {
  std::size_t first_sentence = 0;  // boundary line precedes this sentence
  std::string doc_id;
  std::string raw_line;  // exact line as read, e.g. "# nw/wsj/00/wsj_0001"
  bool blank_after = false;  // a blank line separated it from the next sentence

  friend bool operator==(const DocumentBoundary& a, const DocumentBoundary& b) {
    return a.first_sentence == b.first_sentence && a.doc_id == b.doc_id;
  }
};

struct Corpus {
  std::string partition = "other";  // train, dev, test, or a free-form name
  std::vector<Sentence> sentences;
  std::vector<DocumentBoundary> boundaries;
  std::map<std::string, std::string> source_meta;  // doc_id -> genre/file

  std::size_t token_count() const;
  // Distinct doc ids in order of first appearance.
  std::vector<std::string> document_ids() const;

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.sentences == b.sentences && a.boundaries == b.boundaries;
  }
};

// Contiguous typed span; [start, end) over token indices of one sentence.
struct Mention {
  std::string doc_id;
  std::size_t sent_index = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string etype;
  std::string surface;

  std::size_t length() const { return end - start; }
  bool overlaps(const Mention& o) const {
    return start < o.end && o.start < end;
  }
  bool same_span(const Mention& o) const {
    return start == o.start && end == o.end;
  }

  friend bool operator==(const Mention&, const Mention&) = default;
};

enum class ViolationKind { kIAfterO, kITypeMismatch, kEmptySentence, kMalformedTag };

const char* ToString(ViolationKind kind);

struct Violation {
  std::string doc_id;
  std::size_t sent_index = 0;
  std::size_t token_index = 0;
  ViolationKind kind = ViolationKind::kMalformedTag;
  std::string message;
};

// Raised by operations whose input corpus breaks the BIO2 invariants.
class ViolationError : public std::runtime_error {
 public:
  explicit ViolationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

// Returns every BIO2 violation in a sentence. Token indices refer to `s`.
std::vector<Violation> ValidateSentence(const Sentence& s);
std::vector<Violation> ValidateCorpus(const Corpus& c);

// Rewrites stray I- tags to B-; returns the violations that were repaired.
// Malformed tags cannot occur in a constructed Sentence, so only the two
// continuation kinds are handled here.
std::vector<Violation> RepairSentence(Sentence& s);

// One Mention per maximal B-,I-,...,I- run. Throws ViolationError if the
// sentence is not BIO2-valid.
std::vector<Mention> ExtractMentions(const Sentence& s);

std::string JoinTokens(const Sentence& s, std::size_t start, std::size_t end);

// Lookup of sentences by (doc_id, sent_index).
class SentenceIndex {
 public:
  explicit SentenceIndex(const Corpus& c);
  // Returns the position in c.sentences, or npos.
  std::size_t Find(const std::string& doc_id, std::size_t sent_index) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::map<std::string, std::vector<std::size_t>> by_doc_;
};

}  // namespace nerscrub

#endif  // NERSCRUB_CORPUS_H_
