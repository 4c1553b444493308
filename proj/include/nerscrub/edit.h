// Span/type edits on mentions and their application to a corpus.

#ifndef NERSCRUB_EDIT_H_
#define NERSCRUB_EDIT_H_

#include <cstddef>
#include <stdexcept>
#include <string>

#include "nerscrub/corpus.h"

namespace nerscrub {

enum class EditKind { kShrink, kGrow, kRetype, kDelete };

const char* ToString(EditKind kind);

// `left`/`right` are token counts for kShrink and kGrow; `new_type` is used
// by kRetype only.
struct EditOperation {
  EditKind kind = EditKind::kShrink;
  std::size_t left = 0;
  std::size_t right = 0;
  std::string new_type;

  static EditOperation ShrinkLeft(std::size_t n) { return {EditKind::kShrink, n, 0, {}}; }
  static EditOperation ShrinkRight(std::size_t n) { return {EditKind::kShrink, 0, n, {}}; }
  static EditOperation Shrink(std::size_t l, std::size_t r) { return {EditKind::kShrink, l, r, {}}; }
  static EditOperation Grow(std::size_t l, std::size_t r) { return {EditKind::kGrow, l, r, {}}; }
  static EditOperation Retype(std::string t) { return {EditKind::kRetype, 0, 0, std::move(t)}; }
  static EditOperation Delete() { return {EditKind::kDelete, 0, 0, {}}; }

  // Compact form used for hashing and display, e.g. "shrink(1,0)".
  std::string str() const;

  friend bool operator==(const EditOperation&, const EditOperation&) = default;
};

struct EditProposal {
  std::string id;
  std::string rule_id;
  Mention target;
  EditOperation operation;

  // Deterministic id over (rule_id, doc_id, sent_index, start, end, etype,
  // operation).
  static std::string ComputeId(const std::string& rule_id, const Mention& target,
                               const EditOperation& op);
  static EditProposal Make(std::string rule_id, Mention target, EditOperation op);

  friend bool operator==(const EditProposal&, const EditProposal&) = default;
};

enum class EditErrorKind { kStaleTarget, kEmptySpan, kInvalid };

class EditError : public std::runtime_error {
 public:
  EditError(EditErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  EditErrorKind kind() const { return kind_; }

 private:
  EditErrorKind kind_;
};

// Span the operation leaves behind, without touching any corpus. Throws
// EditError(kEmptySpan) for shrinks that consume the whole mention.
Mention ResultSpan(const Mention& target, const EditOperation& op);

// Applies `e` to the sentence it targets. The target must be a mention of
// the sentence with exactly the recorded span and type, otherwise
// EditError(kStaleTarget). Only tags change.
void ApplyEditToSentence(Sentence& s, const EditProposal& e);

// Pure form over a whole corpus.
Corpus ApplyEdit(const Corpus& c, const EditProposal& e);

}  // namespace nerscrub

#endif  // NERSCRUB_EDIT_H_
