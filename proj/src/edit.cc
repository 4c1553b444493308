#include "nerscrub/edit.h"

#include "nerscrub/hash.h"

namespace nerscrub {

const char* ToString(EditKind kind) {
  switch (kind) {
    case EditKind::kShrink:
      return "shrink";
    case EditKind::kGrow:
      return "grow";
    case EditKind::kRetype:
      return "retype";
    case EditKind::kDelete:
      return "delete";
  }
  return "unknown";
}

std::string EditOperation::str() const {
  switch (kind) {
    case EditKind::kShrink:
    case EditKind::kGrow:
      return std::string(ToString(kind)) + "(" + std::to_string(left) + "," +
             std::to_string(right) + ")";
    case EditKind::kRetype:
      return "retype(" + new_type + ")";
    case EditKind::kDelete:
      return "delete";
  }
  return "unknown";
}

std::string EditProposal::ComputeId(const std::string& rule_id, const Mention& target,
                                    const EditOperation& op) {
  return StableHasher()
      .Add(rule_id)
      .Add(target.doc_id)
      .Add(target.sent_index)
      .Add(target.start)
      .Add(target.end)
      .Add(target.etype)
      .Add(op.str())
      .hex();
}

EditProposal EditProposal::Make(std::string rule_id, Mention target, EditOperation op) {
  EditProposal p;
  p.id = ComputeId(rule_id, target, op);
  p.rule_id = std::move(rule_id);
  p.target = std::move(target);
  p.operation = std::move(op);
  return p;
}

Mention ResultSpan(const Mention& target, const EditOperation& op) {
  Mention out = target;
  out.surface.clear();
  switch (op.kind) {
    case EditKind::kShrink:
      if (op.left + op.right >= target.length()) {
        throw EditError(EditErrorKind::kEmptySpan,
                        op.str() + " would empty mention '" + target.surface + "'");
      }
      out.start += op.left;
      out.end -= op.right;
      break;
    case EditKind::kGrow:
      if (op.left > target.start) {
        throw EditError(EditErrorKind::kInvalid, op.str() + " extends past sentence start");
      }
      out.start -= op.left;
      out.end += op.right;
      break;
    case EditKind::kRetype:
      out.etype = op.new_type;
      break;
    case EditKind::kDelete:
      out.end = out.start;
      break;
  }
  return out;
}

namespace {

bool TargetMatches(const Sentence& s, const Mention& m) {
  if (m.start >= m.end || m.end > s.tokens.size()) return false;
  const Tag& first = s.tokens[m.start].tag;
  if (!first.is_begin() || first.type != m.etype) return false;
  for (std::size_t i = m.start + 1; i < m.end; ++i) {
    const Tag& t = s.tokens[i].tag;
    if (!t.is_inside() || t.type != m.etype) return false;
  }
  if (m.end < s.tokens.size()) {
    const Tag& next = s.tokens[m.end].tag;
    if (next.is_inside() && next.type == m.etype) return false;
  }
  return true;
}

void Label(Sentence& s, std::size_t start, std::size_t end, const std::string& type) {
  for (std::size_t i = start; i < end; ++i) {
    s.tokens[i].tag = i == start ? Tag::Begin(type) : Tag::Inside(type);
  }
}

}  // namespace

void ApplyEditToSentence(Sentence& s, const EditProposal& e) {
  const Mention& target = e.target;
  const EditOperation& op = e.operation;
  if (!TargetMatches(s, target)) {
    throw EditError(EditErrorKind::kStaleTarget,
                    "stale target: no " + target.etype + " mention at [" +
                        std::to_string(target.start) + "," + std::to_string(target.end) +
                        ") in " + target.doc_id + "#" + std::to_string(target.sent_index));
  }

  switch (op.kind) {
    case EditKind::kShrink: {
      if (op.left == 0 && op.right == 0) {
        throw EditError(EditErrorKind::kInvalid, "shrink by zero tokens");
      }
      Mention r = ResultSpan(target, op);
      for (std::size_t i = target.start; i < target.end; ++i) s.tokens[i].tag = Tag::Outside();
      Label(s, r.start, r.end, r.etype);
      break;
    }
    case EditKind::kGrow: {
      if (op.left == 0 && op.right == 0) {
        throw EditError(EditErrorKind::kInvalid, "grow by zero tokens");
      }
      Mention r = ResultSpan(target, op);
      if (r.end > s.tokens.size()) {
        throw EditError(EditErrorKind::kInvalid, op.str() + " extends past sentence end");
      }
      for (std::size_t i = r.start; i < r.end; ++i) {
        if ((i < target.start || i >= target.end) && !s.tokens[i].tag.is_outside()) {
          throw EditError(EditErrorKind::kInvalid,
                          op.str() + " would overlap another mention at token " +
                              std::to_string(i));
        }
      }
      Label(s, r.start, r.end, r.etype);
      break;
    }
    case EditKind::kRetype:
      if (!EntityType::IsValidName(op.new_type)) {
        throw EditError(EditErrorKind::kInvalid, "invalid entity type '" + op.new_type + "'");
      }
      if (op.new_type == target.etype) {
        throw EditError(EditErrorKind::kInvalid, "retype to the same type");
      }
      Label(s, target.start, target.end, op.new_type);
      break;
    case EditKind::kDelete:
      for (std::size_t i = target.start; i < target.end; ++i) s.tokens[i].tag = Tag::Outside();
      break;
  }
}

Corpus ApplyEdit(const Corpus& c, const EditProposal& e) {
  std::size_t pos = SentenceIndex(c).Find(e.target.doc_id, e.target.sent_index);
  if (pos == SentenceIndex::npos) {
    throw EditError(EditErrorKind::kStaleTarget, "stale target: sentence " + e.target.doc_id +
                                                     "#" + std::to_string(e.target.sent_index) +
                                                     " not in corpus");
  }
  // Validate against a copy of the one sentence before copying the corpus.
  Sentence edited = c.sentences[pos];
  ApplyEditToSentence(edited, e);
  Corpus out = c;
  out.sentences[pos] = std::move(edited);
  return out;
}

}  // namespace nerscrub
