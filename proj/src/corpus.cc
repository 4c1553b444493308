#include "nerscrub/corpus.h"

#include <unordered_set>

namespace nerscrub {

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const Sentence& s : sentences) n += s.tokens.size();
  return n;
}

std::vector<std::string> Corpus::document_ids() const {
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  for (const Sentence& s : sentences) {
    if (seen.insert(s.doc_id).second) ids.push_back(s.doc_id);
  }
  return ids;
}

const char* ToString(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kIAfterO:
      return "I-after-O";
    case ViolationKind::kITypeMismatch:
      return "I-type-mismatch";
    case ViolationKind::kEmptySentence:
      return "empty-sentence";
    case ViolationKind::kMalformedTag:
      return "malformed-tag";
  }
  return "unknown";
}

namespace {

std::string Summarize(const std::vector<Violation>& v) {
  std::string msg = std::to_string(v.size()) + " BIO violation(s)";
  if (!v.empty()) {
    msg += "; first: ";
    msg += v.front().message;
  }
  return msg;
}

// Checks token i against its predecessor; nullopt when valid.
std::optional<Violation> CheckContinuation(const Sentence& s, std::size_t i) {
  const Tag& tag = s.tokens[i].tag;
  if (!tag.is_inside()) return std::nullopt;
  const Tag* prev = i > 0 ? &s.tokens[i - 1].tag : nullptr;
  if (prev == nullptr || prev->is_outside()) {
    return Violation{s.doc_id, s.sent_index, i, ViolationKind::kIAfterO,
                     "'" + tag.str() + "' on '" + s.tokens[i].text +
                         "' does not continue a mention"};
  }
  if (prev->type != tag.type) {
    return Violation{s.doc_id, s.sent_index, i, ViolationKind::kITypeMismatch,
                     "'" + tag.str() + "' on '" + s.tokens[i].text + "' follows '" +
                         prev->str() + "'"};
  }
  return std::nullopt;
}

}  // namespace

ViolationError::ViolationError(std::vector<Violation> violations)
    : std::runtime_error(Summarize(violations)), violations_(std::move(violations)) {}

std::vector<Violation> ValidateSentence(const Sentence& s) {
  std::vector<Violation> out;
  if (s.tokens.empty()) {
    out.push_back({s.doc_id, s.sent_index, 0, ViolationKind::kEmptySentence,
                   "sentence has no tokens"});
    return out;
  }
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    const Tag& tag = s.tokens[i].tag;
    if (tag.is_outside() != tag.type.empty() || (!tag.is_outside() && !EntityType::IsValidName(tag.type))) {
      out.push_back({s.doc_id, s.sent_index, i, ViolationKind::kMalformedTag,
                     "malformed tag '" + tag.str() + "'"});
      continue;
    }
    if (auto v = CheckContinuation(s, i)) out.push_back(std::move(*v));
  }
  return out;
}

std::vector<Violation> ValidateCorpus(const Corpus& c) {
  std::vector<Violation> out;
  for (const Sentence& s : c.sentences) {
    auto v = ValidateSentence(s);
    out.insert(out.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
  }
  return out;
}

std::vector<Violation> RepairSentence(Sentence& s) {
  std::vector<Violation> repaired;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    if (auto v = CheckContinuation(s, i)) {
      s.tokens[i].tag.kind = TagKind::kBegin;
      repaired.push_back(std::move(*v));
    }
  }
  return repaired;
}

std::vector<Mention> ExtractMentions(const Sentence& s) {
  std::vector<Mention> out;
  const std::size_t n = s.tokens.size();
  std::size_t i = 0;
  while (i < n) {
    const Tag& tag = s.tokens[i].tag;
    if (tag.is_outside()) {
      ++i;
      continue;
    }
    if (!tag.is_begin()) throw ViolationError(ValidateSentence(s));
    std::size_t j = i + 1;
    while (j < n && s.tokens[j].tag.is_inside() && s.tokens[j].tag.type == tag.type) ++j;
    out.push_back({s.doc_id, s.sent_index, i, j, tag.type, JoinTokens(s, i, j)});
    i = j;
  }
  return out;
}

std::string JoinTokens(const Sentence& s, std::size_t start, std::size_t end) {
  std::string out;
  for (std::size_t i = start; i < end; ++i) {
    if (i > start) out += ' ';
    out += s.tokens[i].text;
  }
  return out;
}

SentenceIndex::SentenceIndex(const Corpus& c) {
  for (std::size_t pos = 0; pos < c.sentences.size(); ++pos) {
    const Sentence& s = c.sentences[pos];
    auto& slots = by_doc_[s.doc_id];
    if (slots.size() <= s.sent_index) slots.resize(s.sent_index + 1, npos);
    slots[s.sent_index] = pos;
  }
}

std::size_t SentenceIndex::Find(const std::string& doc_id, std::size_t sent_index) const {
  auto it = by_doc_.find(doc_id);
  if (it == by_doc_.end() || sent_index >= it->second.size()) return npos;
  return it->second[sent_index];
}

}  // namespace nerscrub
