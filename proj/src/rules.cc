#include "nerscrub/rules.h"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <stdexcept>
#include <tuple>

#include "nerscrub/hash.h"

namespace nerscrub {

std::vector<std::string_view> MentionTokens(const Mention& m) {
  std::vector<std::string_view> out;
  std::string_view s = m.surface;
  while (!s.empty()) {
    std::size_t sp = s.find(' ');
    out.push_back(s.substr(0, sp));
    if (sp == std::string_view::npos) break;
    s.remove_prefix(sp + 1);
  }
  return out;
}

bool IsPunctuationToken(std::string_view token) {
  static constexpr std::array<std::string_view, 6> kBracketEscapes = {
      "-LRB-", "-RRB-", "-LSB-", "-RSB-", "-LCB-", "-RCB-"};
  if (token.empty()) return false;
  if (std::find(kBracketEscapes.begin(), kBracketEscapes.end(), token) != kBracketEscapes.end()) {
    return true;
  }
  const auto* bytes = reinterpret_cast<const uint8_t*>(token.data());
  const int32_t length = static_cast<int32_t>(token.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) return false;  // ill-formed UTF-8
    if (c == '`') continue;
    if (!u_ispunct(c)) return false;
  }
  return true;
}

namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool IsSplitPossessive(std::string_view token) {
  return token == "'s" || token == "'" || token == "\xE2\x80\x99s" || token == "\xE2\x80\x99";
}

std::optional<std::string> ReviewEmbeddedPossessive(const Mention& m) {
  auto tokens = MentionTokens(m);
  if (tokens.empty()) return std::nullopt;
  std::string_view last = tokens.back();
  if (IsSplitPossessive(last)) return std::nullopt;
  auto ends_with = [&](std::string_view suffix) {
    return last.size() > suffix.size() && last.substr(last.size() - suffix.size()) == suffix;
  };
  if (ends_with("'s") || ends_with("\xE2\x80\x99s")) {
    return "token '" + std::string(last) + "' carries an embedded possessive";
  }
  return std::nullopt;
}

bool IsDeterminer(std::string_view token) {
  std::string t = Lower(token);
  return t == "the" || t == "a" || t == "an";
}

std::optional<std::string> ReviewBareDeterminer(const Mention& m) {
  auto tokens = MentionTokens(m);
  if (tokens.size() == 1 && IsDeterminer(tokens.front()) && m.etype != "DATE" &&
      m.etype != "TIME") {
    return "mention is a bare determiner; consider deleting it";
  }
  return std::nullopt;
}

std::optional<std::string> ReviewAllPunctuation(const Mention& m) {
  auto tokens = MentionTokens(m);
  if (!tokens.empty() && std::all_of(tokens.begin(), tokens.end(), IsPunctuationToken)) {
    return "mention consists only of punctuation; consider deleting it";
  }
  return std::nullopt;
}

}  // namespace

std::optional<EditProposal> RuleLeadingDeterminer(const Mention& m) {
  if (m.etype == "DATE" || m.etype == "TIME") return std::nullopt;
  auto tokens = MentionTokens(m);
  if (tokens.size() < 2) return std::nullopt;
  if (!IsDeterminer(tokens.front())) return std::nullopt;
  return EditProposal::Make(std::string(kLeadingDeterminer), m, EditOperation::ShrinkLeft(1));
}

std::optional<EditProposal> RuleTrailingPossessive(const Mention& m) {
  auto tokens = MentionTokens(m);
  if (tokens.size() < 2) return std::nullopt;
  if (!IsSplitPossessive(tokens.back())) return std::nullopt;
  return EditProposal::Make(std::string(kTrailingPossessive), m, EditOperation::ShrinkRight(1));
}

std::optional<EditProposal> RuleEdgePunctuation(const Mention& m) {
  auto tokens = MentionTokens(m);
  const std::size_t n = tokens.size();
  std::size_t left = 0;
  while (left < n && IsPunctuationToken(tokens[left])) ++left;
  if (left == n) return std::nullopt;
  std::size_t right = 0;
  while (right < n - left && IsPunctuationToken(tokens[n - 1 - right])) ++right;
  if (left == 0 && right == 0) return std::nullopt;
  return EditProposal::Make(std::string(kEdgePunctuation), m, EditOperation::Shrink(left, right));
}

RuleSet RuleSet::Default() {
  RuleSet set;
  set.Add({std::string(kLeadingDeterminer), RuleLeadingDeterminer, ReviewBareDeterminer});
  set.Add({std::string(kTrailingPossessive), RuleTrailingPossessive, ReviewEmbeddedPossessive});
  set.Add({std::string(kEdgePunctuation), RuleEdgePunctuation, ReviewAllPunctuation});
  return set;
}

void RuleSet::Add(RuleSpec spec) {
  auto it = std::find_if(rules_.begin(), rules_.end(),
                         [&](const RuleSpec& r) { return r.id == spec.id; });
  if (it != rules_.end()) throw std::invalid_argument("duplicate rule id '" + spec.id + "'");
  rules_.push_back(std::move(spec));
}

bool RuleSet::SetEnabled(std::string_view id, bool enabled) {
  for (RuleSpec& r : rules_) {
    if (r.id == id) {
      r.enabled = enabled;
      return true;
    }
  }
  return false;
}

void RuleSet::EnableOnly(const std::vector<std::string>& ids) {
  for (const std::string& id : ids) {
    auto it = std::find_if(rules_.begin(), rules_.end(),
                           [&](const RuleSpec& r) { return r.id == id; });
    if (it == rules_.end()) throw std::invalid_argument("unknown rule '" + id + "'");
  }
  for (RuleSpec& r : rules_) {
    r.enabled = std::find(ids.begin(), ids.end(), r.id) != ids.end();
  }
}

std::vector<EditProposal> Scan(const Corpus& c, const RuleSet& rules) {
  std::vector<EditProposal> out;
  for (const Sentence& s : c.sentences) {
    for (const Mention& m : ExtractMentions(s)) {
      for (const RuleSpec& r : rules.rules()) {
        if (!r.enabled || !r.propose) continue;
        if (auto p = r.propose(m)) out.push_back(std::move(*p));
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const EditProposal& a, const EditProposal& b) {
    return std::tie(a.target.doc_id, a.target.sent_index, a.target.start, a.rule_id) <
           std::tie(b.target.doc_id, b.target.sent_index, b.target.start, b.rule_id);
  });
  return out;
}

std::vector<Candidate> ScanReviewCandidates(const Corpus& c, const RuleSet& rules) {
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> index;
  std::vector<Candidate> out;
  for (const Sentence& s : c.sentences) {
    for (const Mention& m : ExtractMentions(s)) {
      for (const RuleSpec& r : rules.rules()) {
        if (!r.enabled || !r.review) continue;
        auto note = r.review(m);
        if (!note) continue;
        auto [it, inserted] = index.try_emplace({r.id, m.surface, m.etype}, out.size());
        if (inserted) {
          Candidate cand;
          cand.source = CandidateSource::kRule;
          cand.mention = m;
          cand.note = r.id + ": " + *note;
          cand.id = StableHasher().Add(ToString(cand.source)).Add(r.id).Add(m.surface).Add(m.etype).hex();
          for (const LabeledToken& t : s.tokens) cand.context.push_back(t.text);
          out.push_back(std::move(cand));
        }
        out[it->second].occurrences.push_back({m.doc_id, m.sent_index, m.start, m.end});
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    return a.occurrences.size() > b.occurrences.size();
  });
  return out;
}

}  // namespace nerscrub
