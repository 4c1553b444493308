#include "nerscrub/diff.h"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

namespace nerscrub {

const char* ToString(LinkKind k) {
  switch (k) {
    case LinkKind::kDeleted:
      return "deleted";
    case LinkKind::kAdded:
      return "added";
    case LinkKind::kOneToOne:
      return "one_to_one";
    case LinkKind::kSplit:
      return "split";
    case LinkKind::kMerged:
      return "merged";
    case LinkKind::kComplex:
      return "complex";
  }
  return "unknown";
}

const char* ToString(OneToOneChange c) {
  switch (c) {
    case OneToOneChange::kUnchanged:
      return "unchanged";
    case OneToOneChange::kSpanOnly:
      return "span_only";
    case OneToOneChange::kTypeOnly:
      return "type_only";
    case OneToOneChange::kSpanAndType:
      return "span_and_type";
  }
  return "unknown";
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t Find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void Union(std::size_t a, std::size_t b) {
    a = Find(a);
    b = Find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

void CheckSameTokens(const Sentence& a, const Sentence& b) {
  bool same = a.tokens.size() == b.tokens.size();
  for (std::size_t i = 0; same && i < a.tokens.size(); ++i) {
    same = a.tokens[i].text == b.tokens[i].text;
  }
  if (!same) {
    throw DiffError("token texts differ in sentence " + a.doc_id + "#" +
                    std::to_string(a.sent_index) + "; retokenized sentences cannot be diffed");
  }
}

LinkKind Classify(std::size_t n_old, std::size_t n_new) {
  if (n_new == 0) return LinkKind::kDeleted;
  if (n_old == 0) return LinkKind::kAdded;
  if (n_old == 1 && n_new == 1) return LinkKind::kOneToOne;
  if (n_old == 1) return LinkKind::kSplit;
  if (n_new == 1) return LinkKind::kMerged;
  return LinkKind::kComplex;
}

MentionAlignment Align(std::vector<Mention> old_m, std::vector<Mention> new_m) {
  const std::size_t a = old_m.size();
  DisjointSets sets(a + new_m.size());
  // Both lists are sorted and internally non-overlapping.
  std::size_t i = 0, j = 0;
  while (i < a && j < new_m.size()) {
    if (old_m[i].overlaps(new_m[j])) sets.Union(i, a + j);
    if (old_m[i].end <= new_m[j].end) {
      ++i;
    } else {
      ++j;
    }
  }

  std::vector<std::size_t> link_of(a + new_m.size(), static_cast<std::size_t>(-1));
  MentionAlignment out;
  auto link_for = [&](std::size_t node) -> AlignmentLink& {
    std::size_t root = sets.Find(node);
    if (link_of[root] == static_cast<std::size_t>(-1)) {
      link_of[root] = out.links.size();
      out.links.emplace_back();
    }
    return out.links[link_of[root]];
  };
  for (std::size_t k = 0; k < a; ++k) link_for(k).old_mentions.push_back(std::move(old_m[k]));
  for (std::size_t k = 0; k < new_m.size(); ++k) {
    link_for(a + k).new_mentions.push_back(std::move(new_m[k]));
  }
  for (AlignmentLink& l : out.links) {
    l.kind = Classify(l.old_mentions.size(), l.new_mentions.size());
  }
  auto leftmost = [](const AlignmentLink& l) {
    std::size_t s = static_cast<std::size_t>(-1);
    if (!l.old_mentions.empty()) s = l.old_mentions.front().start;
    if (!l.new_mentions.empty()) s = std::min(s, l.new_mentions.front().start);
    return s;
  };
  std::stable_sort(out.links.begin(), out.links.end(),
                   [&](const AlignmentLink& x, const AlignmentLink& y) {
                     return leftmost(x) < leftmost(y);
                   });
  return out;
}

void AddTypeCounts(std::map<std::string, TypeDelta>& acc, const std::vector<TypeDelta>& v) {
  for (const TypeDelta& t : v) {
    TypeDelta& d = acc[t.etype];
    d.etype = t.etype;
    d.before += t.before;
    d.after += t.after;
  }
}

double Percent(std::int64_t part, std::int64_t whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

MentionAlignment AlignMentions(const Sentence& old_s, const Sentence& new_s) {
  CheckSameTokens(old_s, new_s);
  return Align(ExtractMentions(old_s), ExtractMentions(new_s));
}

OneToOneChange ClassifyOneToOne(const Mention& old_m, const Mention& new_m) {
  const bool span = !old_m.same_span(new_m);
  const bool type = old_m.etype != new_m.etype;
  if (span && type) return OneToOneChange::kSpanAndType;
  if (span) return OneToOneChange::kSpanOnly;
  if (type) return OneToOneChange::kTypeOnly;
  return OneToOneChange::kUnchanged;
}

std::optional<double> TypeDelta::pct() const {
  if (before == 0) return std::nullopt;
  return Percent(delta(), before);
}

double DiffReport::changed_tokens_pct() const { return Percent(changed_tokens, total_tokens); }

double DiffReport::changed_sentences_pct() const {
  return Percent(changed_sentences, total_sentences);
}

bool DiffReport::conserves_mentions() const {
  return mentions_after == mentions_before + categories.added - categories.deleted + split_extra -
                              merged_extra + complex_net;
}

void DiffReport::Merge(const DiffReport& o) {
  changed_tokens += o.changed_tokens;
  total_tokens += o.total_tokens;
  changed_sentences += o.changed_sentences;
  total_sentences += o.total_sentences;
  mentions_before += o.mentions_before;
  mentions_after += o.mentions_after;
  categories.deleted += o.categories.deleted;
  categories.added += o.categories.added;
  categories.span_only += o.categories.span_only;
  categories.type_only += o.categories.type_only;
  categories.span_and_type += o.categories.span_and_type;
  categories.split += o.categories.split;
  categories.merged += o.categories.merged;
  categories.complex += o.categories.complex;
  unchanged += o.unchanged;
  split_extra += o.split_extra;
  merged_extra += o.merged_extra;
  complex_net += o.complex_net;
  std::map<std::string, TypeDelta> acc;
  AddTypeCounts(acc, per_type);
  AddTypeCounts(acc, o.per_type);
  per_type.clear();
  for (auto& [type, d] : acc) per_type.push_back(std::move(d));
}

// Tag of token i re-encoded as IOB1, where B- appears only when a mention
// directly follows another of the same type. Encoding is still lossless,
// but shrinking "the/B US/I" to "the/O US/B" touches one token, not two.
static Tag Iob1(const Sentence& s, std::size_t i) {
  const Tag& t = s.tokens[i].tag;
  if (t.is_outside()) return t;
  const bool adjacent = t.is_begin() && i > 0 && s.tokens[i - 1].tag.type == t.type;
  return adjacent ? Tag::Begin(t.type) : Tag::Inside(t.type);
}

DiffReport DiffSentences(const Sentence& old_s, const Sentence& new_s) {
  CheckSameTokens(old_s, new_s);
  DiffReport r;
  r.total_sentences = 1;
  r.total_tokens = static_cast<std::int64_t>(old_s.tokens.size());
  for (std::size_t i = 0; i < old_s.tokens.size(); ++i) {
    if (!(Iob1(old_s, i) == Iob1(new_s, i))) ++r.changed_tokens;
  }
  r.changed_sentences = r.changed_tokens > 0 ? 1 : 0;
  if (r.changed_tokens == 0) {
    // Identical tags: every mention links to itself unchanged.
    auto mentions = ExtractMentions(old_s);
    r.mentions_before = r.mentions_after = static_cast<std::int64_t>(mentions.size());
    r.unchanged = r.mentions_before;
    std::map<std::string, TypeDelta> acc;
    for (const Mention& m : mentions) {
      TypeDelta& d = acc[m.etype];
      d.etype = m.etype;
      ++d.before;
      ++d.after;
    }
    for (auto& [type, d] : acc) r.per_type.push_back(std::move(d));
    return r;
  }

  MentionAlignment al = Align(ExtractMentions(old_s), ExtractMentions(new_s));
  std::map<std::string, TypeDelta> acc;
  for (const AlignmentLink& l : al.links) {
    const auto n_old = static_cast<std::int64_t>(l.old_mentions.size());
    const auto n_new = static_cast<std::int64_t>(l.new_mentions.size());
    r.mentions_before += n_old;
    r.mentions_after += n_new;
    for (const Mention& m : l.old_mentions) {
      TypeDelta& d = acc[m.etype];
      d.etype = m.etype;
      ++d.before;
    }
    for (const Mention& m : l.new_mentions) {
      TypeDelta& d = acc[m.etype];
      d.etype = m.etype;
      ++d.after;
    }
    switch (l.kind) {
      case LinkKind::kDeleted:
        ++r.categories.deleted;
        break;
      case LinkKind::kAdded:
        ++r.categories.added;
        break;
      case LinkKind::kSplit:
        ++r.categories.split;
        r.split_extra += n_new - 1;
        break;
      case LinkKind::kMerged:
        ++r.categories.merged;
        r.merged_extra += n_old - 1;
        break;
      case LinkKind::kComplex:
        ++r.categories.complex;
        r.complex_net += n_new - n_old;
        break;
      case LinkKind::kOneToOne:
        switch (ClassifyOneToOne(l.old_mentions.front(), l.new_mentions.front())) {
          case OneToOneChange::kUnchanged:
            ++r.unchanged;
            break;
          case OneToOneChange::kSpanOnly:
            ++r.categories.span_only;
            break;
          case OneToOneChange::kTypeOnly:
            ++r.categories.type_only;
            break;
          case OneToOneChange::kSpanAndType:
            ++r.categories.span_and_type;
            break;
        }
        break;
    }
  }
  for (auto& [type, d] : acc) r.per_type.push_back(std::move(d));
  return r;
}

DiffReport DiffCorpora(const Corpus& old_c, const Corpus& new_c) {
  if (old_c.sentences.size() != new_c.sentences.size()) {
    throw DiffError("sentence counts differ: " + std::to_string(old_c.sentences.size()) +
                    " vs " + std::to_string(new_c.sentences.size()));
  }
  DiffReport total;
  std::map<std::string, TypeDelta> acc;
  for (std::size_t i = 0; i < old_c.sentences.size(); ++i) {
    DiffReport r = DiffSentences(old_c.sentences[i], new_c.sentences[i]);
    AddTypeCounts(acc, r.per_type);
    r.per_type.clear();
    total.Merge(r);
  }
  for (auto& [type, d] : acc) total.per_type.push_back(std::move(d));
  return total;
}

std::string RenderDiffTables(const DiffReport& r) {
  std::string out;
  auto row = [&](std::string_view label, std::string value) {
    out += fmt::format("| {:<28} | {:>18} |\n", label, value);
  };
  const std::string rule = fmt::format("+{:-<30}+{:-<20}+\n", "", "");
  out += rule;
  row("Statistic", "Value");
  out += rule;
  row("Nb changed tokens", fmt::format("{} ({:.2f}%)", r.changed_tokens, r.changed_tokens_pct()));
  row("Nb changed sentences",
      fmt::format("{} ({:.2f}%)", r.changed_sentences, r.changed_sentences_pct()));
  out += rule;
  row("Nb mentions before", std::to_string(r.mentions_before));
  row("Nb mentions after", std::to_string(r.mentions_after));
  out += rule;
  row("Deleted mentions", std::to_string(r.categories.deleted));
  row("Added mentions", std::to_string(r.categories.added));
  row("Span changed, but not type", std::to_string(r.categories.span_only));
  row("Type changed, but not span", std::to_string(r.categories.type_only));
  row("Both span and type changed", std::to_string(r.categories.span_and_type));
  row("Split into 2 or more", std::to_string(r.categories.split));
  row("Merged from 2 or more", std::to_string(r.categories.merged));
  if (r.categories.complex > 0) row("Complex (many-to-many)", std::to_string(r.categories.complex));
  out += rule;
  out += '\n';

  const std::string rule2 = fmt::format("+{:-<20}+{:-<22}+\n", "", "");
  out += rule2;
  out += fmt::format("| {:<18} | {:>20} |\n", "Entity type", "Delta");
  out += rule2;
  for (const TypeDelta& t : r.per_type) {
    std::string pct = !t.pct()           ? std::string("n/a")
                      : t.delta() == 0   ? std::string("0.00%")
                                         : fmt::format("{:+.2f}%", *t.pct());
    std::string delta = t.delta() > 0 ? fmt::format("+{}", t.delta()) : std::to_string(t.delta());
    out += fmt::format("| {:<18} | {:>20} |\n", t.etype, fmt::format("{} ({})", delta, pct));
  }
  out += rule2;
  return out;
}

}  // namespace nerscrub
