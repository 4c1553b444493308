#include "nerscrub/json_io.h"

namespace nerscrub {
namespace {

template <typename Enum, typename Parse>
Enum ParseEnum(const Json& j, const char* key, Parse parse) {
  const std::string text = j.at(key).get<std::string>();
  auto v = parse(text);
  if (!v) {
    throw Json::other_error::create(501, std::string("unknown ") + key + " '" + text + "'", &j);
  }
  return *v;
}

std::optional<EditKind> ParseEditKind(const std::string& s) {
  for (auto k : {EditKind::kShrink, EditKind::kGrow, EditKind::kRetype, EditKind::kDelete}) {
    if (s == ToString(k)) return k;
  }
  return std::nullopt;
}

}  // namespace

void to_json(Json& j, const Mention& m) {
  j = Json{{"doc_id", m.doc_id}, {"sent_index", m.sent_index}, {"start", m.start},
           {"end", m.end},       {"etype", m.etype},           {"surface", m.surface}};
}

void from_json(const Json& j, Mention& m) {
  j.at("doc_id").get_to(m.doc_id);
  j.at("sent_index").get_to(m.sent_index);
  j.at("start").get_to(m.start);
  j.at("end").get_to(m.end);
  j.at("etype").get_to(m.etype);
  m.surface = j.value("surface", std::string());
}

void to_json(Json& j, const EditOperation& op) {
  j = Json{{"kind", ToString(op.kind)}};
  switch (op.kind) {
    case EditKind::kShrink:
    case EditKind::kGrow:
      j["left"] = op.left;
      j["right"] = op.right;
      break;
    case EditKind::kRetype:
      j["new_type"] = op.new_type;
      break;
    case EditKind::kDelete:
      break;
  }
}

void from_json(const Json& j, EditOperation& op) {
  op = {};
  op.kind = ParseEnum<EditKind>(j, "kind", ParseEditKind);
  op.left = j.value("left", std::size_t{0});
  op.right = j.value("right", std::size_t{0});
  op.new_type = j.value("new_type", std::string());
}

void to_json(Json& j, const EditProposal& p) {
  j = Json{{"id", p.id}, {"rule_id", p.rule_id}, {"target", p.target}, {"operation", p.operation}};
}

void from_json(const Json& j, EditProposal& p) {
  j.at("rule_id").get_to(p.rule_id);
  j.at("target").get_to(p.target);
  j.at("operation").get_to(p.operation);
  p.id = j.value("id", std::string());
  if (p.id.empty()) p.id = EditProposal::ComputeId(p.rule_id, p.target, p.operation);
}

void to_json(Json& j, const Decision& d) {
  j = Json{{"proposal_id", d.proposal_id}, {"verdict", ToString(d.verdict)}};
  if (d.replacement) j["replacement"] = *d.replacement;
  j["actor"] = d.actor;
  j["timestamp"] = d.timestamp;
}

void from_json(const Json& j, Decision& d) {
  j.at("proposal_id").get_to(d.proposal_id);
  d.verdict = ParseEnum<Verdict>(j, "verdict", ParseVerdict);
  d.replacement.reset();
  if (j.contains("replacement") && !j.at("replacement").is_null()) {
    d.replacement = j.at("replacement").get<EditProposal>();
  }
  d.actor = j.value("actor", std::string());
  d.timestamp = j.value("timestamp", std::string());
}

void to_json(Json& j, const MentionLocation& l) {
  j = Json{{"doc_id", l.doc_id}, {"sent_index", l.sent_index}, {"start", l.start}, {"end", l.end}};
}

void from_json(const Json& j, MentionLocation& l) {
  j.at("doc_id").get_to(l.doc_id);
  j.at("sent_index").get_to(l.sent_index);
  j.at("start").get_to(l.start);
  j.at("end").get_to(l.end);
}

void to_json(Json& j, const Candidate& c) {
  Json flags = Json::array();
  for (const TokenFlag& f : c.flags) flags.push_back({{"offset", f.offset}, {"label", ToString(f.label)}});
  std::string sample;
  for (const std::string& t : c.context) {
    if (!sample.empty()) sample += ' ';
    sample += t;
  }
  j = Json{{"id", c.id},
           {"surface", c.mention.surface},
           {"etype", c.mention.etype},
           {"flags", std::move(flags)},
           {"occurrences", c.occurrences},
           {"context_sample", std::move(sample)},
           {"status", ToString(c.status)},
           {"source", ToString(c.source)}};
  if (!c.note.empty()) j["note"] = c.note;
}

void from_json(const Json& j, Candidate& c) {
  c = {};
  j.at("id").get_to(c.id);
  j.at("surface").get_to(c.mention.surface);
  j.at("etype").get_to(c.mention.etype);
  for (const Json& f : j.at("flags")) {
    c.flags.push_back({f.at("offset").get<std::size_t>(),
                       ParseEnum<SubsetLabel>(f, "label", ParseSubsetLabel)});
  }
  j.at("occurrences").get_to(c.occurrences);
  if (!c.occurrences.empty()) {
    const MentionLocation& first = c.occurrences.front();
    c.mention.doc_id = first.doc_id;
    c.mention.sent_index = first.sent_index;
    c.mention.start = first.start;
    c.mention.end = first.end;
  }
  std::string sample = j.value("context_sample", std::string());
  std::size_t pos = 0;
  while (pos < sample.size()) {
    std::size_t sp = sample.find(' ', pos);
    if (sp == std::string::npos) sp = sample.size();
    c.context.push_back(sample.substr(pos, sp - pos));
    pos = sp + 1;
  }
  c.status = j.contains("status") ? ParseEnum<CandidateStatus>(j, "status", ParseCandidateStatus)
                                  : CandidateStatus::kPending;
  c.source = j.contains("source") ? ParseEnum<CandidateSource>(j, "source", ParseCandidateSource)
                                  : CandidateSource::kHardEval;
  c.note = j.value("note", std::string());
}

void to_json(Json& j, const Violation& v) {
  j = Json{{"doc_id", v.doc_id},
           {"sent_index", v.sent_index},
           {"token_index", v.token_index},
           {"kind", ToString(v.kind)},
           {"message", v.message}};
}

namespace {

Json OptionalNumber(const std::optional<double>& v) {
  return v ? Json(RoundHalfUp(*v, 4)) : Json(nullptr);
}

}  // namespace

void to_json(Json& j, const DiffReport& r) {
  Json per_type = Json::array();
  for (const TypeDelta& t : r.per_type) {
    per_type.push_back({{"type", t.etype},
                        {"delta", t.delta()},
                        {"pct", OptionalNumber(t.pct())},
                        {"before", t.before},
                        {"after", t.after}});
  }
  j = Json{
      {"tokens",
       {{"changed", r.changed_tokens}, {"total", r.total_tokens}, {"pct", RoundHalfUp(r.changed_tokens_pct(), 4)}}},
      {"sentences",
       {{"changed", r.changed_sentences},
        {"total", r.total_sentences},
        {"pct", RoundHalfUp(r.changed_sentences_pct(), 4)}}},
      {"mentions", {{"before", r.mentions_before}, {"after", r.mentions_after}}},
      {"categories",
       {{"deleted", r.categories.deleted},
        {"added", r.categories.added},
        {"span_only", r.categories.span_only},
        {"type_only", r.categories.type_only},
        {"span_and_type", r.categories.span_and_type},
        {"split", r.categories.split},
        {"merged", r.categories.merged},
        {"complex", r.categories.complex}}},
      {"per_type", std::move(per_type)}};
}

void to_json(Json& j, const PrfCounts& c) {
  j = Json{{"tp", c.tp},
           {"fp", c.fp},
           {"fn", c.fn},
           {"precision", RoundHalfUp(c.precision(), 4)},
           {"recall", RoundHalfUp(c.recall(), 4)},
           {"f1", RoundHalfUp(c.f1(), 4)}};
}

void from_json(const Json& j, PrfCounts& c) {
  j.at("tp").get_to(c.tp);
  j.at("fp").get_to(c.fp);
  j.at("fn").get_to(c.fn);
}

void to_json(Json& j, const ScoreReport& r) {
  Json per_type = Json::object();
  for (const auto& [type, c] : r.per_type) per_type[type] = c;
  j = Json{{"overall", r.overall}, {"per_type", std::move(per_type)}};
}

void from_json(const Json& j, ScoreReport& r) {
  r = {};
  for (const auto& [type, c] : j.at("per_type").items()) r.per_type[type] = c.get<PrfCounts>();
  if (j.contains("overall")) {
    j.at("overall").get_to(r.overall);
  } else {
    for (const auto& [type, c] : r.per_type) r.overall += c;
  }
}

void to_json(Json& j, const DeltaReport& d) {
  j = Json{{"label", d.label},
           {"old_f1", OptionalNumber(d.old_f1)},
           {"new_f1", OptionalNumber(d.new_f1)},
           {"delta", OptionalNumber(d.delta)},
           {"err_reduction", OptionalNumber(d.err_reduction)}};
}

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

void WriteJsonFile(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out.flush()) throw IoError("write to '" + path + "' failed");
}

}  // namespace nerscrub
