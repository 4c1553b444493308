#include "nerscrub/review_service.h"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <thread>

#include "httplib.h"

namespace nerscrub {
namespace {

namespace fs = std::filesystem;

constexpr std::size_t kMaxLimit = 1000;
constexpr std::size_t kMaxWindow = 5;

Corpus LoadCorpus(const ServiceConfig& config) {
  return ReadCorpusFile(config.corpus_path, config.format).corpus;
}

MentionLocation LocationOf(const Mention& m) {
  return {m.doc_id, m.sent_index, m.start, m.end};
}

CandidateStatus StatusFor(Verdict v) {
  switch (v) {
    case Verdict::kAccept:
    case Verdict::kModify:
      return CandidateStatus::kConfirmedError;
    case Verdict::kReject:
      return CandidateStatus::kDismissed;
    case Verdict::kAmbiguous:
      return CandidateStatus::kAmbiguous;
  }
  return CandidateStatus::kPending;
}

std::string RuleOfNote(const std::string& note) {
  auto colon = note.find(':');
  return colon == std::string::npos ? std::string() : note.substr(0, colon);
}

Json ErrorBody(const std::string& message) { return Json{{"error", message}}; }

}  // namespace

ReviewSession::ReviewSession(ServiceConfig config)
    : config_(std::move(config)),
      original_(LoadCorpus(config_)),
      index_(original_),
      log_(config_.log_path) {
  std::vector<Candidate> candidates;
  if (!config_.candidates_path.empty()) {
    candidates = ReadJsonLines<Candidate>(config_.candidates_path);
  }
  if (!config_.proposals_path.empty()) {
    proposals_ = ReadJsonLines<EditProposal>(config_.proposals_path);
  }

  for (Candidate& c : candidates) {
    Item item;
    item.rule = c.source == CandidateSource::kRule ? RuleOfNote(c.note) : std::string();
    if (!c.occurrences.empty()) {
      std::size_t pos = index_.Find(c.mention.doc_id, c.mention.sent_index);
      if (pos != SentenceIndex::npos) {
        const Sentence& s = original_.sentences[pos];
        c.mention.surface = JoinTokens(s, c.mention.start, std::min(c.mention.end, s.tokens.size()));
      }
    }
    c.status = CandidateStatus::kPending;
    review_ids_.insert(c.id);
    item.candidate = std::move(c);
    items_.push_back(std::move(item));
  }
  for (const EditProposal& p : proposals_) {
    Item item;
    item.rule = p.rule_id;
    item.proposal = p;
    Candidate& c = item.candidate;
    c.id = p.id;
    c.mention = p.target;
    c.source = CandidateSource::kRule;
    c.occurrences.push_back(LocationOf(p.target));
    c.note = p.rule_id + ": " + p.operation.str();
    std::size_t pos = index_.Find(p.target.doc_id, p.target.sent_index);
    if (pos != SentenceIndex::npos) {
      for (const LabeledToken& t : original_.sentences[pos].tokens) c.context.push_back(t.text);
    }
    items_.push_back(std::move(item));
  }
  std::stable_sort(items_.begin(), items_.end(), [](const Item& a, const Item& b) {
    return a.candidate.occurrences.size() > b.candidate.occurrences.size();
  });
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!item_index_.emplace(items_[i].candidate.id, i).second) {
      throw IoError("duplicate review item id " + items_[i].candidate.id);
    }
  }

  decisions_ = log_.Load();
  Rebuild();
}

void ReviewSession::Rebuild() {
  ReplayResult r = Replay(original_, decisions_, proposals_, review_ids_);
  effective_ = EffectiveDecisions(decisions_);
  diff_ = DiffCorpora(original_, r.corpus);
  working_ = std::move(r.corpus);
  replay_report_ = std::move(r.report);
}

Corpus ReviewSession::working_corpus() const {
  std::shared_lock lock(mu_);
  return working_;
}

CandidateStatus ReviewSession::StatusOf(const std::string& id) const {
  auto it = effective_.find(id);
  return it == effective_.end() ? CandidateStatus::kPending : StatusFor(it->second.verdict);
}

const ReviewSession::Item& ReviewSession::FindItem(const std::string& id) const {
  auto it = item_index_.find(id);
  if (it == item_index_.end()) throw ServiceError(404, "unknown candidate id '" + id + "'");
  return items_[it->second];
}

Json ReviewSession::ItemJson(const Item& item) const {
  Candidate c = item.candidate;
  c.status = StatusOf(c.id);
  Json j = c;
  if (!item.rule.empty()) j["rule_id"] = item.rule;
  if (item.proposal) j["proposal"] = *item.proposal;
  return j;
}

Json ReviewSession::SentenceJson(const Sentence& s) const {
  Json tokens = Json::array();
  for (const LabeledToken& t : s.tokens) tokens.push_back({{"text", t.text}, {"tag", t.tag.str()}});
  Json j{{"doc_id", s.doc_id}, {"sent_index", s.sent_index}, {"tokens", std::move(tokens)}};
  std::size_t pos = index_.Find(s.doc_id, s.sent_index);
  if (pos != SentenceIndex::npos) {
    const Sentence& orig = original_.sentences[pos];
    bool changed = false;
    Json original_tags = Json::array();
    for (std::size_t i = 0; i < orig.tokens.size(); ++i) {
      original_tags.push_back(orig.tokens[i].tag.str());
      changed = changed || !(orig.tokens[i].tag == s.tokens[i].tag);
    }
    j["changed"] = changed;
    if (changed) j["original_tags"] = std::move(original_tags);
  }
  return j;
}

Json ReviewSession::ListCandidates(const CandidateQuery& q) const {
  std::shared_lock lock(mu_);
  Json items = Json::array();
  std::size_t total = 0;
  const std::size_t limit = std::min(q.limit, kMaxLimit);
  for (const Item& item : items_) {
    if (q.source && item.candidate.source != *q.source) continue;
    if (!q.rule.empty() && item.rule != q.rule) continue;
    if (q.status && StatusOf(item.candidate.id) != *q.status) continue;
    if (total >= q.offset && items.size() < limit) items.push_back(ItemJson(item));
    ++total;
  }
  return Json{{"total", total}, {"offset", q.offset}, {"limit", limit}, {"items", std::move(items)}};
}

Json ReviewSession::GetCandidate(const std::string& id) const {
  std::shared_lock lock(mu_);
  const Item& item = FindItem(id);
  Json j = ItemJson(item);
  const Candidate& c = item.candidate;
  std::size_t pos = index_.Find(c.mention.doc_id, c.mention.sent_index);
  if (pos != SentenceIndex::npos) j["sentence"] = SentenceJson(working_.sentences[pos]);

  if (!item.proposal) {
    // Proposals that target one of this candidate's occurrences.
    std::set<MentionLocation> locs(c.occurrences.begin(), c.occurrences.end());
    Json linked = Json::array();
    for (const EditProposal& p : proposals_) {
      if (!locs.count(LocationOf(p.target))) continue;
      Json pj = p;
      pj["status"] = ToString(StatusOf(p.id));
      linked.push_back(std::move(pj));
    }
    j["linked_proposals"] = std::move(linked);
  }
  if (auto it = effective_.find(id); it != effective_.end()) j["decision"] = it->second;
  for (const SkippedEdit& s : replay_report_.skipped_edits) {
    if (s.proposal_id == id) j["skipped_reason"] = s.reason;
  }
  return j;
}

void ReviewSession::ValidateReplacement(const Item& item, const EditProposal& r) const {
  const MentionLocation loc = LocationOf(r.target);
  if (item.proposal) {
    if (!(LocationOf(item.proposal->target) == loc) || item.proposal->target.etype != r.target.etype) {
      throw ServiceError(400, "replacement must target the proposal's mention");
    }
  } else {
    const auto& occ = item.candidate.occurrences;
    if (std::find(occ.begin(), occ.end(), loc) == occ.end() ||
        item.candidate.mention.etype != r.target.etype) {
      throw ServiceError(400, "replacement must target an occurrence of the candidate");
    }
  }
  std::size_t pos = index_.Find(r.target.doc_id, r.target.sent_index);
  if (pos == SentenceIndex::npos) throw ServiceError(400, "replacement targets an unknown sentence");
  // Decisions replay against the original corpus, so validate there.
  Sentence scratch = original_.sentences[pos];
  try {
    ApplyEditToSentence(scratch, r);
  } catch (const EditError& e) {
    throw ServiceError(400, std::string("invalid replacement: ") + e.what());
  }
}

Json ReviewSession::Decide(const std::string& id, const Json& body) {
  const Item& item = FindItem(id);  // items_ is immutable after construction
  if (!body.is_object()) throw ServiceError(400, "decision body must be a JSON object");
  if (!body.contains("verdict") || !body.at("verdict").is_string()) {
    throw ServiceError(400, "missing verdict");
  }
  auto verdict = ParseVerdict(body.at("verdict").get<std::string>());
  if (!verdict) throw ServiceError(400, "unknown verdict '" + body.at("verdict").get<std::string>() + "'");

  Decision d;
  d.proposal_id = id;
  d.verdict = *verdict;
  d.actor = config_.actor;
  if (body.contains("actor") && body.at("actor").is_string() &&
      !body.at("actor").get<std::string>().empty()) {
    d.actor = body.at("actor").get<std::string>();
  }
  const bool has_replacement = body.contains("replacement") && !body.at("replacement").is_null();
  if (d.verdict == Verdict::kModify) {
    if (!has_replacement) throw ServiceError(400, "modify requires a replacement");
    Json rj = body.at("replacement");
    if (!rj.is_object()) throw ServiceError(400, "replacement must be an object");
    if (!rj.contains("rule_id")) rj["rule_id"] = item.rule.empty() ? "manual" : item.rule;
    rj.erase("id");
    EditProposal r;
    try {
      r = rj.get<EditProposal>();
    } catch (const Json::exception& e) {
      throw ServiceError(400, std::string("malformed replacement: ") + e.what());
    }
    ValidateReplacement(item, r);
    d.replacement = std::move(r);
  } else if (has_replacement) {
    throw ServiceError(400, "replacement is only allowed with verdict modify");
  }
  d.timestamp = UtcTimestamp();

  std::unique_lock lock(mu_);
  try {
    log_.Append(d);
  } catch (const LogError& e) {
    throw ServiceError(500, e.what());
  }
  decisions_.push_back(d);
  Rebuild();

  Json j{{"id", id}, {"status", ToString(StatusOf(id))}, {"decision", d}};
  bool applied = std::find(replay_report_.applied_ids.begin(), replay_report_.applied_ids.end(),
                           id) != replay_report_.applied_ids.end();
  j["applied"] = applied;
  for (const SkippedEdit& s : replay_report_.skipped_edits) {
    if (s.proposal_id == id) j["skipped_reason"] = s.reason;
  }
  return j;
}

Json ReviewSession::ListProposals(const std::string& rule,
                                  std::optional<CandidateStatus> status) const {
  std::shared_lock lock(mu_);
  Json items = Json::array();
  for (const EditProposal& p : proposals_) {
    if (!rule.empty() && p.rule_id != rule) continue;
    CandidateStatus st = StatusOf(p.id);
    if (status && st != *status) continue;
    Json pj = p;
    pj["status"] = ToString(st);
    items.push_back(std::move(pj));
  }
  return Json{{"total", items.size()}, {"items", std::move(items)}};
}

Json ReviewSession::Stats() const {
  std::shared_lock lock(mu_);
  std::map<std::string, std::size_t> by_status;
  for (auto s : {CandidateStatus::kPending, CandidateStatus::kConfirmedError,
                 CandidateStatus::kDismissed, CandidateStatus::kAmbiguous}) {
    by_status[ToString(s)] = 0;
  }
  std::map<std::string, std::map<std::string, std::size_t>> by_source;
  for (const Item& item : items_) {
    const char* st = ToString(StatusOf(item.candidate.id));
    ++by_status[st];
    ++by_source[ToString(item.candidate.source)][st];
  }
  Json status = Json::object();
  for (const auto& [k, v] : by_status) status[k] = v;
  Json sources = Json::object();
  for (const auto& [src, counts] : by_source) {
    Json cj = Json::object();
    for (const auto& [k, v] : counts) cj[k] = v;
    sources[src] = std::move(cj);
  }
  Json skipped = Json::array();
  for (const SkippedEdit& s : replay_report_.skipped_edits) {
    skipped.push_back({{"proposal_id", s.proposal_id}, {"reason", s.reason}});
  }
  return Json{{"items", items_.size()},
              {"status", std::move(status)},
              {"by_source", std::move(sources)},
              {"decisions", decisions_.size()},
              {"replay",
               {{"applied", replay_report_.applied},
                {"skipped", replay_report_.skipped},
                {"rejected", replay_report_.rejected},
                {"ambiguous", replay_report_.ambiguous},
                {"acknowledged", replay_report_.acknowledged},
                {"skipped_edits", std::move(skipped)}}},
              {"report", diff_}};
}

Json ReviewSession::Export() const {
  std::lock_guard export_lock(export_mu_);
  Corpus corrected;
  DiffReport report;
  {
    std::shared_lock lock(mu_);
    corrected = working_;
    report = diff_;
  }
  std::error_code ec;
  fs::create_directories(config_.export_dir, ec);
  if (ec) throw ServiceError(500, "cannot create '" + config_.export_dir + "': " + ec.message());
  const fs::path dir(config_.export_dir);
  const std::string corpus_path = (dir / "corrected.conll").string();
  const std::string report_path = (dir / "report.json").string();
  const std::string tables_path = (dir / "report.txt").string();
  try {
    WriteCorpusFile(corrected, corpus_path, config_.format);
    WriteJsonFile(report_path, Json(report));
    std::ofstream out(tables_path, std::ios::binary | std::ios::trunc);
    out << RenderDiffTables(report);
    if (!out.flush()) throw IoError("write to '" + tables_path + "' failed");
  } catch (const IoError& e) {
    throw ServiceError(500, e.what());
  }
  return Json{{"corpus", corpus_path}, {"report", report_path}, {"tables", tables_path}};
}

Json ReviewSession::GetSentence(const std::string& doc_id, std::size_t sent_index,
                                std::size_t window) const {
  std::shared_lock lock(mu_);
  std::size_t pos = index_.Find(doc_id, sent_index);
  if (pos == SentenceIndex::npos) {
    throw ServiceError(404, "no sentence " + doc_id + "/" + std::to_string(sent_index));
  }
  window = std::min(window, kMaxWindow);
  Json before = Json::array();
  Json after = Json::array();
  for (std::size_t k = window; k >= 1; --k) {
    if (sent_index < k) continue;
    std::size_t p = index_.Find(doc_id, sent_index - k);
    if (p != SentenceIndex::npos) before.push_back(SentenceJson(working_.sentences[p]));
  }
  for (std::size_t k = 1; k <= window; ++k) {
    std::size_t p = index_.Find(doc_id, sent_index + k);
    if (p != SentenceIndex::npos) after.push_back(SentenceJson(working_.sentences[p]));
  }
  Json j = SentenceJson(working_.sentences[pos]);
  Json mentions = Json::array();
  for (const Mention& m : ExtractMentions(working_.sentences[pos])) mentions.push_back(m);
  j["mentions"] = std::move(mentions);
  j["before"] = std::move(before);
  j["after"] = std::move(after);
  return j;
}

// ---------------------------------------------------------------------------

namespace {

void Send(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void Guard(httplib::Response& res, const std::function<Json()>& fn) {
  try {
    Send(res, 200, fn());
  } catch (const ServiceError& e) {
    Send(res, e.status(), ErrorBody(e.what()));
  } catch (const Json::exception& e) {
    Send(res, 400, ErrorBody(e.what()));
  } catch (const std::exception& e) {
    Send(res, 500, ErrorBody(e.what()));
  }
}

std::size_t SizeParam(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string v = req.get_param_value(key);
  if (v.empty()) return fallback;
  if (v.find_first_not_of("0123456789") != std::string::npos || v.size() > 12) {
    throw ServiceError(400, std::string("bad ") + key + " '" + v + "'");
  }
  return static_cast<std::size_t>(std::stoull(v));
}

std::optional<CandidateStatus> StatusParam(const httplib::Request& req) {
  std::string v = req.has_param("status") ? req.get_param_value("status") : std::string();
  if (v.empty()) return std::nullopt;
  auto s = ParseCandidateStatus(v);
  if (!s) throw ServiceError(400, "unknown status '" + v + "'");
  return s;
}

}  // namespace

ReviewServer::ReviewServer(ReviewSession& session)
    : session_(session), server_(std::make_unique<httplib::Server>()) {
  // The default SO_REUSEPORT would let a second instance share the port and
  // split the traffic; SO_REUSEADDR alone still allows a quick restart.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  Routes();
}

ReviewServer::~ReviewServer() { Stop(); }

void ReviewServer::Routes() {
  httplib::Server& svr = *server_;
  ReviewSession& s = session_;

  svr.Get("/api/v1/candidates", [&s](const httplib::Request& req, httplib::Response& res) {
    Guard(res, [&] {
      CandidateQuery q;
      q.status = StatusParam(req);
      if (req.has_param("source") && !req.get_param_value("source").empty()) {
        q.source = ParseCandidateSource(req.get_param_value("source"));
        if (!q.source) throw ServiceError(400, "unknown source '" + req.get_param_value("source") + "'");
      }
      if (req.has_param("rule")) q.rule = req.get_param_value("rule");
      q.offset = SizeParam(req, "offset", 0);
      q.limit = SizeParam(req, "limit", q.limit);
      return s.ListCandidates(q);
    });
  });
  svr.Get(R"(/api/v1/candidates/([^/]+))", [&s](const httplib::Request& req, httplib::Response& res) {
    Guard(res, [&] { return s.GetCandidate(req.matches[1]); });
  });
  svr.Post(R"(/api/v1/candidates/([^/]+)/decision)",
           [&s](const httplib::Request& req, httplib::Response& res) {
             Guard(res, [&] {
               Json body = Json::parse(req.body, nullptr, false);
               if (body.is_discarded()) throw ServiceError(400, "decision body is not valid JSON");
               return s.Decide(req.matches[1], body);
             });
           });
  svr.Get("/api/v1/proposals", [&s](const httplib::Request& req, httplib::Response& res) {
    Guard(res, [&] {
      std::string rule = req.has_param("rule") ? req.get_param_value("rule") : std::string();
      return s.ListProposals(rule, StatusParam(req));
    });
  });
  svr.Get("/api/v1/stats", [&s](const httplib::Request&, httplib::Response& res) {
    Guard(res, [&] { return s.Stats(); });
  });
  svr.Post("/api/v1/export", [&s](const httplib::Request&, httplib::Response& res) {
    Guard(res, [&] { return s.Export(); });
  });
  // Greedy first group: document ids may contain '/'.
  svr.Get(R"(/api/v1/sentences/(.+)/(\d+))", [&s](const httplib::Request& req, httplib::Response& res) {
    Guard(res, [&] {
      const std::string idx = req.matches[2];
      if (idx.size() > 12) throw ServiceError(400, "bad sentence index");
      return s.GetSentence(req.matches[1], std::stoull(idx), SizeParam(req, "window", 0));
    });
  });
  svr.Post("/api/v1/mentions", [](const httplib::Request&, httplib::Response& res) {
    Send(res, 501, ErrorBody("adding new mentions is not supported"));
  });

  if (!s.config().static_dir.empty()) svr.set_mount_point("/", s.config().static_dir);
}

int ReviewServer::Bind() {
  const ServiceConfig& c = session_.config();
  if (c.port == 0) {
    int port = server_->bind_to_any_port(c.host);
    if (port < 0) throw ServiceError(500, "cannot bind " + c.host);
    return port;
  }
  if (!server_->bind_to_port(c.host, c.port)) {
    throw ServiceError(500, "cannot bind " + c.host + ":" + std::to_string(c.port) +
                                " (port in use?)");
  }
  return c.port;
}

void ReviewServer::Listen() {
  {
    std::lock_guard lock(state_mu_);
    if (stopped_) return;
    listening_ = true;
  }
  server_->listen_after_bind();
  finished_ = true;
}

void ReviewServer::Stop() {
  {
    std::lock_guard lock(state_mu_);
    stopped_ = true;
    if (!listening_) return;
  }
  // httplib ignores stop() until its accept loop is up, so a stop issued
  // right after Listen() starts would otherwise be lost.
  while (!server_->is_running() && !finished_) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  server_->stop();
}

}  // namespace nerscrub
