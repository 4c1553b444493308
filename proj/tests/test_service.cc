#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "nerscrub/corpus_io.h"
#include "nerscrub/detector.h"
#include "nerscrub/json_io.h"
#include "nerscrub/review_service.h"
#include "nerscrub/rules.h"
#include "test_support.h"

using namespace nerscrub;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t LineCount(const std::string& path) {
  std::string s = Slurp(path);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

const char* kCorpus =
    "# nw/wsj/00/wsj_0001\n"
    "In O\nthe B-GPE\nUS I-GPE\n, O\nBoris B-PERSON\nYelstin I-PERSON\n's I-PERSON\nspoke O\n\n"
    "NYC B-LOC\nwas O\nquiet O\n\n"
    "The B-ORG\nWhite I-ORG\nHouse I-ORG\nagreed O\n\n"
    "# bc/cnn/00/cnn_0003\n"
    "McDonald's B-ORG\nopened O\nin O\nthe B-GPE\nUS I-GPE\n\n";

// Session files in a private directory, plus a server on a free port.
struct Harness {
  fs::path dir;
  ServiceConfig config;
  std::unique_ptr<ReviewSession> session;
  std::unique_ptr<ReviewServer> server;
  std::thread thread;
  int port = 0;

  Harness() {
    static int counter = 0;
    dir = fs::temp_directory_path() /
          ("nerscrub_svc_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(dir);
    config.corpus_path = (dir / "test.conll").string();
    config.candidates_path = (dir / "candidates.jsonl").string();
    config.proposals_path = (dir / "proposals.jsonl").string();
    config.log_path = (dir / "decisions.jsonl").string();
    config.export_dir = (dir / "out").string();
    config.port = 0;
    std::ofstream(config.corpus_path) << kCorpus;
    Corpus c = ParseCorpusString(kCorpus).corpus;
    // Detector candidates against a tiny reference, plus review-only rule
    // findings.
    Corpus ref = MakeCorpus({MakeSentence("r", 0, {"the", "the", "US/B-GPE", "NYC/B-GPE"})});
    std::vector<Candidate> cands = FlagPartition(c, BuildProfile(ref));
    for (Candidate& k : ScanReviewCandidates(c, RuleSet::Default())) cands.push_back(std::move(k));
    WriteJsonLines(config.candidates_path, cands);
    WriteJsonLines(config.proposals_path, Scan(c, RuleSet::Default()));
    Start();
  }

  ~Harness() {
    Stop();
    fs::remove_all(dir);
  }

  void Start() {
    session = std::make_unique<ReviewSession>(config);
    server = std::make_unique<ReviewServer>(*session);
    port = server->Bind();
    thread = std::thread([this] { server->Listen(); });
  }

  void Stop() {
    if (server) server->Stop();
    if (thread.joinable()) thread.join();
    server.reset();
    session.reset();
  }

  void Restart() {
    Stop();
    Start();
  }

  httplib::Client Client() const {
    httplib::Client cli("127.0.0.1", port);
    cli.set_connection_timeout(5);
    cli.set_read_timeout(30);
    return cli;
  }

  Json Get(const std::string& path, int want = 200) const {
    auto cli = Client();
    auto res = cli.Get(path);
    REQUIRE(res);
    CHECK(res->status == want);
    return Json::parse(res->body);
  }

  Json Post(const std::string& path, const std::string& body, int want = 200) const {
    auto cli = Client();
    auto res = cli.Post(path, body, "application/json");
    REQUIRE(res);
    CHECK(res->status == want);
    return Json::parse(res->body);
  }

  Json Decide(const std::string& id, const Json& body, int want = 200) const {
    return Post("/api/v1/candidates/" + id + "/decision", body.dump(), want);
  }

  std::string ProposalId(const std::string& rule) const {
    Json list = Get("/api/v1/proposals?rule=" + rule);
    REQUIRE(list["total"].get<int>() >= 1);
    return list["items"][0]["id"];
  }
};

}  // namespace

TEST_CASE("fresh session lists every item as pending") {
  Harness h;
  Json all = h.Get("/api/v1/candidates?limit=1000");
  Json pending = h.Get("/api/v1/candidates?status=pending&limit=1000");
  CHECK(all["total"].get<int>() > 0);
  CHECK(pending["total"] == all["total"]);
  CHECK(pending["items"].size() == all["items"].size());
  // Highest occurrence count first.
  std::size_t prev = 1000;
  for (const Json& item : all["items"]) {
    std::size_t n = item["occurrences"].size();
    CHECK(n <= prev);
    prev = n;
    CHECK(item["status"] == "pending");
  }
  Json stats = h.Get("/api/v1/stats");
  CHECK(stats["status"]["pending"] == all["total"]);
  CHECK(stats["decisions"] == 0);
  for (const auto& [k, v] : stats["report"]["categories"].items()) CHECK(v == 0);
}

TEST_CASE("pagination and filters") {
  Harness h;
  Json all = h.Get("/api/v1/candidates?limit=1000");
  const std::size_t total = all["total"];
  Json page = h.Get("/api/v1/candidates?offset=1&limit=2");
  CHECK(page["total"] == total);
  CHECK(page["offset"] == 1);
  REQUIRE(page["items"].size() == std::min<std::size_t>(2, total - 1));
  CHECK(page["items"][0]["id"] == all["items"][1]["id"]);

  Json rules = h.Get("/api/v1/candidates?source=rule&rule=leading_determiner");
  std::size_t expected = 0;
  for (const Json& item : all["items"]) {
    if (item["source"] == "rule" && item.value("rule_id", "") == "leading_determiner") ++expected;
  }
  CHECK(rules["total"] == expected);
  CHECK(expected == 3);
  for (const Json& item : rules["items"]) CHECK(item["rule_id"] == "leading_determiner");

  Json hard = h.Get("/api/v1/candidates?source=hardeval");
  for (const Json& item : hard["items"]) CHECK_FALSE(item["flags"].empty());

  h.Get("/api/v1/candidates?status=happy", 400);
  h.Get("/api/v1/candidates?source=oracle", 400);
  h.Get("/api/v1/candidates?offset=-1", 400);
}

TEST_CASE("unknown ids and bad bodies leave the log untouched") {
  Harness h;
  h.Decide("0000000000000000", {{"verdict", "accept"}}, 404);
  h.Get("/api/v1/candidates/0000000000000000", 404);
  const std::string id = h.ProposalId("leading_determiner");
  h.Post("/api/v1/candidates/" + id + "/decision", "{not json", 400);
  h.Decide(id, {{"verdict", "sure"}}, 400);
  h.Decide(id, Json::object(), 400);
  h.Decide(id, {{"verdict", "modify"}}, 400);
  h.Decide(id, {{"verdict", "accept"}, {"replacement", {{"kind", "delete"}}}}, 400);
  CHECK_FALSE(fs::exists(h.config.log_path));
  Json stats = h.Get("/api/v1/stats");
  CHECK(stats["decisions"] == 0);
}

TEST_CASE("accepting a determiner proposal shows up as one span-only change") {
  Harness h;
  const std::string id = h.ProposalId("leading_determiner");
  Json r = h.Decide(id, {{"verdict", "accept"}, {"actor", "ana"}});
  CHECK(r["status"] == "confirmed_error");
  CHECK(r["applied"] == true);
  CHECK(r["decision"]["actor"] == "ana");
  CHECK(LineCount(h.config.log_path) == 1);

  Json stats = h.Get("/api/v1/stats");
  CHECK(stats["report"]["categories"]["span_only"] == 1);
  CHECK(stats["report"]["tokens"]["changed"] == 1);
  CHECK(stats["status"]["confirmed_error"] == 1);

  Json detail = h.Get("/api/v1/candidates/" + id);
  CHECK(detail["status"] == "confirmed_error");
  CHECK(detail["decision"]["verdict"] == "accept");
  CHECK(detail["sentence"]["changed"] == true);

  // Idempotent per verdict: a repeat appends a superseding line.
  h.Decide(id, {{"verdict", "accept"}});
  CHECK(LineCount(h.config.log_path) == 2);
  CHECK(h.Get("/api/v1/stats")["report"]["categories"]["span_only"] == 1);

  // Changing one's mind.
  h.Decide(id, {{"verdict", "reject"}});
  Json after = h.Get("/api/v1/stats");
  CHECK(after["report"]["categories"]["span_only"] == 0);
  CHECK(after["status"]["dismissed"] == 1);
  CHECK(h.Get("/api/v1/candidates?status=dismissed")["total"] == 1);
}

TEST_CASE("restart reconstructs identical state") {
  Harness h;
  h.Decide(h.ProposalId("leading_determiner"), {{"verdict", "accept"}});
  h.Decide(h.ProposalId("trailing_possessive"), {{"verdict", "ambiguous"}});
  Json all = h.Get("/api/v1/candidates?source=hardeval");
  REQUIRE(all["items"].size() > 0);
  h.Decide(all["items"][0]["id"], {{"verdict", "reject"}});
  Json before = h.Get("/api/v1/stats");
  Json list_before = h.Get("/api/v1/candidates?limit=1000");
  h.Restart();
  CHECK(h.Get("/api/v1/stats") == before);
  CHECK(h.Get("/api/v1/candidates?limit=1000") == list_before);
  // Working corpus equals a from-scratch replay of the log.
  auto proposals = ReadJsonLines<EditProposal>(h.config.proposals_path);
  std::set<std::string> review;
  for (const Candidate& c : ReadJsonLines<Candidate>(h.config.candidates_path)) review.insert(c.id);
  auto replayed = Replay(ParseCorpusString(kCorpus).corpus, DecisionLog(h.config.log_path).Load(),
                         proposals, review);
  CHECK(h.session->working_corpus() == replayed.corpus);
}

TEST_CASE("export writes the replayed corpus and is repeatable") {
  Harness h;
  Json paths = h.Post("/api/v1/export", "");
  std::string corpus = Slurp(paths["corpus"]);
  CHECK(corpus == kCorpus);
  Json report = ReadJsonFile(paths["report"]);
  CHECK(report["tokens"]["changed"] == 0);
  for (const auto& [k, v] : report["categories"].items()) CHECK(v == 0);

  h.Decide(h.ProposalId("leading_determiner"), {{"verdict", "accept"}});
  Json p1 = h.Post("/api/v1/export", "");
  std::string c1 = Slurp(p1["corpus"]), r1 = Slurp(p1["report"]), t1 = Slurp(p1["tables"]);
  Json p2 = h.Post("/api/v1/export", "");
  CHECK(Slurp(p2["corpus"]) == c1);
  CHECK(Slurp(p2["report"]) == r1);
  CHECK(Slurp(p2["tables"]) == t1);
  CHECK(ReadJsonFile(p1["report"])["categories"]["span_only"] == 1);
  CHECK(c1 != kCorpus);
  CHECK_NOTHROW(ParseCorpusString(c1));
}

TEST_CASE("modify carries a replacement on the same mention") {
  Harness h;
  // NYC is LOC in the corpus but GPE in the reference: a diff-etype candidate.
  Json list = h.Get("/api/v1/candidates?source=hardeval&limit=1000");
  Json nyc;
  for (const Json& item : list["items"]) {
    if (item["surface"] == "NYC") nyc = item;
  }
  REQUIRE_FALSE(nyc.is_null());
  Json target = {{"doc_id", "nw/wsj/00/wsj_0001"}, {"sent_index", 1}, {"start", 0}, {"end", 1},
                 {"etype", "LOC"}, {"surface", "NYC"}};
  Json bad_target = target;
  bad_target["start"] = 1;
  bad_target["end"] = 2;
  h.Decide(nyc["id"], {{"verdict", "modify"},
                       {"replacement", {{"target", bad_target}, {"operation", {{"kind", "retype"}, {"new_type", "GPE"}}}}}},
           400);
  h.Decide(nyc["id"], {{"verdict", "modify"},
                       {"replacement", {{"target", target}, {"operation", {{"kind", "retype"}, {"new_type", "LOC"}}}}}},
           400);
  Json ok = h.Decide(nyc["id"], {{"verdict", "modify"},
                                 {"replacement", {{"target", target}, {"operation", {{"kind", "retype"}, {"new_type", "GPE"}}}}}});
  CHECK(ok["applied"] == true);
  auto log = DecisionLog(h.config.log_path).Load();
  REQUIRE(log.size() == 1);
  REQUIRE(log[0].replacement);
  CHECK(log[0].replacement->operation == EditOperation::Retype("GPE"));
  Json stats = h.Get("/api/v1/stats");
  CHECK(stats["report"]["categories"]["type_only"] == 1);
  bool loc = false, gpe = false;
  for (const Json& t : stats["report"]["per_type"]) {
    if (t["type"] == "LOC") loc = t["delta"] == -1;
    if (t["type"] == "GPE") gpe = t["delta"] == 1;
  }
  CHECK(loc);
  CHECK(gpe);
}

TEST_CASE("sentences with slashes in the document id and a context window") {
  Harness h;
  Json s = h.Get("/api/v1/sentences/nw/wsj/00/wsj_0001/1?window=1");
  CHECK(s["doc_id"] == "nw/wsj/00/wsj_0001");
  CHECK(s["sent_index"] == 1);
  CHECK(s["tokens"][0]["text"] == "NYC");
  CHECK(s["tokens"][0]["tag"] == "B-LOC");
  CHECK(s["before"].size() == 1);
  CHECK(s["after"].size() == 1);
  CHECK(s["mentions"].size() == 1);
  Json first = h.Get("/api/v1/sentences/bc/cnn/00/cnn_0003/0?window=1");
  CHECK(first["before"].empty());
  CHECK(first["after"].empty());
  h.Get("/api/v1/sentences/bc/cnn/00/cnn_0003/7", 404);
}

TEST_CASE("proposals endpoint and reserved routes") {
  Harness h;
  Json all = h.Get("/api/v1/proposals");
  CHECK(all["total"] == 4);
  Json det = h.Get("/api/v1/proposals?rule=leading_determiner&status=pending");
  CHECK(det["total"] == 3);
  h.Decide(det["items"][0]["id"], {{"verdict", "reject"}});
  CHECK(h.Get("/api/v1/proposals?status=dismissed")["total"] == 1);
  h.Post("/api/v1/mentions", "{}", 501);
  auto cli = h.Client();
  auto res = cli.Get("/api/v1/nothing");
  REQUIRE(res);
  CHECK(res->status == 404);
}

TEST_CASE("linked proposals on a detector candidate") {
  Harness h;
  Json list = h.Get("/api/v1/candidates?source=hardeval&limit=1000");
  bool seen = false;
  for (const Json& item : list["items"]) {
    if (item["surface"] != "the US") continue;
    Json detail = h.Get("/api/v1/candidates/" + item["id"].get<std::string>());
    CHECK(detail["linked_proposals"].size() == 2);
    CHECK(detail["sentence"]["tokens"].size() > 0);
    seen = true;
  }
  CHECK(seen);
}

TEST_CASE("eight concurrent clients") {
  Harness h;
  Json list = h.Get("/api/v1/candidates?limit=1000");
  std::vector<std::string> ids;
  for (const Json& item : list["items"]) ids.push_back(item["id"]);
  REQUIRE(ids.size() >= 4);
  std::atomic<int> ok{0}, failed{0};
  std::vector<std::thread> clients;
  const int rounds = 6;
  for (int t = 0; t < 8; ++t) {
    clients.emplace_back([&, t] {
      auto cli = h.Client();
      for (int i = 0; i < rounds; ++i) {
        const std::string& id = ids[static_cast<std::size_t>(t + i) % ids.size()];
        Json body = {{"verdict", (t + i) % 2 ? "accept" : "reject"}, {"actor", "c" + std::to_string(t)}};
        auto res = cli.Post("/api/v1/candidates/" + id + "/decision", body.dump(), "application/json");
        (res && res->status == 200) ? ++ok : ++failed;
        auto s = cli.Get("/api/v1/stats");
        (s && s->status == 200) ? ++ok : ++failed;
      }
    });
  }
  for (auto& c : clients) c.join();
  CHECK(failed == 0);
  CHECK(ok == 8 * rounds * 2);
  auto log = DecisionLog(h.config.log_path).Load();
  CHECK(log.size() == 8 * rounds);
  CHECK(LineCount(h.config.log_path) == 8 * rounds);
  Json stats = h.Get("/api/v1/stats");
  CHECK(stats["decisions"] == 8 * rounds);
  h.Restart();
  CHECK(h.Get("/api/v1/stats") == stats);
}

TEST_CASE("port in use and unreadable inputs") {
  Harness h;
  ServiceConfig c = h.config;
  c.port = h.port;
  ReviewSession second(c);
  ReviewServer clash(second);
  CHECK_THROWS_AS(clash.Bind(), ServiceError);
  ServiceConfig missing = h.config;
  missing.corpus_path = (h.dir / "nope.conll").string();
  CHECK_THROWS(ReviewSession(missing));
  ServiceConfig bad = h.config;
  bad.proposals_path = (h.dir / "nope.jsonl").string();
  CHECK_THROWS(ReviewSession(bad));
}

TEST_CASE("stop is never lost, whenever it arrives") {
  Harness h;
  for (int i = 0; i < 50; ++i) {
    ReviewSession session(h.config);
    ReviewServer server(session);
    server.Bind();
    std::thread t([&] { server.Listen(); });
    server.Stop();
    t.join();
  }
  ReviewServer early(*h.session);
  early.Stop();
  early.Listen();  // returns at once
}
