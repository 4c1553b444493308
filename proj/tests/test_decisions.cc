#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "doctest.h"
#include "nerscrub/decisions.h"
#include "nerscrub/json_io.h"
#include "nerscrub/rules.h"
#include "test_support.h"

using namespace nerscrub;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("nerscrub_dec_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static inline int counter = 0;
};

Decision D(const std::string& id, Verdict v, std::optional<EditProposal> r = std::nullopt) {
  return {id, v, std::move(r), "tester", "2024-05-01T12:00:00Z"};
}

Corpus TheUs() {
  return MakeCorpus({MakeSentence("d", 0, {"in", "the/B-GPE", "US/I-GPE"}),
                     MakeSentence("d", 1, {"Boris/B-PERSON", "Yelstin/I-PERSON", "'s/I-PERSON", "plan"})});
}

}  // namespace

TEST_CASE("verdict names") {
  for (auto v : {Verdict::kAccept, Verdict::kReject, Verdict::kAmbiguous, Verdict::kModify}) {
    CHECK(ParseVerdict(ToString(v)) == v);
  }
  CHECK_FALSE(ParseVerdict("maybe"));
}

TEST_CASE("decisions and proposals survive JSON") {
  Mention m{"d", 0, 1, 3, "GPE", "the US"};
  EditProposal p = EditProposal::Make("leading_determiner", m, EditOperation::ShrinkLeft(1));
  CHECK(Json(p).get<EditProposal>() == p);
  Decision d = D(p.id, Verdict::kModify, EditProposal::Make("manual", m, EditOperation::Retype("LOC")));
  CHECK(Json(d).get<Decision>() == d);
  Json j = Json::parse(R"({"proposal_id":"x","verdict":"accept","actor":"a","timestamp":"t"})");
  CHECK(j.get<Decision>().verdict == Verdict::kAccept);
  CHECK_THROWS(Json::parse(R"({"proposal_id":"x","verdict":"perhaps"})").get<Decision>());
  // Missing id is recomputed.
  Json pj = Json(p);
  pj.erase("id");
  CHECK(pj.get<EditProposal>().id == p.id);
}

TEST_CASE("timestamps are ISO-8601 UTC") {
  std::string t = UtcTimestamp();
  CHECK(t.size() == 20);
  CHECK(t[4] == '-');
  CHECK(t[10] == 'T');
  CHECK(t.back() == 'Z');
}

TEST_CASE("last decision per id wins") {
  std::vector<Decision> log = {D("a", Verdict::kAccept), D("b", Verdict::kReject), D("a", Verdict::kReject)};
  auto eff = EffectiveDecisions(log);
  CHECK(eff.size() == 2);
  CHECK(eff["a"].verdict == Verdict::kReject);
}

TEST_CASE("log append and load") {
  TempDir dir;
  DecisionLog log(dir.file("d.jsonl"));
  CHECK(log.Load().empty());
  log.Append(D("a", Verdict::kAccept));
  log.Append(D("a", Verdict::kReject));
  auto loaded = log.Load();
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[1] == D("a", Verdict::kReject));
}

TEST_CASE("a torn final line is ignored and then discarded") {
  TempDir dir;
  const std::string path = dir.file("d.jsonl");
  DecisionLog log(path);
  log.Append(D("a", Verdict::kAccept));
  {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    out << R"({"proposal_id":"b","verdict":"acc)";
  }
  CHECK(log.Load().size() == 1);
  log.Append(D("c", Verdict::kReject));
  auto loaded = log.Load();
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[1].proposal_id == "c");

  // A complete but unterminated line was not acknowledged either.
  {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    out << Json(D("e", Verdict::kAccept)).dump();
  }
  CHECK(log.Load().size() == 2);

  // Damage in the middle is an error.
  {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    out << "garbage\n" << Json(D("a", Verdict::kAccept)).dump() << "\n";
  }
  CHECK_THROWS_AS(log.Load(), LogError);
}

TEST_CASE("concurrent appends never interleave") {
  TempDir dir;
  const std::string path = dir.file("d.jsonl");
  DecisionLog log(path);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&log, t] {
      for (int i = 0; i < 100; ++i) {
        Decision d = D("t" + std::to_string(t) + "_" + std::to_string(i), Verdict::kAccept);
        d.actor = std::string(200, static_cast<char>('a' + t));
        log.Append(d);
      }
    });
  }
  for (auto& th : threads) th.join();
  // A second writer on the same file, as a separate process would be.
  DecisionLog other(path);
  other.Append(D("last", Verdict::kReject));
  auto loaded = log.Load();
  CHECK(loaded.size() == 801);
  std::set<std::string> ids;
  for (const Decision& d : loaded) ids.insert(d.proposal_id);
  CHECK(ids.size() == 801);
}

TEST_CASE("replay applies accepted proposals") {
  Corpus c = TheUs();
  auto proposals = Scan(c, RuleSet::Default());
  REQUIRE(proposals.size() == 2);

  auto empty = Replay(c, {}, proposals);
  CHECK(empty.corpus == c);
  CHECK(empty.report.applied == 0);

  auto r = Replay(c, {D(proposals[0].id, Verdict::kAccept), D(proposals[1].id, Verdict::kReject)}, proposals);
  CHECK(TagStrings(r.corpus.sentences[0]) == std::vector<std::string>{"O", "O", "B-GPE"});
  CHECK(r.corpus.sentences[1] == c.sentences[1]);
  CHECK(r.report.applied == 1);
  CHECK(r.report.rejected == 1);
  CHECK(r.report.applied_ids == std::vector<std::string>{proposals[0].id});
}

TEST_CASE("replay errors and skips") {
  Corpus c = TheUs();
  auto proposals = Scan(c, RuleSet::Default());
  CHECK_THROWS_AS(Replay(c, {D("feedface00000000", Verdict::kAccept)}, proposals), ReplayError);
  // Review ids are known; an accept there carries no edit.
  auto ack = Replay(c, {D("review1", Verdict::kAccept)}, proposals, {"review1"});
  CHECK(ack.report.acknowledged == 1);
  CHECK(ack.corpus == c);

  // Stale target: the corpus changed since the scan.
  Corpus changed = c;
  changed.sentences[0].tokens[1].tag = Tag::Outside();
  changed.sentences[0].tokens[2].tag = Tag::Begin("GPE");
  auto stale = Replay(changed, {D(proposals[0].id, Verdict::kAccept)}, proposals);
  CHECK(stale.report.skipped == 1);
  CHECK(stale.report.applied == 0);
  CHECK(stale.corpus == changed);
  REQUIRE(stale.report.skipped_edits.size() == 1);
  CHECK(stale.report.skipped_edits[0].proposal_id == proposals[0].id);

  // Modify must stay on the proposal's mention.
  Mention elsewhere = proposals[1].target;
  auto off = Replay(c, {D(proposals[0].id, Verdict::kModify,
                          EditProposal::Make("manual", elsewhere, EditOperation::Delete()))},
                    proposals);
  CHECK(off.report.skipped == 1);
  CHECK(off.corpus == c);

  auto mod = Replay(c, {D(proposals[0].id, Verdict::kModify,
                          EditProposal::Make("manual", proposals[0].target, EditOperation::Retype("LOC")))},
                    proposals);
  CHECK(mod.report.applied == 1);
  CHECK(TagStrings(mod.corpus.sentences[0]) == std::vector<std::string>{"O", "B-LOC", "I-LOC"});
}

TEST_CASE("an edit blocked by a later deletion still lands") {
  Corpus c = MakeCorpus({MakeSentence("d", 0, {"Monday/B-DATE", "Inc./B-ORG"})});
  auto ms = ExtractMentions(c.sentences[0]);
  EditProposal grow = EditProposal::Make("r", ms[0], EditOperation::Grow(0, 1));
  EditProposal del = EditProposal::Make("r", ms[1], EditOperation::Delete());
  std::vector<EditProposal> proposals{grow, del};
  std::vector<Decision> log{D(grow.id, Verdict::kAccept), D(del.id, Verdict::kAccept)};
  auto once = Replay(c, log, proposals);
  CHECK(once.report.applied == 2);
  CHECK(TagStrings(once.corpus.sentences[0]) == std::vector<std::string>{"B-DATE", "I-DATE"});
  auto twice = Replay(once.corpus, log, proposals);
  CHECK(twice.corpus == once.corpus);
  CHECK(twice.report.applied == 0);
}

TEST_CASE("replay is deterministic, idempotent and BIO-safe") {
  Rng rng(99);
  GenOptions o;
  for (int i = 0; i < 100; ++i) {
    Corpus c = RandomCorpus(rng, o);
    auto proposals = Scan(c, RuleSet::Default());
    auto log = RandomLog(rng, c, proposals, o);
    auto r1 = Replay(c, log, proposals);
    CHECK(ValidateCorpus(r1.corpus).empty());
    auto again = Replay(c, log, proposals);
    CHECK(again.corpus == r1.corpus);
    CHECK(again.report.applied_ids == r1.report.applied_ids);
    auto r2 = Replay(r1.corpus, log, proposals);
    CHECK(r2.corpus == r1.corpus);
    CHECK(r2.report.applied == 0);
    for (std::size_t k = 0; k < c.sentences.size(); ++k) {
      REQUIRE(r1.corpus.sentences[k].tokens.size() == c.sentences[k].tokens.size());
      for (std::size_t t = 0; t < c.sentences[k].tokens.size(); ++t) {
        CHECK(r1.corpus.sentences[k].tokens[t].text == c.sentences[k].tokens[t].text);
      }
    }
  }
}
