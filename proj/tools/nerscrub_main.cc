// nerscrub command-line tool.

#include <pthread.h>

#include <csignal>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "nerscrub/corpus_io.h"
#include "nerscrub/decisions.h"
#include "nerscrub/detector.h"
#include "nerscrub/diff.h"
#include "nerscrub/json_io.h"
#include "nerscrub/review_service.h"
#include "nerscrub/rules.h"
#include "nerscrub/scorer.h"

using namespace nerscrub;

namespace {

std::vector<std::string> SplitCommas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ColumnFormat FormatOf(const std::string& spec, bool repair) {
  ColumnFormat f = spec.empty() ? ColumnFormat{} : ColumnFormat::FromString(spec);
  if (repair) f.mode = Strictness::kRepair;
  return f;
}

Corpus Load(const std::string& path, const ColumnFormat& f) {
  ParseResult r = ReadCorpusFile(path, f);
  for (const Violation& v : r.violations) std::cerr << "repaired: " << Json(v).dump() << '\n';
  return std::move(r.corpus);
}

RuleSet RulesFrom(const std::string& only) {
  RuleSet rules = RuleSet::Default();
  if (!only.empty()) rules.EnableOnly(SplitCommas(only));
  return rules;
}

// --- parse-check ----------------------------------------------------------

struct ParseCheckArgs {
  std::string file;
  std::string format;
  bool repair = false;
};

int RunParseCheck(const ParseCheckArgs& a) {
  ColumnFormat f = FormatOf(a.format, true);  // collect every violation
  ParseResult r = ReadCorpusFile(a.file, f);
  for (const Violation& v : r.violations) std::cout << Json(v).dump() << '\n';
  if (a.repair) return 0;
  return r.violations.empty() ? 0 : 1;
}

// --- detect ---------------------------------------------------------------

struct DetectArgs {
  std::string train;
  std::string target;
  std::size_t cv = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
  bool repair = false;
};

int RunDetect(const DetectArgs& a) {
  ColumnFormat f = FormatOf(a.format, a.repair);
  Corpus train = Load(a.train, f);
  std::vector<Candidate> cands;
  if (a.cv > 0) {
    cands = CrossValidatedFlags(train, a.cv, a.seed);
  } else {
    Corpus target = Load(a.target, f);
    cands = FlagPartition(target, BuildProfile(train));
  }
  WriteJsonLines(a.out, cands);
  std::cerr << cands.size() << " candidates written to " << a.out << '\n';
  return 0;
}

// --- pairs ----------------------------------------------------------------

struct PairsArgs {
  std::string in;
  std::string types;
  std::size_t top = 0;
  std::string out;
  std::string candidates;
  std::string format;
  bool repair = false;
};

int RunPairs(const PairsArgs& a) {
  Corpus c = Load(a.in, FormatOf(a.format, a.repair));
  std::vector<PairEntry> pairs = MentionTypePairs(c, SplitCommas(a.types));
  const std::size_t n = a.top == 0 ? pairs.size() : std::min(a.top, pairs.size());
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open '" + a.out + "' for writing");
  }
  std::ostream& out = a.out.empty() ? std::cout : file;
  for (std::size_t i = 0; i < n; ++i) {
    out << pairs[i].surface << '\t' << pairs[i].etype << '\t' << pairs[i].count << '\n';
  }
  if (!a.candidates.empty()) WriteJsonLines(a.candidates, PairCandidates(c, pairs, n));
  return 0;
}

// --- rules ----------------------------------------------------------------

struct RulesArgs {
  std::string in;
  std::string out;
  std::string review_out;
  std::string only;
  std::string proposals;
  std::string candidates;
  std::string log;
  std::string report;
  std::string actor = "reviewer";
  std::string format;
  bool repair = false;
};

int RunRulesScan(const RulesArgs& a) {
  Corpus c = Load(a.in, FormatOf(a.format, a.repair));
  RuleSet rules = RulesFrom(a.only);
  auto proposals = Scan(c, rules);
  WriteJsonLines(a.out, proposals);
  std::cerr << proposals.size() << " proposals written to " << a.out << '\n';
  if (!a.review_out.empty()) {
    auto review = ScanReviewCandidates(c, rules);
    WriteJsonLines(a.review_out, review);
    std::cerr << review.size() << " review candidates written to " << a.review_out << '\n';
  }
  return 0;
}

std::set<std::string> ReviewIds(const std::string& path) {
  std::set<std::string> ids;
  if (path.empty()) return ids;
  for (const Candidate& c : ReadJsonLines<Candidate>(path)) ids.insert(c.id);
  return ids;
}

int RunRulesApply(const RulesArgs& a) {
  ColumnFormat f = FormatOf(a.format, a.repair);
  Corpus c = Load(a.in, f);
  auto proposals = ReadJsonLines<EditProposal>(a.proposals);
  auto log = DecisionLog(a.log).Load();
  ReplayResult r = Replay(c, log, proposals, ReviewIds(a.candidates));
  WriteCorpusFile(r.corpus, a.out, f);
  DiffReport report = DiffCorpora(c, r.corpus);
  if (!a.report.empty()) WriteJsonFile(a.report, Json(report));
  std::cerr << "applied " << r.report.applied << ", skipped " << r.report.skipped << ", rejected "
            << r.report.rejected << ", ambiguous " << r.report.ambiguous << '\n';
  for (const SkippedEdit& s : r.report.skipped_edits) {
    std::cerr << "skipped " << s.proposal_id << ": " << s.reason << '\n';
  }
  return 0;
}

std::string Highlight(const Sentence& s, const Mention& m) {
  std::string out;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    if (i) out += ' ';
    if (i == m.start) out += "[[";
    out += s.tokens[i].text;
    if (i + 1 == m.end) out += "]]";
  }
  return out;
}

// Terminal review loop over pending proposals. Same log format as the
// service, so the two can be mixed.
int RunRulesInteractive(const RulesArgs& a) {
  ColumnFormat f = FormatOf(a.format, a.repair);
  Corpus c = Load(a.in, f);
  std::vector<EditProposal> proposals =
      a.proposals.empty() ? Scan(c, RulesFrom(a.only)) : ReadJsonLines<EditProposal>(a.proposals);
  DecisionLog log(a.log);
  auto decided = EffectiveDecisions(log.Load());
  SentenceIndex index(c);

  std::size_t pending = 0;
  for (const EditProposal& p : proposals) pending += decided.count(p.id) ? 0 : 1;
  std::cout << pending << " pending proposals. a=accept r=reject ?=ambiguous s=skip q=quit\n";
  for (const EditProposal& p : proposals) {
    if (decided.count(p.id)) continue;
    std::size_t pos = index.Find(p.target.doc_id, p.target.sent_index);
    if (pos == SentenceIndex::npos) continue;
    const Sentence& s = c.sentences[pos];
    Mention result;
    try {
      result = ResultSpan(p.target, p.operation);
    } catch (const EditError&) {
      continue;
    }
    std::cout << '\n' << p.target.doc_id << '#' << p.target.sent_index << "  " << p.rule_id << '\n'
              << "  " << Highlight(s, p.target) << "  (" << p.target.etype << ")\n"
              << "  -> " << p.operation.str() << ": "
              << (p.operation.kind == EditKind::kDelete ? std::string("(deleted)")
                                                        : JoinTokens(s, result.start, result.end))
              << "  (" << result.etype << ")\n> " << std::flush;
    std::string answer;
    if (!std::getline(std::cin, answer)) break;
    if (answer == "q") break;
    Decision d;
    d.proposal_id = p.id;
    if (answer == "a") {
      d.verdict = Verdict::kAccept;
    } else if (answer == "r") {
      d.verdict = Verdict::kReject;
    } else if (answer == "?") {
      d.verdict = Verdict::kAmbiguous;
    } else {
      continue;
    }
    d.actor = a.actor;
    d.timestamp = UtcTimestamp();
    log.Append(d);
  }
  return 0;
}

// --- diff -----------------------------------------------------------------

struct DiffArgs {
  std::string old_path;
  std::string new_path;
  std::string out;
  bool table = false;
  std::string format;
  bool repair = false;
};

int RunDiff(const DiffArgs& a) {
  ColumnFormat f = FormatOf(a.format, a.repair);
  DiffReport r = DiffCorpora(Load(a.old_path, f), Load(a.new_path, f));
  if (!a.out.empty()) WriteJsonFile(a.out, Json(r));
  if (a.table) std::cout << RenderDiffTables(r);
  if (a.out.empty() && !a.table) std::cout << Json(r).dump(2) << '\n';
  return 0;
}

// --- score ----------------------------------------------------------------

struct ScoreArgs {
  std::string gold;
  std::string pred;
  std::string out;
  std::string format;
  bool repair = false;
};

int RunScore(const ScoreArgs& a) {
  ColumnFormat f = FormatOf(a.format, a.repair);
  ScoreReport r = Score(Load(a.gold, f), Load(a.pred, f));
  if (!a.out.empty()) WriteJsonFile(a.out, Json(r));
  std::cout << "precision " << RoundHalfUp(r.overall.precision()) << "  recall "
            << RoundHalfUp(r.overall.recall()) << "  f1 " << RoundHalfUp(r.overall.f1()) << '\n';
  return 0;
}

struct CompareArgs {
  std::string old_path;
  std::string new_path;
  std::optional<double> old_f1;
  std::optional<double> new_f1;
  bool per_type = false;
  std::string out;
};

int RunCompare(const CompareArgs& a) {
  std::vector<DeltaReport> rows;
  if (a.old_f1 || a.new_f1) {
    if (!a.old_f1 || !a.new_f1) throw CLI::ValidationError("--old-f1 and --new-f1 go together");
    rows.push_back(Compare(*a.old_f1, *a.new_f1));
  } else {
    if (a.old_path.empty() || a.new_path.empty()) {
      throw CLI::ValidationError("need --old and --new score files, or --old-f1 and --new-f1");
    }
    ScoreReport o = ReadJsonFile(a.old_path).get<ScoreReport>();
    ScoreReport n = ReadJsonFile(a.new_path).get<ScoreReport>();
    rows.push_back(CompareOverall(o, n));
    if (a.per_type) {
      for (DeltaReport& d : ComparePerType(o, n)) rows.push_back(std::move(d));
    }
  }
  std::cout << RenderDeltaTable(rows);
  if (!a.out.empty()) WriteJsonFile(a.out, Json(rows));
  return 0;
}

// --- serve ----------------------------------------------------------------

int RunServe(ServiceConfig config, const std::string& format, bool repair) {
  config.format = FormatOf(format, repair);
  ReviewSession session(config);
  ReviewServer server(session);
  int port = server.Bind();
  std::cerr << "serving on http://" << config.host << ':' << port << "/api/v1" << std::endl;
  // Signals are blocked everywhere (worker threads inherit the mask) and
  // taken synchronously by one watcher; SIGUSR1 releases it on exit.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  sigaddset(&set, SIGUSR1);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::thread watcher([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.Stop();
  });
  server.Listen();
  pthread_kill(watcher.native_handle(), SIGUSR1);
  watcher.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Find and fix annotation errors in BIO-tagged NER corpora"};
  app.require_subcommand(1);
  int rc = 0;

  auto add_format = [](CLI::App* cmd, std::string& format, bool& repair) {
    cmd->add_option("--format", format,
                    "column layout, e.g. token=0,tag=last,sep=ws,mode=strict");
    cmd->add_flag("--repair", repair, "repair BIO violations instead of failing");
  };

  ParseCheckArgs pc;
  auto* parse_check = app.add_subcommand("parse-check", "report BIO violations as JSON lines");
  parse_check->add_option("file", pc.file, "corpus file")->required();
  add_format(parse_check, pc.format, pc.repair);
  parse_check->callback([&] { rc = RunParseCheck(pc); });

  DetectArgs det;
  auto* detect = app.add_subcommand("detect", "flag mentions whose tokens diverge from a reference");
  detect->add_option("--train", det.train, "reference partition")->required();
  auto* target_opt = detect->add_option("--target", det.target, "partition to flag");
  auto* cv_opt = detect->add_option("--cv", det.cv, "flag the reference itself with k folds");
  target_opt->excludes(cv_opt);
  detect->add_option("--seed", det.seed, "fold assignment seed");
  detect->add_option("--out", det.out, "candidates.jsonl")->required();
  add_format(detect, det.format, det.repair);
  detect->callback([&] {
    if (det.target.empty() && det.cv == 0) throw CLI::ValidationError("need --target or --cv");
    rc = RunDetect(det);
  });

  PairsArgs pa;
  auto* pairs = app.add_subcommand("pairs", "count (surface, type) mention pairs");
  pairs->add_option("--in", pa.in, "corpus file")->required();
  pairs->add_option("--types", pa.types, "comma-separated type filter");
  pairs->add_option("--top", pa.top, "keep the n most frequent pairs");
  pairs->add_option("--out", pa.out, "TSV output (default stdout)");
  pairs->add_option("--candidates", pa.candidates, "also write review candidates");
  add_format(pairs, pa.format, pa.repair);
  pairs->callback([&] { rc = RunPairs(pa); });

  RulesArgs ra;
  auto* rules = app.add_subcommand("rules", "span-correction rules");
  rules->require_subcommand(1);
  auto* scan = rules->add_subcommand("scan", "propose edits");
  scan->add_option("--in", ra.in, "corpus file")->required();
  scan->add_option("--out", ra.out, "proposals.jsonl")->required();
  scan->add_option("--review-out", ra.review_out, "review-only candidates.jsonl");
  scan->add_option("--rules", ra.only, "comma-separated rule ids to enable");
  add_format(scan, ra.format, ra.repair);
  scan->callback([&] { rc = RunRulesScan(ra); });

  auto* apply = rules->add_subcommand("apply", "replay a decision log");
  apply->add_option("--in", ra.in, "original corpus")->required();
  apply->add_option("--proposals", ra.proposals, "proposals.jsonl")->required();
  apply->add_option("--candidates", ra.candidates, "candidates.jsonl with review ids");
  apply->add_option("--log", ra.log, "decisions.jsonl")->required();
  apply->add_option("--out", ra.out, "corrected corpus")->required();
  apply->add_option("--report", ra.report, "report.json");
  add_format(apply, ra.format, ra.repair);
  apply->callback([&] { rc = RunRulesApply(ra); });

  auto* interactive = rules->add_subcommand("interactive", "accept or reject proposals in the terminal");
  interactive->add_option("--in", ra.in, "corpus file")->required();
  interactive->add_option("--proposals", ra.proposals, "proposals.jsonl (default: scan now)");
  interactive->add_option("--rules", ra.only, "comma-separated rule ids to enable");
  interactive->add_option("--log", ra.log, "decisions.jsonl")->required();
  interactive->add_option("--actor", ra.actor, "name recorded with each decision");
  add_format(interactive, ra.format, ra.repair);
  interactive->callback([&] { rc = RunRulesInteractive(ra); });

  DiffArgs da;
  auto* diff = app.add_subcommand("diff", "compare two versions of a corpus");
  diff->add_option("--old", da.old_path, "old version")->required();
  diff->add_option("--new", da.new_path, "new version")->required();
  diff->add_option("--out", da.out, "report.json");
  diff->add_flag("--table", da.table, "print correction statistics tables");
  add_format(diff, da.format, da.repair);
  diff->callback([&] { rc = RunDiff(da); });

  ScoreArgs sa;
  CompareArgs ca;
  auto* score = app.add_subcommand("score", "exact-match span F1");
  score->add_option("--gold", sa.gold, "gold corpus");
  score->add_option("--pred", sa.pred, "predicted corpus");
  score->add_option("--out", sa.out, "score.json");
  add_format(score, sa.format, sa.repair);
  auto* compare = score->add_subcommand("compare", "F1 delta and error reduction");
  compare->add_option("--old", ca.old_path, "score.json before correction");
  compare->add_option("--new", ca.new_path, "score.json after correction");
  compare->add_option("--old-f1", ca.old_f1, "raw old F1 (percent)");
  compare->add_option("--new-f1", ca.new_f1, "raw new F1 (percent)");
  compare->add_flag("--per-type", ca.per_type, "add one row per entity type");
  compare->add_option("--out", ca.out, "JSON output");
  compare->callback([&] { rc = RunCompare(ca); });
  score->callback([&] {
    if (compare->parsed()) return;
    if (sa.gold.empty() || sa.pred.empty()) throw CLI::ValidationError("score needs --gold and --pred");
    rc = RunScore(sa);
  });

  ServiceConfig sc;
  std::string serve_format;
  bool serve_repair = false;
  auto* serve = app.add_subcommand("serve", "run the local review service");
  serve->add_option("--corpus", sc.corpus_path, "original corpus")->required();
  serve->add_option("--candidates", sc.candidates_path, "candidates.jsonl");
  serve->add_option("--proposals", sc.proposals_path, "proposals.jsonl");
  serve->add_option("--log", sc.log_path, "decisions.jsonl")->required();
  serve->add_option("--port", sc.port, "port (0 picks a free one)");
  serve->add_option("--host", sc.host, "bind address");
  serve->add_option("--actor", sc.actor, "default reviewer name");
  serve->add_option("--out-dir", sc.export_dir, "export directory");
  serve->add_option("--static", sc.static_dir, "directory of built UI assets");
  add_format(serve, serve_format, serve_repair);
  serve->callback([&] { rc = RunServe(sc, serve_format, serve_repair); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ViolationError& e) {
    for (const Violation& v : e.violations()) std::cerr << Json(v).dump() << '\n';
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return rc;
}
