#include "nerscrub/decisions.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iterator>
#include <map>
#include <tuple>

#include "nerscrub/json_io.h"

namespace nerscrub {

const char* ToString(Verdict v) {
  switch (v) {
    case Verdict::kAccept:
      return "accept";
    case Verdict::kReject:
      return "reject";
    case Verdict::kAmbiguous:
      return "ambiguous";
    case Verdict::kModify:
      return "modify";
  }
  return "unknown";
}

std::optional<Verdict> ParseVerdict(const std::string& s) {
  for (auto v : {Verdict::kAccept, Verdict::kReject, Verdict::kAmbiguous, Verdict::kModify}) {
    if (s == ToString(v)) return v;
  }
  return std::nullopt;
}

std::string UtcTimestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::map<std::string, Decision> EffectiveDecisions(const std::vector<Decision>& log) {
  std::map<std::string, Decision> out;
  for (const Decision& d : log) out.insert_or_assign(d.proposal_id, d);
  return out;
}

DecisionLog::DecisionLog(std::string path) : path_(std::move(path)) {}

std::vector<Decision> DecisionLog::Load() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::ifstream in(path_, std::ios::binary);
  if (!in) return {};  // a missing log is an empty log
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::vector<Decision> out;
  std::size_t pos = 0;
  std::size_t lineno = 0;
  while (pos < data.size()) {
    std::size_t nl = data.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    std::string line = data.substr(pos, terminated ? nl - pos : std::string::npos);
    pos = terminated ? nl + 1 : data.size();
    ++lineno;
    if (!terminated) break;  // torn final write, never acknowledged
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line).get<Decision>());
    } catch (const Json::exception& e) {
      throw LogError(path_ + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

namespace {

// Length of the file up to and including its last newline, or -1 when the
// file already ends with one (or is empty).
off_t CompleteLength(int fd) {
  off_t size = ::lseek(fd, 0, SEEK_END);
  if (size <= 0) return -1;
  char buf[4096];
  off_t end = size;
  bool tail = true;
  while (end > 0) {
    off_t begin = end > static_cast<off_t>(sizeof(buf)) ? end - static_cast<off_t>(sizeof(buf)) : 0;
    ssize_t n = ::pread(fd, buf, static_cast<std::size_t>(end - begin), begin);
    if (n <= 0) return -1;
    for (ssize_t i = n - 1; i >= 0; --i) {
      if (buf[i] == '\n') return tail ? -1 : begin + i + 1;
      tail = false;
    }
    end = begin;
  }
  return 0;
}

}  // namespace

void DecisionLog::Append(const Decision& d) {
  std::string line = Json(d).dump();
  line += '\n';
  std::lock_guard<std::mutex> lock(mu_);
  int fd = ::open(path_.c_str(), O_RDWR | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot open '" + path_ + "': " + std::strerror(errno));
  // A torn final write was never acknowledged: drop it so the new line
  // starts clean.
  if (off_t keep = CompleteLength(fd); keep >= 0 && ::ftruncate(fd, keep) != 0) {
    int err = errno;
    ::close(fd);
    throw IoError("cannot trim torn tail of '" + path_ + "': " + std::strerror(err));
  }
  std::size_t written = 0;
  while (written < line.size()) {
    ssize_t n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      int err = errno;
      ::close(fd);
      throw IoError("write to '" + path_ + "' failed: " + std::strerror(err));
    }
    written += static_cast<std::size_t>(n);
  }
  ::fdatasync(fd);
  ::close(fd);
}

ReplayResult Replay(const Corpus& c, const std::vector<Decision>& log,
                    const std::vector<EditProposal>& proposals,
                    const std::set<std::string>& review_ids) {
  std::map<std::string, const EditProposal*> by_id;
  for (const EditProposal& p : proposals) by_id.emplace(p.id, &p);

  struct Pending {
    std::string decision_id;
    std::string rule_id;
    EditProposal edit;
  };
  std::vector<Pending> edits;
  ReplayReport report;

  for (const auto& [id, d] : EffectiveDecisions(log)) {
    auto it = by_id.find(id);
    const EditProposal* proposal = it == by_id.end() ? nullptr : it->second;
    if (proposal == nullptr && review_ids.count(id) == 0) {
      throw ReplayError("decision references unknown proposal id '" + id + "'");
    }
    switch (d.verdict) {
      case Verdict::kReject:
        ++report.rejected;
        break;
      case Verdict::kAmbiguous:
        ++report.ambiguous;
        break;
      case Verdict::kAccept:
        if (proposal != nullptr) {
          edits.push_back({id, proposal->rule_id, *proposal});
        } else {
          ++report.acknowledged;
        }
        break;
      case Verdict::kModify: {
        if (!d.replacement) throw ReplayError("modify decision for '" + id + "' has no replacement");
        const Mention& t = d.replacement->target;
        if (proposal != nullptr) {
          const Mention& orig = proposal->target;
          if (std::tie(t.doc_id, t.sent_index, t.start, t.end, t.etype) !=
              std::tie(orig.doc_id, orig.sent_index, orig.start, orig.end, orig.etype)) {
            ++report.skipped;
            report.skipped_edits.push_back({id, "replacement targets a different mention"});
            break;
          }
        }
        edits.push_back({id, proposal ? proposal->rule_id : d.replacement->rule_id, *d.replacement});
        break;
      }
    }
  }

  std::stable_sort(edits.begin(), edits.end(), [](const Pending& a, const Pending& b) {
    const Mention& x = a.edit.target;
    const Mention& y = b.edit.target;
    return std::tie(x.doc_id, x.sent_index, x.start, a.rule_id, a.decision_id) <
           std::tie(y.doc_id, y.sent_index, y.start, b.rule_id, b.decision_id);
  });

  // An edit can fail only because an earlier edit in the same pass had not
  // yet cleared its way (a grow into a mention deleted later). Retrying the
  // leftovers until nothing changes makes the result a fixpoint, so replaying
  // the log over its own output applies nothing.
  ReplayResult result{c, {}};
  if (!edits.empty()) {
    SentenceIndex index(result.corpus);
    std::vector<std::string> reasons(edits.size());
    std::vector<bool> done(edits.size(), false);
    for (bool progress = true; progress;) {
      progress = false;
      for (std::size_t i = 0; i < edits.size(); ++i) {
        if (done[i]) continue;
        const Pending& p = edits[i];
        std::size_t pos = index.Find(p.edit.target.doc_id, p.edit.target.sent_index);
        if (pos == SentenceIndex::npos) {
          reasons[i] = "sentence not found";
          continue;
        }
        try {
          ApplyEditToSentence(result.corpus.sentences[pos], p.edit);
          done[i] = true;
          progress = true;
          ++report.applied;
          report.applied_ids.push_back(p.decision_id);
        } catch (const EditError& e) {
          reasons[i] = e.what();
        }
      }
    }
    for (std::size_t i = 0; i < edits.size(); ++i) {
      if (done[i]) continue;
      ++report.skipped;
      report.skipped_edits.push_back({edits[i].decision_id, reasons[i]});
    }
  }
  result.report = std::move(report);
  return result;
}

}  // namespace nerscrub
