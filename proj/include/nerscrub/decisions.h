// Reviewer verdicts, the append-only decision log, and deterministic replay.

#ifndef NERSCRUB_DECISIONS_H_
#define NERSCRUB_DECISIONS_H_

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nerscrub/corpus.h"
#include "nerscrub/edit.h"

namespace nerscrub {

enum class Verdict { kAccept, kReject, kAmbiguous, kModify };

const char* ToString(Verdict v);
std::optional<Verdict> ParseVerdict(const std::string& s);

struct Decision {
  std::string proposal_id;
  Verdict verdict = Verdict::kAccept;
  std::optional<EditProposal> replacement;  // set iff verdict == kModify
  std::string actor;
  std::string timestamp;  // ISO-8601 UTC

  friend bool operator==(const Decision&, const Decision&) = default;
};

// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string UtcTimestamp();

// Last decision per id wins; earlier lines stay in the log.
std::map<std::string, Decision> EffectiveDecisions(const std::vector<Decision>& log);

class LogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON-lines decision log. Appends are serialized, use O_APPEND and are
// synced before returning, so concurrent writers never interleave and a
// returned Append is durable. A line counts only once its newline is on disk.
class DecisionLog {
 public:
  explicit DecisionLog(std::string path);

  // Reads every decision. A final line without a trailing newline is a torn
  // write and is ignored (the next Append discards it); any other bad line is
  // a LogError.
  std::vector<Decision> Load() const;
  void Append(const Decision& d);

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  mutable std::mutex mu_;
};

struct SkippedEdit {
  std::string proposal_id;
  std::string reason;
};

struct ReplayReport {
  std::size_t applied = 0;
  std::size_t skipped = 0;  // stale target or edit no longer valid
  std::size_t rejected = 0;
  std::size_t ambiguous = 0;
  std::size_t acknowledged = 0;  // accepts on review-only ids, no edit attached
  std::vector<std::string> applied_ids;
  std::vector<SkippedEdit> skipped_edits;
};

struct ReplayResult {
  Corpus corpus;
  ReplayReport report;
};

class ReplayError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Applies the effective accept/modify decisions in scan order. A decision
// must reference a proposal id or one of `review_ids` (ids of review-only
// candidates: accept on those carries no edit, modify applies its
// replacement); any other id is a ReplayError. Edits that fail are retried
// until a pass applies nothing; whatever still fails (stale or invalid) is
// skipped and reported, so Replay over its own output applies nothing. A modify replacement for a proposal must target the
// same mention as the proposal.
ReplayResult Replay(const Corpus& c, const std::vector<Decision>& log,
                    const std::vector<EditProposal>& proposals,
                    const std::set<std::string>& review_ids = {});

}  // namespace nerscrub

#endif  // NERSCRUB_DECISIONS_H_
