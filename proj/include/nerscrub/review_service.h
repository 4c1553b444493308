// Local HTTP review service.
//
// A ReviewSession owns the original corpus, the review items (detector
// candidates plus rule proposals) and the decision log. The working corpus
// is always Replay(original, log); every state change goes through the log
// first, so restarting from the same files reproduces the same state.
//
// ReviewServer exposes a session under /api/v1 (JSON over HTTP).

#ifndef NERSCRUB_REVIEW_SERVICE_H_
#define NERSCRUB_REVIEW_SERVICE_H_

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "nerscrub/corpus.h"
#include "nerscrub/corpus_io.h"
#include "nerscrub/decisions.h"
#include "nerscrub/detector.h"
#include "nerscrub/diff.h"
#include "nerscrub/edit.h"
#include "nerscrub/json_io.h"

namespace httplib {
class Server;
}

namespace nerscrub {

struct ServiceConfig {
  std::string corpus_path;
  ColumnFormat format;
  std::string candidates_path;  // optional
  std::string proposals_path;   // optional
  std::string log_path;
  std::string export_dir = ".";
  std::string actor = "reviewer";
  std::string static_dir;  // built UI assets, optional
  std::string host = "127.0.0.1";
  int port = 8080;
};

// HTTP-flavoured failures raised by session operations.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

struct CandidateQuery {
  std::optional<CandidateStatus> status;
  std::optional<CandidateSource> source;
  std::string rule;
  std::size_t offset = 0;
  std::size_t limit = 50;
};

class ReviewSession {
 public:
  // Loads every input and replays the log. Throws IoError, ViolationError or
  // ReplayError when the inputs are unusable.
  explicit ReviewSession(ServiceConfig config);

  Json ListCandidates(const CandidateQuery& q) const;
  Json GetCandidate(const std::string& id) const;
  // Body: {verdict, replacement?, actor?}. Appends exactly one log line.
  Json Decide(const std::string& id, const Json& body);
  Json ListProposals(const std::string& rule, std::optional<CandidateStatus> status) const;
  Json Stats() const;
  Json Export() const;
  Json GetSentence(const std::string& doc_id, std::size_t sent_index, std::size_t window) const;

  const ServiceConfig& config() const { return config_; }
  Corpus working_corpus() const;

 private:
  struct Item {
    Candidate candidate;
    std::optional<EditProposal> proposal;
    std::string rule;  // producing rule, empty for detector candidates
  };

  void Rebuild();  // caller holds the write lock
  CandidateStatus StatusOf(const std::string& id) const;
  Json ItemJson(const Item& item) const;
  Json SentenceJson(const Sentence& s) const;
  const Item& FindItem(const std::string& id) const;
  void ValidateReplacement(const Item& item, const EditProposal& r) const;

  ServiceConfig config_;
  Corpus original_;
  SentenceIndex index_;  // positions are shared by original_ and working_
  std::vector<EditProposal> proposals_;
  std::vector<Item> items_;  // display order
  std::map<std::string, std::size_t> item_index_;
  std::set<std::string> review_ids_;
  DecisionLog log_;

  mutable std::mutex export_mu_;
  mutable std::shared_mutex mu_;
  std::vector<Decision> decisions_;
  std::map<std::string, Decision> effective_;
  Corpus working_;
  ReplayReport replay_report_;
  DiffReport diff_;
};

class ReviewServer {
 public:
  explicit ReviewServer(ReviewSession& session);
  ~ReviewServer();

  // Binds the configured host/port (port 0 picks a free one) and returns the
  // bound port. Throws ServiceError if the port is taken.
  int Bind();
  // Blocks until Stop(). Returns at once if Stop() came first.
  void Listen();
  // Safe from any thread, before, during or after Listen().
  void Stop();

 private:
  void Routes();

  ReviewSession& session_;
  std::unique_ptr<httplib::Server> server_;
  std::mutex state_mu_;
  bool stopped_ = false;
  bool listening_ = false;
  std::atomic<bool> finished_{false};
};

}  // namespace nerscrub

#endif  // NERSCRUB_REVIEW_SERVICE_H_
