// Exact-match span-level NER scoring and score comparison.

#ifndef NERSCRUB_SCORER_H_
#define NERSCRUB_SCORER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nerscrub/corpus.h"

namespace nerscrub {

// Counts plus derived rates, all rates in percent.
struct PrfCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;

  PrfCounts& operator+=(const PrfCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const PrfCounts&, const PrfCounts&) = default;
};

struct ScoreReport {
  std::map<std::string, PrfCounts> per_type;  // types seen in gold or pred
  PrfCounts overall;

  // overall == sum of per_type
  bool micro_consistent() const;
};

class ScoreError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A predicted mention is a true positive iff gold has a mention with the same
// sentence, start, end and type. Throws ScoreError if the corpora differ in
// sentence count or token texts.
ScoreReport Score(const Corpus& gold, const Corpus& pred);

struct DeltaReport {
  std::string label;  // "overall" or the entity type
  std::optional<double> old_f1;
  std::optional<double> new_f1;
  std::optional<double> delta;          // new - old
  std::optional<double> err_reduction;  // 100 * delta / (100 - old); n/a at old == 100
};

// Relative error reduction of moving from `old_f1` to `new_f1` (percent
// scores in [0, 100]).
DeltaReport Compare(double old_f1, double new_f1, std::string label = "overall");
DeltaReport CompareOverall(const ScoreReport& old_r, const ScoreReport& new_r);
// One entry per type present in either report; a type missing on one side
// leaves that side and the derived fields empty.
std::vector<DeltaReport> ComparePerType(const ScoreReport& old_r, const ScoreReport& new_r);

// Rounds half away from zero at `digits` decimals, tolerating binary
// representation error (1.005 rounds to 1.01).
double RoundHalfUp(double value, int digits = 2);

// Text table: label, old F1, new F1, delta, error reduction.
std::string RenderDeltaTable(const std::vector<DeltaReport>& rows);

}  // namespace nerscrub

#endif  // NERSCRUB_SCORER_H_
