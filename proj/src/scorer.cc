#include "nerscrub/scorer.h"

#include <fmt/format.h>

#include <cmath>
#include <set>

namespace nerscrub {

double PrfCounts::precision() const {
  return tp + fp == 0 ? 0.0 : 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double PrfCounts::recall() const {
  return tp + fn == 0 ? 0.0 : 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double PrfCounts::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

bool ScoreReport::micro_consistent() const {
  PrfCounts sum;
  for (const auto& [type, c] : per_type) sum += c;
  return sum == overall;
}

ScoreReport Score(const Corpus& gold, const Corpus& pred) {
  if (gold.sentences.size() != pred.sentences.size()) {
    throw ScoreError("gold has " + std::to_string(gold.sentences.size()) +
                     " sentences, prediction has " + std::to_string(pred.sentences.size()));
  }
  ScoreReport r;
  for (std::size_t i = 0; i < gold.sentences.size(); ++i) {
    const Sentence& g = gold.sentences[i];
    const Sentence& p = pred.sentences[i];
    bool same = g.tokens.size() == p.tokens.size();
    for (std::size_t k = 0; same && k < g.tokens.size(); ++k) {
      same = g.tokens[k].text == p.tokens[k].text;
    }
    if (!same) {
      throw ScoreError("token mismatch between gold and prediction in sentence " + g.doc_id +
                       "#" + std::to_string(g.sent_index));
    }
    // Mentions are sorted by start and non-overlapping, so a merge walk
    // finds every exact match.
    auto gm = ExtractMentions(g);
    auto pm = ExtractMentions(p);
    std::size_t a = 0, b = 0;
    while (a < gm.size() || b < pm.size()) {
      if (b == pm.size() || (a < gm.size() && gm[a].start < pm[b].start)) {
        ++r.per_type[gm[a++].etype].fn;
      } else if (a == gm.size() || pm[b].start < gm[a].start) {
        ++r.per_type[pm[b++].etype].fp;
      } else {
        if (gm[a].end == pm[b].end && gm[a].etype == pm[b].etype) {
          ++r.per_type[gm[a].etype].tp;
        } else {
          ++r.per_type[gm[a].etype].fn;
          ++r.per_type[pm[b].etype].fp;
        }
        ++a;
        ++b;
      }
    }
  }
  for (const auto& [type, c] : r.per_type) r.overall += c;
  return r;
}

DeltaReport Compare(double old_f1, double new_f1, std::string label) {
  DeltaReport d;
  d.label = std::move(label);
  d.old_f1 = old_f1;
  d.new_f1 = new_f1;
  d.delta = new_f1 - old_f1;
  if (old_f1 < 100.0) d.err_reduction = 100.0 * *d.delta / (100.0 - old_f1);
  return d;
}

DeltaReport CompareOverall(const ScoreReport& old_r, const ScoreReport& new_r) {
  return Compare(old_r.overall.f1(), new_r.overall.f1(), "overall");
}

std::vector<DeltaReport> ComparePerType(const ScoreReport& old_r, const ScoreReport& new_r) {
  std::set<std::string> types;
  for (const auto& [t, c] : old_r.per_type) types.insert(t);
  for (const auto& [t, c] : new_r.per_type) types.insert(t);
  std::vector<DeltaReport> out;
  for (const std::string& t : types) {
    auto o = old_r.per_type.find(t);
    auto n = new_r.per_type.find(t);
    if (o != old_r.per_type.end() && n != new_r.per_type.end()) {
      out.push_back(Compare(o->second.f1(), n->second.f1(), t));
      continue;
    }
    DeltaReport d;
    d.label = t;
    if (o != old_r.per_type.end()) d.old_f1 = o->second.f1();
    if (n != new_r.per_type.end()) d.new_f1 = n->second.f1();
    out.push_back(std::move(d));
  }
  return out;
}

double RoundHalfUp(double value, int digits) {
  const double scale = std::pow(10.0, digits);
  const double scaled = std::abs(value) * scale;
  // Nudge by a few ulps so ties stored just below .5 still round up.
  const double rounded = std::floor(scaled + 0.5 + scaled * 1e-12);
  if (rounded == 0.0) return 0.0;
  return std::copysign(rounded / scale, value);
}

std::string RenderDeltaTable(const std::vector<DeltaReport>& rows) {
  auto num = [](const std::optional<double>& v, const char* suffix = "") {
    return v ? fmt::format("{:.2f}{}", RoundHalfUp(*v), suffix) : std::string("n/a");
  };
  std::string out;
  const std::string rule = fmt::format("+{:-<16}+{:-<10}+{:-<10}+{:-<10}+{:-<12}+\n", "", "", "", "", "");
  out += rule;
  out += fmt::format("| {:<14} | {:>8} | {:>8} | {:>8} | {:>10} |\n", "Label", "Old F1", "New F1",
                     "Delta", "Err. red.");
  out += rule;
  for (const DeltaReport& d : rows) {
    out += fmt::format("| {:<14} | {:>8} | {:>8} | {:>8} | {:>10} |\n", d.label, num(d.old_f1),
                       num(d.new_f1), num(d.delta), num(d.err_reduction, "%"));
  }
  out += rule;
  return out;
}

}  // namespace nerscrub
