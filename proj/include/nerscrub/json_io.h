// JSON encodings of the record types exchanged through files and HTTP.

#ifndef NERSCRUB_JSON_IO_H_
#define NERSCRUB_JSON_IO_H_

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nerscrub/corpus.h"
#include "nerscrub/corpus_io.h"
#include "nerscrub/decisions.h"
#include "nerscrub/detector.h"
#include "nerscrub/diff.h"
#include "nerscrub/edit.h"
#include "nerscrub/scorer.h"

namespace nerscrub {

using Json = nlohmann::ordered_json;

void to_json(Json& j, const Mention& m);
void from_json(const Json& j, Mention& m);
void to_json(Json& j, const EditOperation& op);
void from_json(const Json& j, EditOperation& op);
void to_json(Json& j, const EditProposal& p);
void from_json(const Json& j, EditProposal& p);
void to_json(Json& j, const Decision& d);
void from_json(const Json& j, Decision& d);
void to_json(Json& j, const Candidate& c);
void from_json(const Json& j, Candidate& c);
void to_json(Json& j, const Violation& v);
void to_json(Json& j, const MentionLocation& l);
void from_json(const Json& j, MentionLocation& l);
void to_json(Json& j, const DiffReport& r);
void to_json(Json& j, const PrfCounts& c);
void from_json(const Json& j, PrfCounts& c);
void to_json(Json& j, const ScoreReport& r);
void from_json(const Json& j, ScoreReport& r);
void to_json(Json& j, const DeltaReport& d);

// One JSON value per line.
template <typename T>
void WriteJsonLines(const std::string& path, const std::vector<T>& items) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (const T& item : items) out << Json(item).dump() << '\n';
  if (!out.flush()) throw IoError("write to '" + path + "' failed");
}

template <typename T>
std::vector<T> ReadJsonLines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line).get<T>());
    } catch (const Json::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

Json ReadJsonFile(const std::string& path);
void WriteJsonFile(const std::string& path, const Json& j);

}  // namespace nerscrub

#endif  // NERSCRUB_JSON_IO_H_
