// Column-format reader and writer.

#ifndef NERSCRUB_CORPUS_IO_H_
#define NERSCRUB_CORPUS_IO_H_

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nerscrub/corpus.h"

namespace nerscrub {

enum class Strictness { kStrict, kRepair };

struct ColumnFormat {
  // Column indices; negative values count from the end (-1 = last column).
  int token_column = 0;
  int tag_column = -1;
  // nullopt splits on runs of spaces/tabs.
  std::optional<char> separator;
  Strictness mode = Strictness::kStrict;
  // Separator written between token and tag for lines without a recorded
  // layout.
  std::string output_separator = " ";

  // Parses "token=0,tag=last,sep=ws|tab|space|<char>,mode=strict|repair".
  // Keys may be omitted; throws std::invalid_argument on bad input.
  static ColumnFormat FromString(std::string_view spec);
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParseResult {
  Corpus corpus;
  std::vector<Violation> violations;  // repaired ones, in repair mode
};

// Blank lines delimit sentences; a "#" line at a sentence boundary opens a
// new document. Strict mode throws ViolationError carrying every violation;
// repair mode rewrites stray I- tags to B- and malformed tags to O.
ParseResult ParseCorpus(std::istream& in, const ColumnFormat& fmt = {});
ParseResult ParseCorpusString(std::string_view text, const ColumnFormat& fmt = {});
ParseResult ReadCorpusFile(const std::string& path, const ColumnFormat& fmt = {});

void SerializeCorpus(const Corpus& c, std::ostream& out, const ColumnFormat& fmt = {});
std::string SerializeCorpusString(const Corpus& c, const ColumnFormat& fmt = {});
void WriteCorpusFile(const Corpus& c, const std::string& path, const ColumnFormat& fmt = {});

// Strips trailing whitespace on every line, collapses blank-line runs and
// drops leading/trailing blank lines. serialize(parse(x)) equals x under this
// normalization.
std::string NormalizeTrailingWhitespace(std::string_view text);

}  // namespace nerscrub

#endif  // NERSCRUB_CORPUS_IO_H_
