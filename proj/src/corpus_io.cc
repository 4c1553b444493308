#include "nerscrub/corpus_io.h"

#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

namespace nerscrub {
namespace {

bool IsBlankChar(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::string_view RightTrim(std::string_view s) {
  while (!s.empty() && IsBlankChar(s.back())) s.remove_suffix(1);
  return s;
}

std::string_view Trim(std::string_view s) {
  s = RightTrim(s);
  while (!s.empty() && IsBlankChar(s.front())) s.remove_prefix(1);
  return s;
}

struct Field {
  std::size_t offset;
  std::size_t length;
};

std::vector<Field> SplitFields(std::string_view line, const std::optional<char>& sep) {
  std::vector<Field> fields;
  if (sep) {
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == *sep) {
        fields.push_back({start, i - start});
        start = i + 1;
      }
    }
    return fields;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i == line.size()) break;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    fields.push_back({start, i - start});
  }
  return fields;
}

// Resolves a possibly negative column index; -1 when out of range.
long Resolve(int column, std::size_t count) {
  long idx = column < 0 ? static_cast<long>(count) + column : column;
  return idx >= 0 && idx < static_cast<long>(count) ? idx : -1;
}

bool HasWhitespace(std::string_view s) {
  for (char c : s) {
    if (IsBlankChar(c) || c == '\n') return true;
  }
  return false;
}

class Reader {
 public:
  explicit Reader(const ColumnFormat& fmt) : fmt_(fmt) {}

  void Line(std::string_view raw) {
    std::string_view line = RightTrim(raw);
    if (Trim(line).empty()) {
      FlushSentence();
      return;
    }
    if (current_.tokens.empty() && line.front() == '#') {
      pending_blank_after_boundary_ = true;
      OpenDocument(line);
      return;
    }
    pending_blank_after_boundary_ = false;
    Token(line);
  }

  ParseResult Finish() {
    FlushSentence();
    if (fmt_.mode == Strictness::kStrict && !violations_.empty()) {
      throw ViolationError(std::move(violations_));
    }
    return {std::move(corpus_), std::move(violations_)};
  }

 private:
  void OpenDocument(std::string_view line) {
    std::string doc_id(Trim(line.substr(1)));
    corpus_.boundaries.push_back({corpus_.sentences.size(), doc_id, std::string(line)});
    doc_id_ = std::move(doc_id);
    auto it = next_index_.find(doc_id_);
    sent_index_ = it == next_index_.end() ? 0 : it->second;
  }

  void Token(std::string_view line) {
    const std::size_t token_index = current_.tokens.size();
    auto fields = SplitFields(line, fmt_.separator);
    long tok_col = Resolve(fmt_.token_column, fields.size());
    long tag_col = Resolve(fmt_.tag_column, fields.size());

    LabeledToken token;
    std::string problem;
    if (tok_col < 0 || fields[tok_col].length == 0) {
      problem = "missing token column";
    } else {
      token.text = std::string(line.substr(fields[tok_col].offset, fields[tok_col].length));
      if (HasWhitespace(token.text)) {
        problem = "token text contains whitespace";
        for (char& c : token.text) {
          if (IsBlankChar(c)) c = '_';
        }
      }
    }
    std::optional<Tag> tag;
    std::string_view tag_text;
    if (problem.empty()) {
      if (tag_col < 0 || tag_col == tok_col) {
        problem = "missing tag column";
      } else {
        tag_text = line.substr(fields[tag_col].offset, fields[tag_col].length);
        tag = Tag::Parse(tag_text);
        if (!tag) problem = "malformed tag '" + std::string(tag_text) + "'";
      }
    }

    if (!problem.empty()) {
      violations_.push_back({doc_id_, sent_index_, token_index, ViolationKind::kMalformedTag,
                             problem + " in line '" + std::string(line) + "'"});
      if (token.text.empty()) token.text = "_";
      token.tag = Tag::Outside();
      // A repaired line is rewritten in canonical form.
      current_.tokens.push_back(std::move(token));
      return;
    }

    token.tag = std::move(*tag);
    std::string canonical = token.text + fmt_.output_separator + std::string(tag_text);
    if (line != canonical) {
      std::size_t off = fields[tag_col].offset;
      token.layout = std::string(line.substr(0, off)) +
                     std::string(line.substr(off + fields[tag_col].length));
      token.tag_offset = static_cast<std::uint32_t>(off);
    }
    current_.tokens.push_back(std::move(token));
  }

  void FlushSentence() {
    if (current_.tokens.empty()) {
      if (pending_blank_after_boundary_ && !corpus_.boundaries.empty() &&
          corpus_.boundaries.back().first_sentence == corpus_.sentences.size()) {
        corpus_.boundaries.back().blank_after = true;
      }
      pending_blank_after_boundary_ = false;
      return;
    }
    current_.doc_id = doc_id_;
    current_.sent_index = sent_index_;
    for (Violation& v : RepairSentence(current_)) violations_.push_back(std::move(v));
    corpus_.sentences.push_back(std::move(current_));
    current_ = Sentence{};
    next_index_[doc_id_] = ++sent_index_;
  }

  const ColumnFormat& fmt_;
  Corpus corpus_;
  std::vector<Violation> violations_;
  Sentence current_;
  std::string doc_id_;
  std::size_t sent_index_ = 0;
  std::map<std::string, std::size_t> next_index_;
  bool pending_blank_after_boundary_ = false;
};

}  // namespace

ColumnFormat ColumnFormat::FromString(std::string_view spec) {
  ColumnFormat fmt;
  auto parse_col = [](std::string_view v) {
    if (v == "last") return -1;
    int out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
      throw std::invalid_argument("bad column index '" + std::string(v) + "'");
    }
    return out;
  };
  while (!spec.empty()) {
    std::size_t comma = spec.find(',');
    std::string_view item = Trim(spec.substr(0, comma));
    spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);
    if (item.empty()) continue;
    std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("format item '" + std::string(item) + "' is not key=value");
    }
    std::string_view key = item.substr(0, eq);
    std::string_view value = item.substr(eq + 1);
    if (key == "token") {
      fmt.token_column = parse_col(value);
    } else if (key == "tag") {
      fmt.tag_column = parse_col(value);
    } else if (key == "sep") {
      if (value == "ws") {
        fmt.separator.reset();
      } else if (value == "tab") {
        fmt.separator = '\t';
        fmt.output_separator = "\t";
      } else if (value == "space") {
        fmt.separator = ' ';
        fmt.output_separator = " ";
      } else if (value.size() == 1) {
        fmt.separator = value[0];
        fmt.output_separator = std::string(value);
      } else {
        throw std::invalid_argument("bad separator '" + std::string(value) + "'");
      }
    } else if (key == "out") {
      fmt.output_separator = value == "tab" ? "\t" : value == "space" ? " " : std::string(value);
    } else if (key == "mode") {
      if (value == "strict") {
        fmt.mode = Strictness::kStrict;
      } else if (value == "repair") {
        fmt.mode = Strictness::kRepair;
      } else {
        throw std::invalid_argument("bad mode '" + std::string(value) + "'");
      }
    } else {
      throw std::invalid_argument("unknown format key '" + std::string(key) + "'");
    }
  }
  return fmt;
}

ParseResult ParseCorpus(std::istream& in, const ColumnFormat& fmt) {
  if (!in) throw IoError("input stream is not readable");
  Reader reader(fmt);
  std::string line;
  while (std::getline(in, line)) reader.Line(line);
  if (in.bad()) throw IoError("read error on input stream");
  return reader.Finish();
}

ParseResult ParseCorpusString(std::string_view text, const ColumnFormat& fmt) {
  std::istringstream in{std::string(text)};
  return ParseCorpus(in, fmt);
}

ParseResult ReadCorpusFile(const std::string& path, const ColumnFormat& fmt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  ParseResult r = ParseCorpus(in, fmt);
  if (r.corpus.partition == "other") {
    // Whole words of the file name only; directories like tests/ don't count.
    const std::string name = std::filesystem::path(path).filename().string();
    std::set<std::string> words;
    std::string word;
    for (char ch : name + ".") {
      if (std::isalnum(static_cast<unsigned char>(ch))) {
        word += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      } else if (!word.empty()) {
        words.insert(std::exchange(word, ""));
      }
    }
    for (const char* p : {"train", "dev", "test"}) {
      if (words.count(p)) {
        r.corpus.partition = p;
        break;
      }
    }
  }
  return r;
}

void SerializeCorpus(const Corpus& c, std::ostream& out, const ColumnFormat& fmt) {
  std::size_t b = 0;
  std::string tag;
  for (std::size_t i = 0; i <= c.sentences.size(); ++i) {
    for (; b < c.boundaries.size() && c.boundaries[b].first_sentence == i; ++b) {
      const DocumentBoundary& db = c.boundaries[b];
      if (db.raw_line.empty()) {
        out << "# " << db.doc_id << '\n';
      } else {
        out << db.raw_line << '\n';
      }
      if (db.blank_after) out << '\n';
    }
    if (i == c.sentences.size()) break;
    for (const LabeledToken& t : c.sentences[i].tokens) {
      tag = t.tag.str();
      if (t.layout.empty()) {
        out << t.text << fmt.output_separator << tag << '\n';
      } else {
        std::string_view layout = t.layout;
        out << layout.substr(0, t.tag_offset) << tag << layout.substr(t.tag_offset) << '\n';
      }
    }
    out << '\n';
  }
}

std::string SerializeCorpusString(const Corpus& c, const ColumnFormat& fmt) {
  std::ostringstream out;
  SerializeCorpus(c, out, fmt);
  return std::move(out).str();
}

void WriteCorpusFile(const Corpus& c, const std::string& path, const ColumnFormat& fmt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  SerializeCorpus(c, out, fmt);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::string NormalizeTrailingWhitespace(std::string_view text) {
  std::string out;
  bool pending_blank = false;
  while (!text.empty()) {
    std::size_t nl = text.find('\n');
    std::string_view line = RightTrim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) {
      pending_blank = !out.empty();
      continue;
    }
    if (pending_blank) out += '\n';
    pending_blank = false;
    out.append(line);
    out += '\n';
  }
  return out;
}

}  // namespace nerscrub
