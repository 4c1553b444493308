#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "nerscrub/corpus.h"
#include "nerscrub/corpus_io.h"
#include "nerscrub/edit.h"
#include "test_support.h"

using namespace nerscrub;
using namespace testsupport;

namespace {

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string Fixture(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }

std::vector<std::string> Tags(const Sentence& s) { return TagStrings(s); }

}  // namespace

TEST_CASE("tags parse into exactly one shape") {
  CHECK(Tag::Parse("O")->is_outside());
  CHECK(Tag::Parse("B-GPE")->is_begin());
  CHECK(Tag::Parse("I-WORK_OF_ART")->type == "WORK_OF_ART");
  CHECK_FALSE(Tag::Parse("B-"));
  CHECK_FALSE(Tag::Parse("X-GPE"));
  CHECK_FALSE(Tag::Parse("o"));
  CHECK_FALSE(Tag::Parse("B-G PE"));
  CHECK_FALSE(Tag::Parse(""));
  CHECK(Tag::Parse("I-PERSON")->str() == "I-PERSON");
}

TEST_CASE("entity kinds") {
  for (const char* v : {"CARDINAL", "DATE", "MONEY", "ORDINAL", "PERCENT", "QUANTITY", "TIME"}) {
    CHECK(EntityType(v).is_value());
  }
  int named = 0;
  for (const char* n : {"EVENT", "FAC", "GPE", "LANGUAGE", "LAW", "LOC", "NORP", "ORG", "PERSON",
                        "PRODUCT", "WORK_OF_ART"}) {
    CHECK(EntityType::IsPredefined(n));
    named += EntityType(n).kind() == EntityKind::kNamed;
  }
  CHECK(named == 11);
  CHECK_FALSE(EntityType::IsPredefined("MISC"));
  CHECK(EntityType("MISC").kind() == EntityKind::kNamed);
}

TEST_CASE("minimal sentence") {
  auto r = ParseCorpusString("US B-GPE\neconomy O\n\n");
  REQUIRE(r.corpus.sentences.size() == 1);
  CHECK(r.corpus.sentences[0].tokens.size() == 2);
  CHECK(r.violations.empty());
  auto m = ExtractMentions(r.corpus.sentences[0]);
  REQUIRE(m.size() == 1);
  CHECK(m[0].start == 0);
  CHECK(m[0].end == 1);
  CHECK(m[0].etype == "GPE");
  CHECK(m[0].surface == "US");
}

TEST_CASE("I after O: strict rejects, repair promotes") {
  const std::string text = "the O\nrose I-PERSON\n\n";
  try {
    ParseCorpusString(text);
    FAIL("strict parse accepted I-after-O");
  } catch (const ViolationError& e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0].kind == ViolationKind::kIAfterO);
    CHECK(e.violations()[0].token_index == 1);
  }
  ColumnFormat f;
  f.mode = Strictness::kRepair;
  auto r = ParseCorpusString(text, f);
  CHECK(r.violations.size() == 1);
  CHECK(Tags(r.corpus.sentences[0]) == std::vector<std::string>{"O", "B-PERSON"});
}

TEST_CASE("I type mismatch and malformed tags") {
  ColumnFormat f;
  f.mode = Strictness::kRepair;
  auto r = ParseCorpusString("New B-GPE\nYork I-LOC\nfoo Q-X\n\n", f);
  REQUIRE(r.violations.size() == 2);
  std::set<ViolationKind> kinds{r.violations[0].kind, r.violations[1].kind};
  CHECK(kinds == std::set<ViolationKind>{ViolationKind::kITypeMismatch, ViolationKind::kMalformedTag});
  CHECK(Tags(r.corpus.sentences[0]) == std::vector<std::string>{"B-GPE", "B-LOC", "O"});
  CHECK_THROWS_AS(ParseCorpusString("foo Q-X\n\n"), ViolationError);
}

TEST_CASE("empty input is an empty corpus") {
  auto r = ParseCorpusString("");
  CHECK(r.corpus.sentences.empty());
  CHECK(SerializeCorpusString(r.corpus).empty());
  CHECK(SerializeCorpusString(Corpus{}).empty());
  CHECK(ReadCorpusFile(Fixture("empty.conll")).corpus.sentences.empty());
}

TEST_CASE("unreadable file") {
  CHECK_THROWS_AS(ReadCorpusFile("/nonexistent/file.conll"), IoError);
}

TEST_CASE("fixtures round-trip byte for byte") {
  struct Case {
    const char* name;
    const char* format;
  };
  for (Case c : {Case{"three_sentences.conll", ""}, Case{"ontonotes_columns.conll", ""},
                 Case{"tab_separated.conll", "sep=tab"}}) {
    CAPTURE(c.name);
    const std::string text = Slurp(Fixture(c.name));
    ColumnFormat f = *c.format ? ColumnFormat::FromString(c.format) : ColumnFormat{};
    auto r = ParseCorpusString(text, f);
    CHECK(r.violations.empty());
    CHECK(SerializeCorpusString(r.corpus, f) == text);
  }
}

TEST_CASE("document boundaries are restored in order") {
  auto r = ReadCorpusFile(Fixture("three_sentences.conll"));
  const Corpus& c = r.corpus;
  REQUIRE(c.sentences.size() == 3);
  REQUIRE(c.boundaries.size() == 2);
  CHECK(c.boundaries[0].doc_id == "nw/wsj/00/wsj_0001");
  CHECK(c.boundaries[1].doc_id == "bc/cnn/00/cnn_0003");
  CHECK(c.boundaries[1].first_sentence == 2);
  CHECK(c.sentences[1].doc_id == "nw/wsj/00/wsj_0001");
  CHECK(c.sentences[1].sent_index == 1);
  CHECK(c.sentences[2].sent_index == 0);
  CHECK(c.document_ids() == std::vector<std::string>{"nw/wsj/00/wsj_0001", "bc/cnn/00/cnn_0003"});
  CHECK(c.token_count() == 16);
}

TEST_CASE("column selection") {
  auto r = ReadCorpusFile(Fixture("ontonotes_columns.conll"));
  // Defaults take the first column as the token, here the document id.
  const Sentence& s = r.corpus.sentences[0];
  CHECK(s.tokens[1].text == "mz/sinorama/10/ectb_1020");
  CHECK(s.tokens[1].tag.str() == "B-DATE");
  auto f = ColumnFormat::FromString("token=3,tag=5");
  auto r2 = ReadCorpusFile(Fixture("ontonotes_columns.conll"), f);
  CHECK(r2.corpus.sentences[0].tokens[1].text == "the");
  CHECK(r2.corpus.sentences[0].tokens[1].tag.str() == "B-DATE");
  CHECK_THROWS(ColumnFormat::FromString("token=x"));
  CHECK_THROWS(ColumnFormat::FromString("colour=blue"));
  CHECK_THROWS(ColumnFormat::FromString("mode=lenient"));
}

TEST_CASE("partition inferred from the file name") {
  auto path = (std::filesystem::temp_directory_path() / "nerscrub_test_train.conll").string();
  std::ofstream(path) << "a O\n\n";
  CHECK(ReadCorpusFile(path).corpus.partition == "train");
  std::remove(path.c_str());
  auto dev = (std::filesystem::temp_directory_path() / "onto.dev.conll").string();
  std::ofstream(dev) << "a O\n\n";
  CHECK(ReadCorpusFile(dev).corpus.partition == "dev");
  std::remove(dev.c_str());
  auto word = (std::filesystem::temp_directory_path() / "contest.conll").string();
  std::ofstream(word) << "a O\n\n";
  CHECK(ReadCorpusFile(word).corpus.partition == "other");
  std::remove(word.c_str());
  CHECK(ReadCorpusFile(Fixture("empty.conll")).corpus.partition == "other");
}

TEST_CASE("trailing whitespace is normalized") {
  const std::string text = "a O  \nb B-GPE\t\n\n\n\nc O\n";
  auto r = ParseCorpusString(text);
  CHECK(NormalizeTrailingWhitespace(SerializeCorpusString(r.corpus)) ==
        NormalizeTrailingWhitespace(text));
  CHECK(r.corpus.sentences.size() == 2);
}

TEST_CASE("randomized corpora round-trip and keep their mentions") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    Corpus c = RandomCorpus(rng);
    const std::string text = SerializeCorpusString(c);
    auto r = ParseCorpusString(text);
    CHECK(r.violations.empty());
    CHECK(r.corpus == c);
    CHECK(SerializeCorpusString(r.corpus) == text);
    for (std::size_t k = 0; k < c.sentences.size(); ++k) {
      CHECK(ExtractMentions(r.corpus.sentences[k]) == ExtractMentions(c.sentences[k]));
    }
  }
}

TEST_CASE("extract_mentions agrees with a brute-force recognizer on all short tag strings") {
  const std::vector<std::string> alphabet = {"O", "B-ORG", "I-ORG", "B-GPE", "I-GPE"};
  std::size_t checked = 0;
  for (std::size_t len = 1; len <= 4; ++len) {
    std::vector<std::size_t> digits(len, 0);
    while (true) {
      std::vector<std::string> tags;
      Sentence s;
      s.doc_id = "d";
      for (std::size_t i = 0; i < len; ++i) {
        tags.push_back(alphabet[digits[i]]);
        s.tokens.push_back({"t" + std::to_string(i), *Tag::Parse(tags.back()), {}, 0});
      }
      auto oracle = OracleSpans(tags);
      std::string joined;
      for (const std::string& t : tags) joined += t + " ";
      CAPTURE(joined);
      CHECK(ValidateSentence(s).empty() == oracle.has_value());
      if (oracle) {
        auto got = ExtractMentions(s);
        REQUIRE(got.size() == oracle->size());
        for (std::size_t k = 0; k < got.size(); ++k) {
          CHECK(got[k].start == (*oracle)[k].start);
          CHECK(got[k].end == (*oracle)[k].end);
          CHECK(got[k].etype == (*oracle)[k].type);
          if (k > 0) CHECK(got[k - 1].end <= got[k].start);
        }
      } else {
        CHECK_THROWS_AS(ExtractMentions(s), ViolationError);
        Sentence repaired = s;
        CHECK_FALSE(RepairSentence(repaired).empty());
        CHECK(ValidateSentence(repaired).empty());
        CHECK(RepairSentence(repaired).empty());
      }
      ++checked;
      std::size_t k = 0;
      while (k < len && ++digits[k] == alphabet.size()) digits[k++] = 0;
      if (k == len) break;
    }
  }
  CHECK(checked == 5 + 25 + 125 + 625);
}

TEST_CASE("adjacent B tags are separate mentions") {
  Sentence s = MakeSentence("d", 0, {"Acme/B-ORG", "Corp/B-ORG"});
  auto m = ExtractMentions(s);
  REQUIRE(m.size() == 2);
  CHECK(m[0].end == 1);
  CHECK(m[1].start == 1);
}

TEST_CASE("empty sentences are violations") {
  Sentence s;
  s.doc_id = "d";
  auto v = ValidateSentence(s);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::kEmptySentence);
  CHECK(std::string(ToString(ViolationKind::kIAfterO)) == "I-after-O");
}

TEST_CASE("repair is idempotent on the misaligned fixture") {
  ColumnFormat f;
  f.mode = Strictness::kRepair;
  auto r = ReadCorpusFile(Fixture("misaligned_section.conll"), f);
  CHECK(r.violations.size() == 6);
  CHECK(ValidateCorpus(r.corpus).empty());
  const std::string once = SerializeCorpusString(r.corpus);
  auto again = ParseCorpusString(once, f);
  CHECK(again.violations.empty());
  CHECK(SerializeCorpusString(again.corpus) == once);
  CHECK_NOTHROW(ParseCorpusString(once));
}

// --- apply_edit ----------------------------------------------------------

TEST_CASE("shrink-left on the US") {
  Corpus c = MakeCorpus({MakeSentence("d", 0, {"the/B-GPE", "US/I-GPE", "grew"})});
  Mention target = ExtractMentions(c.sentences[0])[0];
  Corpus out = ApplyEdit(c, EditProposal::Make("r", target, EditOperation::ShrinkLeft(1)));
  CHECK(Tags(out.sentences[0]) == std::vector<std::string>{"O", "B-GPE", "O"});
  CHECK(Tags(c.sentences[0]) == std::vector<std::string>{"B-GPE", "I-GPE", "O"});
}

TEST_CASE("retype changes only the type component") {
  Corpus c = MakeCorpus({MakeSentence("d", 0, {"in", "New/B-LOC", "York/I-LOC"})});
  Mention target = ExtractMentions(c.sentences[0])[0];
  Corpus out = ApplyEdit(c, EditProposal::Make("r", target, EditOperation::Retype("GPE")));
  CHECK(Tags(out.sentences[0]) == std::vector<std::string>{"O", "B-GPE", "I-GPE"});
}

TEST_CASE("delete clears the mention") {
  Corpus c = MakeCorpus({MakeSentence("d", 0, {"Boris/B-PERSON", "Smith/I-PERSON", "left"})});
  Mention target = ExtractMentions(c.sentences[0])[0];
  Corpus out = ApplyEdit(c, EditProposal::Make("r", target, EditOperation::Delete()));
  CHECK(ExtractMentions(out.sentences[0]).empty());
  CHECK(Tags(out.sentences[0]) == std::vector<std::string>{"O", "O", "O"});
}

TEST_CASE("grow into O tokens") {
  Corpus c = MakeCorpus({MakeSentence("d", 0, {"since", "Monday/B-DATE", "morning"})});
  Mention target = ExtractMentions(c.sentences[0])[0];
  Corpus out = ApplyEdit(c, EditProposal::Make("r", target, EditOperation::Grow(0, 1)));
  CHECK(Tags(out.sentences[0]) == std::vector<std::string>{"O", "B-DATE", "I-DATE"});
  CHECK_THROWS_AS(ApplyEdit(c, EditProposal::Make("r", target, EditOperation::Grow(2, 0))), EditError);
  Corpus busy = MakeCorpus({MakeSentence("d", 0, {"US/B-GPE", "Monday/B-DATE"})});
  Mention t2 = ExtractMentions(busy.sentences[0])[1];
  CHECK_THROWS_AS(ApplyEdit(busy, EditProposal::Make("r", t2, EditOperation::Grow(1, 0))), EditError);
}

TEST_CASE("stale targets and empty spans are rejected") {
  Corpus c = MakeCorpus({MakeSentence("d", 0, {"the/B-GPE", "US/I-GPE"})});
  Mention target = ExtractMentions(c.sentences[0])[0];
  Corpus shrunk = ApplyEdit(c, EditProposal::Make("r", target, EditOperation::ShrinkLeft(1)));
  try {
    ApplyEdit(shrunk, EditProposal::Make("r", target, EditOperation::ShrinkLeft(1)));
    FAIL("stale edit applied");
  } catch (const EditError& e) {
    CHECK(e.kind() == EditErrorKind::kStaleTarget);
  }
  try {
    ApplyEdit(c, EditProposal::Make("r", target, EditOperation::Shrink(1, 1)));
    FAIL("empty span applied");
  } catch (const EditError& e) {
    CHECK(e.kind() == EditErrorKind::kEmptySpan);
  }
  Mention wrong_type = target;
  wrong_type.etype = "LOC";
  CHECK_THROWS_AS(ApplyEdit(c, EditProposal::Make("r", wrong_type, EditOperation::Delete())), EditError);
  Mention missing = target;
  missing.sent_index = 4;
  CHECK_THROWS_AS(ApplyEdit(c, EditProposal::Make("r", missing, EditOperation::Delete())), EditError);
}

TEST_CASE("edits keep texts, token counts and BIO validity") {
  Rng rng(11);
  GenOptions o;
  for (int i = 0; i < 300; ++i) {
    Corpus c = RandomCorpus(rng, o);
    for (const Sentence& s : c.sentences) {
      for (const Mention& m : ExtractMentions(s)) {
        EditOperation op;
        switch (Pick(rng, 0, 4)) {
          case 0: op = EditOperation::ShrinkLeft(Pick(rng, 1, 2)); break;
          case 1: op = EditOperation::ShrinkRight(Pick(rng, 1, 2)); break;
          case 2: op = EditOperation::Retype(PickOne(rng, o.types)); break;
          case 3: op = EditOperation::Grow(Pick(rng, 0, 1), Pick(rng, 0, 1)); break;
          default: op = EditOperation::Delete(); break;
        }
        Corpus out;
        try {
          out = ApplyEdit(c, EditProposal::Make("r", m, op));
        } catch (const EditError&) {
          continue;
        }
        REQUIRE(out.sentences.size() == c.sentences.size());
        CHECK(ValidateCorpus(out).empty());
        for (std::size_t k = 0; k < c.sentences.size(); ++k) {
          REQUIRE(out.sentences[k].tokens.size() == c.sentences[k].tokens.size());
          for (std::size_t t = 0; t < c.sentences[k].tokens.size(); ++t) {
            CHECK(out.sentences[k].tokens[t].text == c.sentences[k].tokens[t].text);
          }
          const bool is_target = c.sentences[k].doc_id == m.doc_id && c.sentences[k].sent_index == m.sent_index;
          if (!is_target) CHECK(out.sentences[k] == c.sentences[k]);
        }
        if (op.kind != EditKind::kDelete) {
          Mention want = ResultSpan(m, op);
          bool found = false;
          for (const Sentence& s2 : out.sentences) {
            if (s2.doc_id != m.doc_id || s2.sent_index != m.sent_index) continue;
            for (const Mention& got : ExtractMentions(s2)) {
              found = found || (got.same_span(want) && got.etype == want.etype);
            }
          }
          CHECK(found);
        }
      }
    }
  }
}

TEST_CASE("proposal ids are deterministic") {
  Mention m{"d", 0, 0, 2, "GPE", "the US"};
  auto a = EditProposal::Make("leading_determiner", m, EditOperation::ShrinkLeft(1));
  auto b = EditProposal::Make("leading_determiner", m, EditOperation::ShrinkLeft(1));
  auto c = EditProposal::Make("leading_determiner", m, EditOperation::ShrinkRight(1));
  CHECK(a.id == b.id);
  CHECK(a.id != c.id);
  CHECK(a.id.size() == 16);
  CHECK(EditOperation::Shrink(1, 2).str() == "shrink(1,2)");
}
