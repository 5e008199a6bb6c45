#pragma once

// Deterministic stand-in for the text and audio model endpoints.
//
// Table mode answers from a fixed response table keyed by stage and id.
// Oracle mode behaves like a tiny keyword model: it decomposes captions with a
// term lexicon, verifies facts against a ground-truth attribute table, and
// matches units by fact equality. Table entries take precedence in both modes.

#include <filesystem>
#include <map>
#include <set>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "emosura/backend.hpp"
#include "emosura/core.hpp"

namespace emosura {

struct LexiconEntry {
  std::string term;
  Attribute attribute = Attribute::Emotion;
  std::string value;
};

/// Term -> (attribute, value), loaded from TSV rows `term\tattribute\tvalue`.
/// Blank lines and lines starting with '#' are ignored.
struct KeywordLexicon {
  std::vector<LexiconEntry> entries;

  static KeywordLexicon from_tsv(std::string_view tsv);
  static KeywordLexicon load(const std::filesystem::path& path);
};

/// sample_id -> attribute -> accepted values
using TruthTable = std::map<std::string, std::map<Attribute, std::set<std::string>>>;

TruthTable truth_table_from_json(const json& j);

struct MockConfig {
  enum class Mode { Table, Oracle };
  Mode mode = Mode::Table;
  bool strict = false;
  /// Returned for unknown keys when not strict; not parseable as any answer.
  std::string default_response = "no fixture available";
  /// Keys: "<stage>:<key>", e.g. "verify:g1", "decompose:s1/ref".
  std::map<std::string, std::string> table;
  KeywordLexicon lexicon;
  TruthTable truth;
};

/// Reads `<dir>/mock.json`: {"mode", "strict", "default_response", "table",
/// "truth" (object or file name), "lexicon" (TSV file name)}.
MockConfig load_mock_fixture(const std::filesystem::path& dir);

/// Canonical fact sentence the oracle decomposer emits for an attribute value.
std::string oracle_fact(Attribute attribute, const std::string& value);

/// Units the oracle decomposer finds in `caption`: one per distinct
/// (attribute, value), in order of first occurrence.
std::vector<APU> oracle_decompose(std::string_view caption, const KeywordLexicon& lexicon);

class MockBackend : public ChatBackend {
 public:
  explicit MockBackend(MockConfig config);

  std::string complete(const ChatRequest& request, const RequestTag& tag) override;
  std::string identity() const override { return "mock"; }

  std::size_t calls() const;

 private:
  std::optional<std::string> from_table(const RequestTag& tag) const;
  std::string oracle_answer(const ChatRequest& request, const RequestTag& tag) const;
  std::string oracle_verify(std::string_view prompt, const RequestTag& tag) const;

  MockConfig config_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
};

}  // namespace emosura
