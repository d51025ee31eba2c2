#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace leakscope {

enum class EntityKind { GPE, LOC, NORP, PERSON, ORG, FAC };

std::string_view to_string(EntityKind kind);
std::optional<EntityKind> parse_entity_kind(std::string_view name);

struct EntityMatch {
  EntityKind kind;
  std::string surface;
  std::size_t offset = 0;  // byte offset in the text
};

// Pluggable entity recogniser: text in, (kind, surface) matches out.
class EntityFlagger {
 public:
  virtual ~EntityFlagger() = default;
  virtual std::vector<EntityMatch> find(std::string_view text) const = 0;
};

// Built-in baseline: case-sensitive, word-bounded gazetteer lookup (longest
// match wins) plus a capitalized-sequence heuristic that tags runs of two or
// more title-case words as ORG/FAC/LOC by their final word, PERSON otherwise.
class GazetteerFlagger final : public EntityFlagger {
 public:
  // Gazetteer text: one "kind<TAB>surface" entry per line; '#' comments.
  explicit GazetteerFlagger(std::string_view gazetteer_tsv, bool capitalized_sequences = true);
  // The bundled gazetteer.
  static const GazetteerFlagger& builtin();

  std::vector<EntityMatch> find(std::string_view text) const override;
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    std::string surface;
    EntityKind kind;
  };
  std::vector<Entry> entries_;  // sorted by surface length, longest first
  bool capitalized_sequences_;
};

// Client for an external NER service: POST {"text": ...} to `url`, expects
// {"entities": [{"label": "GPE", "text": "Lagos", "start": 10}, ...]}. Labels
// outside the six supported kinds are dropped. Failures raise FlaggerError.
class HttpEntityFlagger final : public EntityFlagger {
 public:
  explicit HttpEntityFlagger(std::string url, std::chrono::seconds timeout = std::chrono::seconds(30));
  std::vector<EntityMatch> find(std::string_view text) const override;

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::chrono::seconds timeout_;
};

// Heuristic English detector. A whitespace token (edge punctuation stripped,
// lower-cased) counts as English if it is in the bundled 1,000-word list, or
// if it is ASCII alphanumeric and contains a digit. A message is English when
// the counted share reaches `threshold`.
class EnglishGate {
 public:
  explicit EnglishGate(double threshold = 0.6);
  bool is_english(std::string_view text) const;
  double english_share(std::string_view text) const;
  double threshold() const { return threshold_; }

  static const std::unordered_set<std::string>& word_list();

 private:
  double threshold_;
};

}  // namespace leakscope
