#include "leakscope/entity_flagger.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <span>

#include <httplib.h>
#include <json.hpp>

#include "embedded_data.hpp"
#include "leakscope/canonical.hpp"
#include "leakscope/errors.hpp"

namespace leakscope {

namespace {

constexpr std::array<std::string_view, 6> kKindNames = {"GPE", "LOC", "NORP", "PERSON", "ORG", "FAC"};

constexpr std::string_view kOrgSuffixes[] = {
    "Inc", "Ltd", "Limited", "Corp", "Corporation", "Company", "Co", "Group", "Bank",
    "University", "College", "Institute", "School", "Academy", "Ministry", "Agency",
    "Association", "Foundation", "Party", "Council", "Committee", "Commission", "Club",
    "Technologies", "Systems", "Labs", "Hospital", "Clinic", "Board", "Authority"};
constexpr std::string_view kFacSuffixes[] = {
    "Airport", "Bridge", "Station", "Stadium", "Tower", "Mall", "Market", "Temple", "Mosque",
    "Church", "Cathedral", "Museum", "Palace", "Fort", "Highway", "Road", "Street", "Avenue",
    "Square", "Park", "Terminal"};
constexpr std::string_view kLocSuffixes[] = {
    "River", "Lake", "Mountain", "Mountains", "Hills", "Valley", "Ocean", "Sea", "Bay",
    "Island", "Islands", "Desert", "Forest", "Coast", "Beach", "Peninsula", "Gulf"};

bool is_word_byte(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || u >= 0x80 || c == '\'' || c == '-';
}

bool boundary_before(std::string_view text, std::size_t pos) {
  return pos == 0 || !is_word_byte(text[pos - 1]);
}

bool boundary_after(std::string_view text, std::size_t end) {
  if (end >= text.size()) return true;
  char c = text[end];
  // A trailing apostrophe-s ("Lagos's") still ends the entity.
  if (c == '\'') return true;
  return !is_word_byte(c);
}

bool in_list(std::string_view word, std::span<const std::string_view> list) {
  return std::find(list.begin(), list.end(), word) != list.end();
}

struct Token {
  std::size_t begin;
  std::size_t end;
  std::string_view text;
};

std::vector<Token> word_tokens(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isalpha(static_cast<unsigned char>(text[i])) && static_cast<unsigned char>(text[i]) < 0x80) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && (std::isalpha(static_cast<unsigned char>(text[j])) ||
                               static_cast<unsigned char>(text[j]) >= 0x80))
      ++j;
    out.push_back({i, j, text.substr(i, j - i)});
    i = j;
  }
  return out;
}

bool title_case(std::string_view w) {
  if (w.size() < 2 || !std::isupper(static_cast<unsigned char>(w[0]))) return false;
  for (std::size_t i = 1; i < w.size(); ++i)
    if (std::isupper(static_cast<unsigned char>(w[i]))) return false;
  return true;
}

std::string lower(std::string_view w) {
  std::string out(w);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<EntityMatch> capitalized_sequences(std::string_view text,
                                               const std::vector<EntityMatch>& known) {
  const auto& common = EnglishGate::word_list();
  auto tokens = word_tokens(text);
  std::vector<EntityMatch> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (!title_case(tokens[i].text)) {
      ++i;
      continue;
    }
    // Extend over title-case words, allowing a lower-case "of" between two of them.
    std::size_t j = i + 1;
    while (j < tokens.size()) {
      if (title_case(tokens[j].text)) {
        ++j;
      } else if (tokens[j].text == "of" && j + 1 < tokens.size() && title_case(tokens[j + 1].text)) {
        j += 2;
      } else {
        break;
      }
    }
    std::size_t first = i;
    while (first < j && common.count(lower(tokens[first].text))) ++first;
    std::size_t next = j;
    if (first < j && tokens[first].text != "of") {
      std::size_t words = 0;
      for (std::size_t k = first; k < j; ++k)
        if (tokens[k].text != "of") ++words;
      std::size_t begin = tokens[first].begin;
      std::size_t end = tokens[j - 1].end;
      bool overlaps = std::any_of(known.begin(), known.end(), [&](const EntityMatch& m) {
        return m.offset < end && begin < m.offset + m.surface.size();
      });
      if (words >= 2 && !overlaps) {
        auto last = tokens[j - 1].text;
        EntityKind kind = EntityKind::PERSON;
        if (in_list(last, kOrgSuffixes)) kind = EntityKind::ORG;
        else if (in_list(last, kFacSuffixes)) kind = EntityKind::FAC;
        else if (in_list(last, kLocSuffixes)) kind = EntityKind::LOC;
        out.push_back({kind, std::string(text.substr(begin, end - begin)), begin});
      }
    }
    i = next;
  }
  return out;
}

}  // namespace

std::string_view to_string(EntityKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<EntityKind> parse_entity_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name) return static_cast<EntityKind>(i);
  return std::nullopt;
}

GazetteerFlagger::GazetteerFlagger(std::string_view tsv, bool capitalized_sequences)
    : capitalized_sequences_(capitalized_sequences) {
  std::size_t line_no = 0;
  while (!tsv.empty()) {
    ++line_no;
    auto nl = tsv.find('\n');
    auto line = tsv.substr(0, nl);
    tsv = nl == std::string_view::npos ? std::string_view{} : tsv.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw SchemaError("gazetteer line " + std::to_string(line_no) + ": expected kind<TAB>surface");
    auto kind = parse_entity_kind(line.substr(0, tab));
    if (!kind)
      throw SchemaError("gazetteer line " + std::to_string(line_no) + ": unknown entity kind '" +
                        std::string(line.substr(0, tab)) + "'");
    auto surface = trim(line.substr(tab + 1));
    if (surface.empty()) continue;
    entries_.push_back({std::string(surface), *kind});
  }
  std::stable_sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.surface.size() > b.surface.size();
  });
}

const GazetteerFlagger& GazetteerFlagger::builtin() {
  static const GazetteerFlagger flagger(data::gazetteer);
  return flagger;
}

std::vector<EntityMatch> GazetteerFlagger::find(std::string_view text) const {
  std::vector<EntityMatch> matches;
  std::vector<bool> taken(text.size(), false);
  for (const auto& entry : entries_) {
    std::size_t pos = 0;
    while ((pos = text.find(entry.surface, pos)) != std::string_view::npos) {
      std::size_t end = pos + entry.surface.size();
      bool free = std::none_of(taken.begin() + static_cast<std::ptrdiff_t>(pos),
                               taken.begin() + static_cast<std::ptrdiff_t>(end),
                               [](bool b) { return b; });
      if (free && boundary_before(text, pos) && boundary_after(text, end)) {
        std::fill(taken.begin() + static_cast<std::ptrdiff_t>(pos),
                  taken.begin() + static_cast<std::ptrdiff_t>(end), true);
        matches.push_back({entry.kind, entry.surface, pos});
      }
      pos = end;
    }
  }
  if (capitalized_sequences_) {
    auto extra = capitalized_sequences(text, matches);
    matches.insert(matches.end(), extra.begin(), extra.end());
  }
  std::sort(matches.begin(), matches.end(),
            [](const EntityMatch& a, const EntityMatch& b) { return a.offset < b.offset; });
  return matches;
}

HttpEntityFlagger::HttpEntityFlagger(std::string url, std::chrono::seconds timeout)
    : timeout_(timeout) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error("flagger URL needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

std::vector<EntityMatch> HttpEntityFlagger::find(std::string_view text) const {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  nlohmann::json body = {{"text", text}};
  auto result = client.Post(path_, body.dump(), "application/json");
  if (!result) throw FlaggerError("NER service transport error: " + httplib::to_string(result.error()));
  if (result->status != 200) throw FlaggerError("NER service HTTP status " + std::to_string(result->status));
  std::vector<EntityMatch> out;
  try {
    auto j = nlohmann::json::parse(result->body);
    for (const auto& e : j.at("entities")) {
      auto kind = parse_entity_kind(e.at("label").get<std::string>());
      if (!kind) continue;
      std::size_t start = e.contains("start") ? e["start"].get<std::size_t>() : 0;
      out.push_back({*kind, e.at("text").get<std::string>(), start});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FlaggerError(std::string("NER service returned an unexpected body: ") + ex.what());
  }
  return out;
}

EnglishGate::EnglishGate(double threshold) : threshold_(threshold) {}

const std::unordered_set<std::string>& EnglishGate::word_list() {
  static const auto words = [] {
    std::unordered_set<std::string> out;
    std::string_view all = data::english_common;
    while (!all.empty()) {
      auto nl = all.find('\n');
      auto w = trim(all.substr(0, nl));
      all = nl == std::string_view::npos ? std::string_view{} : all.substr(nl + 1);
      if (!w.empty()) out.emplace(w);
    }
    return out;
  }();
  return words;
}

double EnglishGate::english_share(std::string_view text) const {
  const auto& words = word_list();
  std::size_t total = 0, english = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::string_view token = text.substr(i, j - i);
    i = j;
    auto edge = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
    while (!token.empty() && edge(token.front())) token.remove_prefix(1);
    while (!token.empty() && edge(token.back())) token.remove_suffix(1);
    if (token.empty()) continue;
    ++total;
    std::string lowered = lower(token);
    if (words.count(lowered)) {
      ++english;
      continue;
    }
    bool alnum = std::all_of(token.begin(), token.end(),
                             [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; });
    bool digit = std::any_of(token.begin(), token.end(),
                             [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
    if (alnum && digit) ++english;
  }
  return total == 0 ? 0.0 : static_cast<double>(english) / static_cast<double>(total);
}

bool EnglishGate::is_english(std::string_view text) const {
  return english_share(text) >= threshold_;
}

}  // namespace leakscope
