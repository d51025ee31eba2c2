#include "leakscope/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "leakscope/canonical.hpp"
#include "leakscope/csv.hpp"
#include "leakscope/errors.hpp"

namespace leakscope {

using ordered_json = nlohmann::ordered_json;

namespace {

struct Pending {
  std::optional<double> time;
  std::string text;
};

std::optional<double> number_or_null(const ordered_json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (it->is_number()) return it->get<double>();
  if (it->is_string()) return parse_iso8601(it->get<std::string>());
  return std::nullopt;
}

std::string conversation_id(const ordered_json& conv, std::size_t position) {
  for (const char* key : {"id", "conversation_id"}) {
    auto it = conv.find(key);
    if (it != conv.end() && it->is_string()) return it->get<std::string>();
  }
  return "#" + std::to_string(position);
}

// Joins the string parts of a message's content with newlines; non-string
// parts (images, attachments) are skipped.
std::string message_text(const ordered_json& content, const std::string& where) {
  if (!content.is_object()) throw SchemaError(where + ": message content must be an object");
  auto parts = content.find("parts");
  if (parts == content.end()) {
    auto text = content.find("text");
    if (text != content.end() && text->is_string()) return text->get<std::string>();
    throw SchemaError(where + ": message content has no parts");
  }
  if (!parts->is_array()) throw SchemaError(where + ": content.parts must be a list");
  std::string out;
  bool first = true;
  for (const auto& part : *parts) {
    if (!part.is_string()) continue;
    if (!first) out += '\n';
    out += part.get<std::string>();
    first = false;
  }
  return out;
}

// Walks one conversation's node forest in archive order and appends the
// user-authored messages to `out`.
void collect_conversation(const ordered_json& conv, std::size_t position,
                          std::vector<Pending>& out) {
  const std::string id = conversation_id(conv, position);
  const std::string where = "conversation " + id;
  if (!conv.is_object()) throw SchemaError(where + ": conversation must be an object");
  auto mapping_it = conv.find("mapping");
  if (mapping_it == conv.end()) throw SchemaError(where + ": missing field 'mapping'");
  const auto& mapping = *mapping_it;
  if (!mapping.is_object()) throw SchemaError(where + ": mapping must be an object");
  const auto conv_time = number_or_null(conv, "create_time");

  std::vector<std::string> roots;
  for (const auto& [node_id, node] : mapping.items()) {
    if (!node.is_object()) throw SchemaError(where + ": node " + node_id + " must be an object");
    auto parent = node.find("parent");
    if (parent == node.end() || parent->is_null()) {
      roots.push_back(node_id);
      continue;
    }
    if (!parent->is_string()) throw SchemaError(where + ": node " + node_id + " has a non-string parent");
    if (!mapping.contains(parent->get<std::string>())) {
      throw SchemaError(where + ": node " + node_id + " references missing parent " +
                        parent->get<std::string>());
    }
  }

  std::unordered_set<std::string> visited;
  std::vector<std::string> stack(roots.rbegin(), roots.rend());
  while (!stack.empty()) {
    std::string node_id = std::move(stack.back());
    stack.pop_back();
    if (!visited.insert(node_id).second) continue;
    auto node_it = mapping.find(node_id);
    if (node_it == mapping.end()) throw SchemaError(where + ": child " + node_id + " does not exist");
    const auto& node = *node_it;

    auto msg = node.find("message");
    if (msg != node.end() && !msg->is_null()) {
      const std::string nwhere = where + ", node " + node_id;
      auto author = msg->find("author");
      if (author == msg->end() || !author->is_object() || !author->contains("role"))
        throw SchemaError(nwhere + ": message missing author.role");
      const auto role = (*author)["role"].get<std::string>();
      if (role == "user") {
        auto content = msg->find("content");
        if (content == msg->end()) throw SchemaError(nwhere + ": message missing content");
        auto type = content->find("content_type");
        bool is_context = type != content->end() && type->is_string() &&
                          type->get<std::string>() == "user_editable_context";
        if (!is_context) {
          std::string text = message_text(*content, nwhere);
          if (!trim(text).empty()) {
            auto t = number_or_null(*msg, "create_time");
            out.push_back({t ? t : conv_time, std::move(text)});
          }
        }
      }
    }

    auto children = node.find("children");
    if (children != node.end() && !children->is_null()) {
      if (!children->is_array()) throw SchemaError(where + ": node " + node_id + " children must be a list");
      for (auto it = children->rbegin(); it != children->rend(); ++it)
        stack.push_back(it->get<std::string>());
    }
  }
  if (visited.size() != mapping.size())
    throw SchemaError(where + ": mapping contains nodes unreachable from any root (cycle)");
}

// Stable chronological sort; entries without a time take the effective time
// of their predecessor so they stay next to it.
void sort_chronologically(std::vector<Pending>& items) {
  double previous = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, std::size_t>> keys;
  keys.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].time) previous = *items[i].time;
    keys.emplace_back(previous, i);
  }
  std::stable_sort(keys.begin(), keys.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Pending> sorted;
  sorted.reserve(items.size());
  for (const auto& [_, i] : keys) sorted.push_back(std::move(items[i]));
  items = std::move(sorted);
}

MessageStream to_stream(std::vector<Pending> items, StreamKind kind) {
  sort_chronologically(items);
  MessageStream stream{kind, {}};
  stream.messages.reserve(items.size());
  for (auto& p : items) stream.messages.push_back({0, p.time, std::move(p.text), kind});
  reindex(stream);
  return stream;
}

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  auto r = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return r.ec == std::errc{} && r.ptr == s.data() + pos + len;
}

}  // namespace

std::optional<double> parse_iso8601(std::string_view s) {
  s = trim(s);
  int year, month, day, hour = 0, minute = 0, second = 0;
  if (!read_int(s, 0, 4, year) || s.size() < 10 || s[4] != '-' || !read_int(s, 5, 2, month) ||
      s[7] != '-' || !read_int(s, 8, 2, day))
    return std::nullopt;
  std::size_t pos = 10;
  double fraction = 0.0;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    if (!read_int(s, pos + 1, 2, hour) || s.size() < pos + 9 || s[pos + 3] != ':' ||
        !read_int(s, pos + 4, 2, minute) || s[pos + 6] != ':' || !read_int(s, pos + 7, 2, second))
      return std::nullopt;
    pos += 9;
    if (pos < s.size() && s[pos] == '.') {
      std::size_t start = ++pos;
      double scale = 0.1;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
        fraction += (s[pos] - '0') * scale;
        scale /= 10;
        ++pos;
      }
      if (pos == start) return std::nullopt;
    }
  }
  int offset_seconds = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      // UTC
    } else if ((s[pos] == '+' || s[pos] == '-') && s.size() == pos + 6 && s[pos + 3] == ':') {
      int oh, om;
      if (!read_int(s, pos + 1, 2, oh) || !read_int(s, pos + 4, 2, om)) return std::nullopt;
      offset_seconds = (oh * 3600 + om * 60) * (s[pos] == '-' ? -1 : 1);
    } else {
      return std::nullopt;
    }
  }
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
    return std::nullopt;
  auto days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
  return static_cast<double>(days * 86400 + hour * 3600 + minute * 60 + second - offset_seconds) +
         fraction;
}

MessageStream parse_chat_export(std::string_view archive) {
  ordered_json root;
  try {
    root = ordered_json::parse(archive);
  } catch (const ordered_json::exception& e) {
    throw DecodeError(std::string("chat export is not valid JSON: ") + e.what());
  }
  if (root.is_object() && root.contains("conversations")) root = root["conversations"];
  if (!root.is_array()) throw DecodeError("chat export must be a list of conversations");

  std::vector<Pending> items;
  for (std::size_t i = 0; i < root.size(); ++i) {
    try {
      collect_conversation(root[i], i, items);
    } catch (const ordered_json::exception& e) {
      throw SchemaError("conversation " + conversation_id(root[i], i) + ": " + e.what());
    }
  }
  return to_stream(std::move(items), StreamKind::ChatAssistant);
}

MessageStream parse_search_log(std::string_view log, StreamKind kind) {
  if (kind == StreamKind::ChatAssistant)
    throw UnsupportedKind("activity logs cannot populate the ChatAssistant stream");
  ordered_json root;
  try {
    root = ordered_json::parse(log);
  } catch (const ordered_json::exception& e) {
    throw DecodeError(std::string("activity log is not valid JSON: ") + e.what());
  }
  if (!root.is_array()) throw DecodeError("activity log must be a list of entries");

  static constexpr std::string_view kPhrases[] = {"Searched for ", "Watched "};
  std::vector<Pending> items;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const auto& entry = root[i];
    auto title = entry.is_object() ? entry.find("title") : entry.end();
    if (!entry.is_object() || title == entry.end() || !title->is_string())
      throw DecodeError("activity log entry " + std::to_string(i) + " has no string title");
    std::string_view text = title->get_ref<const std::string&>();
    for (auto phrase : kPhrases) {
      if (text.starts_with(phrase)) {
        text.remove_prefix(phrase.size());
        break;
      }
    }
    if (trim(text).empty()) continue;
    std::optional<double> time;
    if (auto t = entry.find("time"); t != entry.end() && t->is_string()) {
      time = parse_iso8601(t->get<std::string>());
      if (!time) throw DecodeError("activity log entry " + std::to_string(i) + " has a malformed time");
    }
    items.push_back({time, std::string(text)});
  }
  return to_stream(std::move(items), kind);
}

std::vector<SurveyEntry> parse_survey_csv(std::string_view csv) {
  std::vector<std::vector<std::string>> rows;
  while (!csv.empty()) {
    auto nl = csv.find('\n');
    auto line = csv.substr(0, nl);
    csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    if (trim(line).empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.empty()) throw DecodeError("survey table is empty");

  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < rows[0].size(); ++i) column[canonicalize(rows[0][i])] = i;
  for (const char* required : {"user_id", "age_bracket", "gender", "country"})
    if (!column.count(required))
      throw SchemaError(std::string("survey table missing column '") + required + "'");

  std::vector<SurveyEntry> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto cell = [&](std::string_view name) -> std::optional<std::string> {
      auto it = column.find(std::string(name));
      if (it == column.end() || it->second >= row.size()) return std::nullopt;
      auto v = trim(row[it->second]);
      if (v.empty()) return std::nullopt;
      return std::string(v);
    };
    SurveyEntry entry;
    entry.user_id = cell("user_id").value_or("");
    if (entry.user_id.empty())
      throw SchemaError("survey row " + std::to_string(r + 1) + " has no user_id");
    for (auto attribute : kAllAttributes) {
      auto raw = cell(profile_field(attribute));
      if (raw) raw = normalize_label(attribute, *raw);
      entry.profile.set_label(attribute, raw);
    }
    out.push_back(std::move(entry));
  }
  return out;
}

AssembleResult assemble_users(std::vector<StreamSource> streams,
                              const std::vector<SurveyEntry>& survey) {
  std::unordered_map<std::string, std::map<StreamKind, StreamSource>> by_user;
  for (auto& source : streams) {
    auto& slot = by_user[source.user_id];
    if (slot.count(source.kind)) {
      throw DuplicateStream("user " + source.user_id + " has two " +
                            std::string(to_string(source.kind)) + " streams (" +
                            slot.at(source.kind).origin + ", " + source.origin + ")");
    }
    auto kind = source.kind;
    slot.emplace(kind, std::move(source));
  }

  AssembleResult result;
  std::unordered_set<std::string> surveyed;
  for (const auto& entry : survey) {
    surveyed.insert(entry.user_id);
    auto it = by_user.find(entry.user_id);
    if (it == by_user.end() || !it->second.count(StreamKind::ChatAssistant)) {
      result.report.push_back("user " + entry.user_id +
                              ": survey row without a ChatAssistant stream; not emitted");
      continue;
    }
    UserRecord record{entry.user_id, entry.profile, {}};
    for (auto& [kind, source] : it->second) {
      source.stream.kind = kind;
      reindex(source.stream);
      record.streams.emplace(kind, std::move(source.stream));
    }
    result.users.push_back(std::move(record));
  }
  std::vector<std::string> orphans;
  for (const auto& [user, _] : by_user)
    if (!surveyed.count(user)) orphans.push_back(user);
  std::sort(orphans.begin(), orphans.end());
  for (const auto& user : orphans)
    result.report.push_back("user " + user + ": streams present but no survey row; not emitted");
  return result;
}

}  // namespace leakscope
