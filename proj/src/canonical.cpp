#include "leakscope/canonical.hpp"

#include <mutex>
#include <string_view>
#include <unordered_map>

#include "embedded_data.hpp"

namespace leakscope {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Returns the byte length of a Unicode dash or no-break space at `pos`,
// 0 otherwise. Dashes become '-', NBSP becomes a space.
std::size_t special_sequence(std::string_view s, std::size_t pos, char& out) {
  auto rest = s.substr(pos);
  // U+2012..U+2015 (figure dash, en dash, em dash, horizontal bar), U+2212.
  if (rest.size() >= 3 && static_cast<unsigned char>(rest[0]) == 0xE2) {
    auto b1 = static_cast<unsigned char>(rest[1]);
    auto b2 = static_cast<unsigned char>(rest[2]);
    if (b1 == 0x80 && b2 >= 0x92 && b2 <= 0x95) {
      out = '-';
      return 3;
    }
    if (b1 == 0x88 && b2 == 0x92) {
      out = '-';
      return 3;
    }
  }
  if (rest.size() >= 2 && static_cast<unsigned char>(rest[0]) == 0xC2 &&
      static_cast<unsigned char>(rest[1]) == 0xA0) {
    out = ' ';
    return 2;
  }
  return 0;
}

const std::unordered_map<std::string, std::string>& country_aliases() {
  static const auto table = [] {
    std::unordered_map<std::string, std::string> t;
    std::string_view all = data::country_aliases;
    while (!all.empty()) {
      auto nl = all.find('\n');
      auto line = all.substr(0, nl);
      all = nl == std::string_view::npos ? std::string_view{} : all.substr(nl + 1);
      if (line.empty() || line.front() == '#') continue;
      auto tab = line.find('\t');
      if (tab == std::string_view::npos) continue;
      t.emplace(canonicalize(line.substr(0, tab)),
                canonicalize(line.substr(tab + 1)));
    }
    return t;
  }();
  return table;
}

}  // namespace

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::string canonicalize(std::string_view label) {
  std::string out;
  out.reserve(label.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < label.size();) {
    char mapped = 0;
    std::size_t len = special_sequence(label, i, mapped);
    char c;
    if (len > 0) {
      c = mapped;
      i += len;
    } else {
      c = label[i];
      ++i;
    }
    if (is_space(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    out.push_back(c);
  }
  return out;
}

std::string canonical_country(std::string_view label) {
  auto canon = canonicalize(label);
  const auto& aliases = country_aliases();
  if (auto it = aliases.find(canon); it != aliases.end()) return it->second;
  return canon;
}

}  // namespace leakscope
