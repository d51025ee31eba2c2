#include "leakscope/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "leakscope/canonical.hpp"
#include "leakscope/entity_flagger.hpp"
#include "leakscope/errors.hpp"
#include "leakscope/llm/mock_oracle.hpp"
#include "leakscope/llm/parse.hpp"
#include "leakscope/llm/prompts.hpp"
#include "leakscope/rng.hpp"
#include "leakscope/taxonomy.hpp"

namespace leakscope {

using nlohmann::json;

namespace {

constexpr std::string_view kDisclosureSentences[] = {
    "I am a single mom of two.",
    "As a 25 year old woman, what should I do?",
};

constexpr std::string_view kChatFiller[] = {
    "how do i sort a list of numbers in python",
    "can you explain what a hash table is",
    "write a short poem about the rain",
    "what is the difference between a virus and bacteria",
    "give me three ideas for a quick dinner",
    "how many minutes should i boil an egg",
    "summarize the plot of a mystery novel in two lines",
    "what does the error index out of range mean",
    "suggest a name for a small bakery",
    "how do plants turn light into energy",
    "convert ten miles to kilometers",
    "what is a good way to learn the guitar",
    "explain recursion with a simple example",
    "how can i make my code run faster",
    "why is the sky blue",
    "help me write an email asking for a meeting",
    "what are the rules of chess for the knight",
    "how do i remove a stain from a shirt",
    "list some tips for better sleep",
    "what is the formula for the area of a circle",
    "how should i store fresh herbs",
    "what is the best way to study for an exam",
    "rewrite this sentence to sound more formal",
    "how does a credit score work",
    "what is the capital letter rule for titles",
    "give me a workout plan for the week",
    "how do i center a div with css",
    "what causes thunder during a storm",
    "recommend a board game for four players",
    "how long does it take to learn to swim",
};

constexpr std::string_view kSearchFiller[] = {
    "best hiking boots",          "weather tomorrow",        "easy pasta recipe",
    "how to fix a flat tire",     "cheap flights",           "python list comprehension",
    "symptoms of a cold",         "used bicycles for sale",  "how to tie a tie",
    "movie times tonight",        "home workout ideas",      "laptop battery life tips",
    "how to grow tomatoes",       "exchange rate today",     "job interview questions",
    "how to clean an oven",       "meaning of serendipity",  "quick breakfast ideas",
    "phone screen repair cost",   "learn to draw faces",
};

constexpr std::string_view kWatchFiller[] = {
    "ten minute morning stretch",   "cooking rice the easy way",  "funny cat compilation",
    "guitar lesson for beginners",  "how engines work",           "relaxing rain sounds",
    "top goals of the season",      "budget travel tips",         "drawing tutorial for kids",
    "science of black holes",       "home repair basics",         "card tricks explained",
    "yoga for beginners",           "history of the bicycle",     "how to bake bread",
};

std::vector<std::string> default_country_labels() {
  return {"India", "United States", "United Kingdom", "Nigeria", "Germany"};
}

[[noreturn]] void invalid(const std::string& path, const std::string& why) {
  throw SpecInvalid(path + ": " + why);
}

Weights uniform_weights(Attribute attribute) {
  Weights w;
  if (attribute == Attribute::Country) {
    for (auto& c : default_country_labels()) w.emplace_back(c, 1.0);
  } else {
    for (auto label : allowed_labels(attribute)) w.emplace_back(std::string(label), 1.0);
  }
  return w;
}

Weights parse_weights(const json& j, const std::string& path) {
  if (!j.is_object()) invalid(path, "expected an object of label weights");
  Weights out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number() || it.value().get<double>() < 0.0)
      invalid(path + "." + it.key(), "weight must be a non-negative number");
    out.emplace_back(it.key(), it.value().get<double>());
  }
  return out;
}

json weights_json(const Weights& w) {
  json out = json::object();
  for (const auto& [label, weight] : w) out[label] = weight;
  return out;
}

std::string_view mode_name(SynthSpec::Disclosure::Mode m) {
  switch (m) {
    case SynthSpec::Disclosure::Mode::None: return "none";
    case SynthSpec::Disclosure::Mode::FirstIndex: return "first_index";
    case SynthSpec::Disclosure::Mode::EveryMth: return "every_mth";
    case SynthSpec::Disclosure::Mode::Rate: return "rate";
  }
  return "none";
}

template <typename T>
T get_field(const json& j, const char* key, const std::string& path, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    if constexpr (std::is_unsigned_v<T>) {
      if (!it->is_number_integer() || it->get<long long>() < 0) invalid(path + "." + key, "expected a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) invalid(path + "." + key, "expected a number");
    }
    return it->get<T>();
  } catch (const json::exception&) {
    invalid(path + "." + key, "wrong type");
  }
}

void check_fraction(double v, const std::string& path) {
  if (!(v >= 0.0 && v <= 1.0)) invalid(path, "must be in [0, 1]");
}

// Filler must carry no signal: SAFE under the mock, no entity hits, no tokens.
void self_test_fillers() {
  static const bool ok = [] {
    for (auto kind : kAllStreamKinds) {
      for (auto text : filler_pool(kind)) {
        std::vector<std::string> payload{std::string(text)};
        auto prompt = llm::render(llm::TemplateId::Safety, std::nullopt, payload);
        if (llm::parse_verdict(llm::MockOracle::respond(prompt.text())) != llm::Verdict::Safe)
          throw Error("synth filler is not SAFE: " + std::string(text));
        if (!GazetteerFlagger::builtin().find(text).empty())
          throw Error("synth filler has an entity hit: " + std::string(text));
        if (text.find("((") != std::string_view::npos)
          throw Error("synth filler carries a token: " + std::string(text));
      }
    }
    return true;
  }();
  (void)ok;
}

std::string pick_filler(Rng& rng, StreamKind kind) {
  auto pool = filler_pool(kind);
  return std::string(pool[rng.below(pool.size())]);
}

std::size_t weighted_pick(Rng& rng, const Weights& w, const std::vector<bool>& allowed) {
  std::vector<double> weights;
  for (std::size_t i = 0; i < w.size(); ++i) weights.push_back(allowed[i] ? w[i].second : 0.0);
  return rng.weighted(weights);
}

// A valid label the mock never falls back to.
std::string decoy_label(Attribute attr) {
  const auto fallback = canonicalize(llm::MockOracle::default_label(attr));
  for (auto label : allowed_labels(attr))
    if (canonicalize(label) != fallback) return std::string(label);
  return fallback == "india" ? "Germany" : "India";
}

}  // namespace

std::span<const std::string_view> disclosure_sentences() { return kDisclosureSentences; }

std::span<const std::string_view> filler_pool(StreamKind kind) {
  switch (kind) {
    case StreamKind::ChatAssistant: return kChatFiller;
    case StreamKind::WebSearch:
    case StreamKind::VideoSearch: return kSearchFiller;
    case StreamKind::VideoWatch: return kWatchFiller;
  }
  return kChatFiller;
}

SynthSpec SynthSpec::from_json(const json& j) {
  if (!j.is_object()) invalid("spec", "expected an object");
  SynthSpec s;
  s.n_users = get_field<std::size_t>(j, "n_users", "spec", 0);
  s.seed = get_field<std::uint64_t>(j, "seed", "spec", 0);
  if (auto it = j.find("messages"); it != j.end()) {
    if (!it->is_object()) invalid("messages", "expected {min, max}");
    s.messages.min = get_field<std::size_t>(*it, "min", "messages", s.messages.min);
    s.messages.max = get_field<std::size_t>(*it, "max", "messages", s.messages.max);
  }
  if (auto it = j.find("demographics"); it != j.end()) {
    if (!it->is_object()) invalid("demographics", "expected an object");
    for (auto d = it->begin(); d != it->end(); ++d) {
      std::optional<Attribute> attr;
      for (auto a : kAllAttributes)
        if (profile_field(a) == d.key() || to_string(a) == d.key()) attr = a;
      if (!attr) invalid("demographics." + d.key(), "unknown attribute");
      s.demographics[*attr] = parse_weights(d.value(), "demographics." + d.key());
    }
  }
  s.extended_fraction = get_field<double>(j, "extended_fraction", "spec", 0.0);
  if (auto it = j.find("disclosure"); it != j.end()) {
    const auto& d = *it;
    if (!d.is_object()) invalid("disclosure", "expected an object");
    auto mode = get_field<std::string>(d, "mode", "disclosure", "none");
    if (mode == "none") s.disclosure.mode = Disclosure::Mode::None;
    else if (mode == "first_index") s.disclosure.mode = Disclosure::Mode::FirstIndex;
    else if (mode == "every_mth") s.disclosure.mode = Disclosure::Mode::EveryMth;
    else if (mode == "rate") s.disclosure.mode = Disclosure::Mode::Rate;
    else invalid("disclosure.mode", "expected none, first_index, every_mth or rate");
    s.disclosure.user_fraction = get_field<double>(d, "user_fraction", "disclosure", 1.0);
    if (d.contains("index") && !d["index"].is_null())
      s.disclosure.index = get_field<std::size_t>(d, "index", "disclosure", 0);
    s.disclosure.rate_after = get_field<double>(d, "rate_after", "disclosure", 0.0);
    s.disclosure.m = get_field<std::size_t>(d, "m", "disclosure", 4);
    s.disclosure.offset = get_field<std::size_t>(d, "offset", "disclosure", 0);
    s.disclosure.rate = get_field<double>(d, "rate", "disclosure", 0.3);
    if (d.contains("categories"))
      s.disclosure.categories = parse_weights(d["categories"], "disclosure.categories");
  }
  if (auto it = j.find("cues"); it != j.end()) {
    const auto& c = *it;
    if (!c.is_object()) invalid("cues", "expected an object");
    if (c.contains("attributes")) {
      if (!c["attributes"].is_array()) invalid("cues.attributes", "expected a list");
      for (std::size_t i = 0; i < c["attributes"].size(); ++i) {
        const auto& a = c["attributes"][i];
        auto attr = a.is_string() ? parse_attribute(a.get<std::string>()) : std::nullopt;
        if (!attr) invalid("cues.attributes[" + std::to_string(i) + "]", "unknown attribute");
        s.cues.attributes.push_back(*attr);
      }
    }
    s.cues.user_fraction = get_field<double>(c, "user_fraction", "cues", 1.0);
    if (c.contains("kinds")) {
      s.cues.kinds.clear();
      if (!c["kinds"].is_array()) invalid("cues.kinds", "expected a list");
      for (std::size_t i = 0; i < c["kinds"].size(); ++i) {
        const auto& k = c["kinds"][i];
        auto kind = k.is_string() ? parse_stream_kind(k.get<std::string>()) : std::nullopt;
        if (!kind) invalid("cues.kinds[" + std::to_string(i) + "]", "unknown stream kind");
        s.cues.kinds.push_back(*kind);
      }
    }
  }
  if (auto it = j.find("extra_streams"); it != j.end()) {
    if (!it->is_object()) invalid("extra_streams", "expected an object");
    for (auto e = it->begin(); e != it->end(); ++e) {
      auto kind = parse_stream_kind(e.key());
      if (!kind || *kind == StreamKind::ChatAssistant)
        invalid("extra_streams." + e.key(), "expected WebSearch, VideoSearch or VideoWatch");
      if (!e.value().is_number()) invalid("extra_streams." + e.key(), "expected a share in [0, 1]");
      s.extra_streams[*kind] = e.value().get<double>();
    }
  }
  s.validate();
  return s;
}

json SynthSpec::to_json() const {
  json demo = json::object();
  for (const auto& [attr, w] : demographics) demo[std::string(profile_field(attr))] = weights_json(w);
  json cue_attrs = json::array(), cue_kinds = json::array();
  for (auto a : cues.attributes) cue_attrs.push_back(to_string(a));
  for (auto k : cues.kinds) cue_kinds.push_back(to_string(k));
  json extra = json::object();
  for (const auto& [k, share] : extra_streams) extra[std::string(to_string(k))] = share;
  json disc = {{"mode", mode_name(disclosure.mode)},
               {"user_fraction", disclosure.user_fraction},
               {"index", disclosure.index ? json(*disclosure.index) : json(nullptr)},
               {"rate_after", disclosure.rate_after},
               {"m", disclosure.m},
               {"offset", disclosure.offset},
               {"rate", disclosure.rate},
               {"categories", weights_json(disclosure.categories)}};
  return {{"n_users", n_users},
          {"seed", seed},
          {"messages", {{"min", messages.min}, {"max", messages.max}}},
          {"demographics", demo},
          {"extended_fraction", extended_fraction},
          {"disclosure", disc},
          {"cues", {{"attributes", cue_attrs}, {"user_fraction", cues.user_fraction}, {"kinds", cue_kinds}}},
          {"extra_streams", extra}};
}

void SynthSpec::validate() const {
  if (messages.min < 1) invalid("messages.min", "must be at least 1");
  if (messages.max < messages.min) invalid("messages.max", "must be at least messages.min");
  check_fraction(extended_fraction, "extended_fraction");
  check_fraction(disclosure.user_fraction, "disclosure.user_fraction");
  check_fraction(disclosure.rate_after, "disclosure.rate_after");
  check_fraction(disclosure.rate, "disclosure.rate");
  check_fraction(cues.user_fraction, "cues.user_fraction");
  if (disclosure.mode == Disclosure::Mode::FirstIndex && disclosure.index &&
      *disclosure.index >= messages.min)
    invalid("disclosure.index", "must be below messages.min");
  if (disclosure.mode == Disclosure::Mode::EveryMth) {
    if (disclosure.m < 1) invalid("disclosure.m", "must be at least 1");
    if (disclosure.offset >= messages.min) invalid("disclosure.offset", "must be below messages.min");
  }
  for (const auto& [name, w] : disclosure.categories) {
    if (!match_category(name)) invalid("disclosure.categories." + name, "not one of the twenty categories");
  }
  for (const auto& [attr, w] : demographics) {
    std::string path = "demographics." + std::string(profile_field(attr));
    double total = 0.0;
    for (const auto& [label, weight] : w) {
      total += weight;
      if (attr != Attribute::Country) {
        auto allowed = allowed_labels(attr);
        bool ok = std::any_of(allowed.begin(), allowed.end(), [&](std::string_view l) {
          return canonicalize(l) == canonicalize(label);
        });
        if (!ok) invalid(path + "." + label, "not an allowed label");
      } else if (trim(label).empty()) {
        invalid(path, "empty country label");
      }
    }
    if (!(total > 0.0)) invalid(path, "weights must not all be zero");
  }
  for (const auto& [kind, share] : extra_streams)
    check_fraction(share, "extra_streams." + std::string(to_string(kind)));
}

std::optional<std::size_t> PlantedUser::first_flag_index() const {
  if (planted_indices.empty()) return std::nullopt;
  return planted_indices.front();
}

SynthCorpus generate(const SynthSpec& spec) {
  spec.validate();
  self_test_fillers();

  std::map<Attribute, Weights> demo;
  for (auto a : kAllAttributes) {
    auto it = spec.demographics.find(a);
    demo[a] = it != spec.demographics.end() ? it->second : uniform_weights(a);
  }
  Weights categories = spec.disclosure.categories;
  if (categories.empty())
    for (auto name : category_names()) categories.emplace_back(std::string(name), 1.0);

  Rng rng(spec.seed);
  SynthCorpus corpus;
  const int width = std::max<int>(4, static_cast<int>(std::to_string(spec.n_users).size()));
  for (std::size_t u = 0; u < spec.n_users; ++u) {
    char id[32];
    std::snprintf(id, sizeof id, "u%0*zu", width, u + 1);
    PlantedUser planted;
    planted.user_id = id;

    // Streams and their lengths.
    planted.lengths[StreamKind::ChatAssistant] = rng.between(spec.messages.min, spec.messages.max);
    for (const auto& [kind, share] : spec.extra_streams)
      if (rng.chance(share)) planted.lengths[kind] = rng.between(spec.messages.min, spec.messages.max);
    const bool extended = rng.chance(spec.extended_fraction);

    // Cue positions, per stream.
    const bool cued = !spec.cues.attributes.empty() && rng.chance(spec.cues.user_fraction);
    if (cued) {
      for (auto kind : spec.cues.kinds) {
        auto len = planted.lengths.find(kind);
        if (len == planted.lengths.end()) continue;
        for (auto attr : spec.cues.attributes) {
          if (is_extended(attr) && !extended) continue;
          planted.cues[kind][attr] = rng.below(len->second);
        }
      }
    }

    // Ground truth. The mock's fallback answer is only allowed where every
    // generated stream carries a cue for the attribute, so an uncued trace
    // can never match by accident.
    for (auto attr : kAllAttributes) {
      if (is_extended(attr) && !extended) continue;
      bool cued_everywhere = true;
      for (const auto& [kind, _] : planted.lengths) {
        auto c = planted.cues.find(kind);
        if (c == planted.cues.end() || !c->second.count(attr)) cued_everywhere = false;
      }
      const auto& w = demo[attr];
      std::vector<bool> allowed;
      bool any = false;
      for (const auto& [label, weight] : w) {
        bool ok = cued_everywhere ||
                  canonicalize(label) != canonicalize(llm::MockOracle::default_label(attr));
        allowed.push_back(ok);
        any = any || (ok && weight > 0.0);
      }
      if (!any)
        invalid("demographics." + std::string(profile_field(attr)),
                "only the mock fallback label has weight; uncued users need another label");
      auto label = w[weighted_pick(rng, w, allowed)].first;
      planted.profile.set_label(attr, normalize_label(attr, label));
    }

    // Disclosure plants on the chat stream.
    const auto n = planted.lengths[StreamKind::ChatAssistant];
    const auto& d = spec.disclosure;
    if (d.mode != SynthSpec::Disclosure::Mode::None && rng.chance(d.user_fraction)) {
      std::set<std::size_t> idx;
      switch (d.mode) {
        case SynthSpec::Disclosure::Mode::FirstIndex: {
          std::size_t first = d.index ? *d.index : rng.below(n);
          idx.insert(first);
          for (std::size_t i = first + 1; i < n; ++i)
            if (rng.chance(d.rate_after)) idx.insert(i);
          break;
        }
        case SynthSpec::Disclosure::Mode::EveryMth:
          for (std::size_t i = d.offset; i < n; i += d.m) idx.insert(i);
          break;
        case SynthSpec::Disclosure::Mode::Rate:
          for (std::size_t i = 0; i < n; ++i)
            if (rng.chance(d.rate)) idx.insert(i);
          break;
        case SynthSpec::Disclosure::Mode::None: break;
      }
      planted.planted_indices.assign(idx.begin(), idx.end());
      std::vector<bool> all(categories.size(), true);
      for (std::size_t k = 0; k < planted.planted_indices.size(); ++k)
        planted.planted_categories.push_back(categories[weighted_pick(rng, categories, all)].first);
    }

    // Message text.
    UserRecord user;
    user.user_id = planted.user_id;
    user.profile = planted.profile;
    for (const auto& [kind, len] : planted.lengths) {
      MessageStream stream{kind, {}};
      const auto cues = planted.cues.find(kind);
      for (std::size_t i = 0; i < len; ++i) {
        std::string text = pick_filler(rng, kind);
        if (kind == StreamKind::ChatAssistant) {
          auto p = std::lower_bound(planted.planted_indices.begin(), planted.planted_indices.end(), i);
          if (p != planted.planted_indices.end() && *p == i) {
            auto k = static_cast<std::size_t>(p - planted.planted_indices.begin());
            text += ". " + std::string(kDisclosureSentences[rng.below(std::size(kDisclosureSentences))]) +
                    " " + llm::category_token(planted.planted_categories[k]);
          }
        }
        if (cues != planted.cues.end()) {
          // A truth equal to the mock fallback would match before its cue;
          // an earlier wrong cue keeps every pre-cue answer wrong.
          if (i == 0)
            for (const auto& [attr, at] : cues->second)
              if (canonicalize(*planted.profile.label(attr)) ==
                  canonicalize(llm::MockOracle::default_label(attr)))
                text += " " + llm::cue_token(attr, decoy_label(attr));
          for (const auto& [attr, at] : cues->second)
            if (at == i) text += " " + llm::cue_token(attr, *planted.profile.label(attr));
        }
        Message m;
        m.index = i;
        m.timestamp = 1.7e9 + static_cast<double>(u) * 1e6 + static_cast<double>(i) * 3600.0;
        m.text = std::move(text);
        m.source = kind;
        stream.messages.push_back(std::move(m));
      }
      user.streams.emplace(kind, std::move(stream));
    }
    corpus.users.push_back(std::move(user));
    corpus.manifest.push_back(std::move(planted));
  }
  return corpus;
}

json SynthCorpus::manifest_json() const {
  json users_json = json::array();
  for (const auto& p : manifest) {
    json profile = json::object();
    for (auto a : kAllAttributes)
      if (auto v = p.profile.label(a); v && !v->empty()) profile[std::string(profile_field(a))] = *v;
    json lengths = json::object();
    for (const auto& [k, n] : p.lengths) lengths[std::string(to_string(k))] = n;
    json cues = json::object();
    for (const auto& [k, by_attr] : p.cues) {
      json c = json::object();
      for (const auto& [a, i] : by_attr) c[std::string(to_string(a))] = i;
      cues[std::string(to_string(k))] = c;
    }
    users_json.push_back({{"user_id", p.user_id},
                          {"profile", profile},
                          {"lengths", lengths},
                          {"planted_indices", p.planted_indices},
                          {"planted_categories", p.planted_categories},
                          {"first_flag_index", p.first_flag_index() ? json(*p.first_flag_index()) : json(nullptr)},
                          {"cues", cues}});
  }
  return {{"users", users_json}};
}

std::vector<PlantedUser> parse_manifest(const json& j) {
  std::vector<PlantedUser> out;
  try {
    for (const auto& u : j.at("users")) {
      PlantedUser p;
      p.user_id = u.at("user_id").get<std::string>();
      for (auto a : kAllAttributes) {
        auto field = std::string(profile_field(a));
        if (u.at("profile").contains(field)) p.profile.set_label(a, u["profile"][field].get<std::string>());
      }
      for (auto it = u.at("lengths").begin(); it != u["lengths"].end(); ++it)
        if (auto k = parse_stream_kind(it.key())) p.lengths[*k] = it.value().get<std::size_t>();
      p.planted_indices = u.at("planted_indices").get<std::vector<std::size_t>>();
      p.planted_categories = u.at("planted_categories").get<std::vector<std::string>>();
      for (auto it = u.at("cues").begin(); it != u["cues"].end(); ++it) {
        auto k = parse_stream_kind(it.key());
        if (!k) continue;
        for (auto c = it.value().begin(); c != it.value().end(); ++c)
          if (auto a = parse_attribute(c.key())) p.cues[*k][*a] = c.value().get<std::size_t>();
      }
      out.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed manifest: ") + e.what());
  }
  return out;
}

}  // namespace leakscope
