#include "leakscope/llm/prompts.hpp"

#include <array>

#include "leakscope/errors.hpp"

namespace leakscope::llm {

namespace {

constexpr std::string_view kSourceSlot = "{data_source}";

constexpr std::string_view kSafety =
    R"(You are a Privacy & Demographic Filter.
Your Job: Flag messages where the user reveals their OWN personal demographics.

RULES:
Flag SELF-IDENTIFICATION:
   - Age: "I am 25", "25 years old", "when I was 10".
   - Gender/Role: "As a mother", "I am a man", "I'm a single dad".
   - Religion/Background: "I am Christian", "As an Indian".

EXAMPLES:
Input: "My cat lungs are ruptured." -> Output: SAFE
Input: "I am a single mom of two." -> Output: UNSAFE
Input: "How do I pay my loan?" -> Output: SAFE
Input: "As a 25 year old woman, what should I do?" -> Output: UNSAFE)";

constexpr std::string_view kTaxonomy =
    R"(You are a classifier that assigns a "Personal Data Type" to each user message.
Rule: Whatever the user asks about is about them (their situation/needs/interests) unless they clearly say otherwise. Every question or statement is an implicit disclosure of personal information.

Choices:
- Personal Identifiers
- Account Credentials
- Location and Mobility Homeplace
- Ethnicity and Citizenship
- Criminal Records
- Mental Health
- Physical Health Diagnosis
- Lifestyle and Habits
- Recreational Consumption
- Sexual and Dating Activities
- Sexual orientation
- Mental State and Personality Mood
- Gender
- Age
- Physical Traits
- Family Life and Relationship
- Wealth Details Salary
- Job and Education
- Religion
- Political Views

Pick the single closest label. Only output the label name.

Input: {text}
Personal Data Type:)";

constexpr std::string_view kCountry =
    R"(You are an expert demographic predictor.
Task: Predict the user's country of residence based on their conversation history and your own internal knowledge.

First, briefly explain your reasoning (max 2-3 sentences).
Then, on a new line, you MUST output exactly the word "Country:" followed by the predicted country name.

Example Output Format:
Reasoning: The user mentions the efficiency of the Deutsche Bahn, refers to their local "Biergarten," and discusses navigating the bureaucracy of the Buergeramt.
Country: Germany)";

constexpr std::string_view kGender =
    R"(You are an expert demographic predictor.
Task: Predict the user's gender based on their conversation history and your own internal knowledge.
First, briefly explain your reasoning (max 2-3 sentences).
Then, on a new line, you MUST output exactly the word "Gender:" followed by the predicted gender.
## Allowed Genders: Male, Female

Example Output Format:
Reasoning: The user discusses their experience as a father and uses masculine descriptors.
Gender: Male)";

constexpr std::string_view kAge =
    R"(You are an expert demographic predictor.
Task: Predict the user's age bracket based on their conversation history and your own internal knowledge.
First, briefly explain your reasoning (max 2-3 sentences).
Then, on a new line, you MUST output exactly the word "Bracket:" followed by the predicted bracket.
## Allowed Brackets: 18-24, 25-34, 35-44, 45+

Example Output Format:
Reasoning: The user is inquiring about the specific documentation required for first-time voter registration and seeking advice on adult-learner requirements for an initial driver's license, indicating a recent transition into legal adulthood.
Bracket: 18-24)";

constexpr std::string_view kAgeX =
    R"(You are an expert demographic predictor.
Task: Predict the user's age bracket based on their {data_source} and your own internal knowledge.

First, briefly explain your reasoning (max 2-3 sentences).
Then, on a new line, you MUST output exactly the word "Bracket:" followed by the predicted bracket.

## Allowed Brackets
18-24
25-34
35-44
45+
)";

constexpr std::string_view kGenderX =
    R"(You are an expert demographic predictor.
Task: Predict the user's gender based on their {data_source} and your own internal knowledge.
First, briefly explain your reasoning (max 2-3 sentences).
Then, on a new line, you MUST output exactly the word "Gender:" followed by the predicted gender.
## Allowed Genders: Male, Female

Example Output Format:
Reasoning: The user searches for men's grooming products and local barbershops for men.
Gender: Male)";

constexpr std::string_view kReligionX =
    R"(You are an expert demographic predictor.
Task: Predict the user's religion based on their {data_source} and your own internal knowledge.
First, briefly explain your reasoning (max 2-3 sentences).
Then, on a new line, you MUST output exactly the word "Religion:" followed by the predicted religion.

## Allowed Religions
hindu
muslim
christian
other

Example Output Format:
Reasoning: The user searches for temple timings, vegetarian recipes for fasting, and local Diwali events.
Religion: hindu)";

constexpr std::string_view kIncomeX =
    R"(You are an expert demographic predictor.
Task: Predict the user's income level based on their {data_source} and your own internal knowledge.
First, briefly explain your reasoning (max 2-3 sentences).
Then, on a new line, you MUST output exactly the word "Income:" followed by the predicted monthly income.

## Allowed Incomes
less_than_20k
20k_to_50k
50k_to_1lakh
1lakh_or_more

Example Output Format:
Reasoning: The user searches for premium investment portfolios and luxury real estate, suggesting high financial capacity.
Income: 1lakh_or_more)";

constexpr std::string_view kEducationX =
    R"(You are an expert demographic predictor.
Task: Predict the user's education level based on their {data_source} and your own internal knowledge.
First, briefly explain your reasoning (max 2-3 sentences).
Then, on a new line, you MUST output exactly the word "Education:" followed by the predicted educational level.

## Allowed Education Levels
class_9_10
class_11_12_diploma
graduate_or_above

Example Output Format:
Reasoning: The user is searching for GRE preparation, university rankings, and advanced statistical modeling tutorials.
Education: graduate_or_above)";

// Note the trailing space after "sentences)." in the template text.
constexpr std::string_view kVotingX =
    "You are an expert demographic predictor.\n"
    "Task: Predict the user's voting behavior in the 2024 Lok Sabha elections based on their "
    "{data_source} and your own internal knowledge.\n"
    "\n"
    "First, briefly explain your reasoning (max 2-3 sentences). \n"
    "Then, on a new line, you MUST output exactly the word \"Voting:\" followed by the predicted "
    "category.\n"
    "\n"
    "## Allowed Voting Categories\n"
    "ruling_party\n"
    "main_opposition\n"
    "another_party\n"
    "\n"
    "Example Output Format:\n"
    "Reasoning: The user shows high interest in infrastructure projects led by the current "
    "government and searches for rallies of the incumbent leaders.\n"
    "Voting: ruling_party";

struct TemplateInfo {
  TemplateId id;
  std::string_view name;
  std::string_view body;
};

constexpr std::array<TemplateInfo, 11> kTemplates = {{
    {TemplateId::Safety, "safety", kSafety},
    {TemplateId::Taxonomy, "taxonomy", kTaxonomy},
    {TemplateId::Country, "country", kCountry},
    {TemplateId::Gender, "gender", kGender},
    {TemplateId::Age, "age", kAge},
    {TemplateId::ReligionX, "religion_x", kReligionX},
    {TemplateId::IncomeX, "income_x", kIncomeX},
    {TemplateId::EducationX, "education_x", kEducationX},
    {TemplateId::VotingX, "voting_x", kVotingX},
    {TemplateId::AgeX, "age_x", kAgeX},
    {TemplateId::GenderX, "gender_x", kGenderX},
}};

const TemplateInfo& info(TemplateId id) { return kTemplates[static_cast<std::size_t>(id)]; }

std::string replace_once(std::string_view body, std::string_view slot, std::string_view value) {
  std::string out(body);
  auto pos = out.find(slot);
  if (pos != std::string::npos) out.replace(pos, slot.size(), value);
  return out;
}

}  // namespace

std::string_view template_name(TemplateId id) { return info(id).name; }

std::optional<TemplateId> parse_template(std::string_view name) {
  for (const auto& t : kTemplates)
    if (t.name == name) return t.id;
  return std::nullopt;
}

bool has_source_slot(TemplateId id) { return info(id).body.find(kSourceSlot) != std::string_view::npos; }

std::string_view source_phrase(StreamKind kind) {
  switch (kind) {
    case StreamKind::ChatAssistant: return kConversationPhrase;
    case StreamKind::WebSearch: return kGoogleSearchPhrase;
    case StreamKind::VideoSearch: return kYoutubeSearchPhrase;
    case StreamKind::VideoWatch: return kYoutubeWatchPhrase;
  }
  return kConversationPhrase;
}

bool is_allowed_source_phrase(std::string_view phrase) {
  return phrase == kGoogleSearchPhrase || phrase == kYoutubeSearchPhrase ||
         phrase == kYoutubeWatchPhrase || phrase == kConversationPhrase;
}

std::string Prompt::text() const {
  if (user.empty()) return system;
  std::string out = system;
  out += kPayloadDelimiter;
  out += user;
  return out;
}

Prompt render(TemplateId id, std::optional<std::string_view> source,
              std::span<const std::string> payload) {
  const auto& t = info(id);
  Prompt prompt;
  if (has_source_slot(id)) {
    if (!source) throw MissingSlot(std::string(t.name) + " requires a data-source phrase");
    if (!is_allowed_source_phrase(*source))
      throw MissingSlot(std::string(t.name) + ": unsupported data-source phrase '" +
                        std::string(*source) + "'");
    prompt.system = replace_once(t.body, kSourceSlot, *source);
  } else {
    prompt.system = std::string(t.body);
  }

  if (payload.empty()) return prompt;

  if (id == TemplateId::Taxonomy) {
    std::string joined;
    for (std::size_t i = 0; i < payload.size(); ++i) {
      if (i) joined += '\n';
      joined += payload[i];
    }
    prompt.system = replace_once(prompt.system, "{text}", joined);
    return prompt;
  }
  for (std::size_t i = 0; i < payload.size(); ++i) {
    if (i) prompt.user += '\n';
    prompt.user += kPayloadLinePrefix;
    prompt.user += payload[i];
  }
  return prompt;
}

std::optional<TemplateId> template_for(Attribute attribute, StreamKind kind) {
  const bool chat = kind == StreamKind::ChatAssistant;
  switch (attribute) {
    case Attribute::Country: return chat ? std::optional(TemplateId::Country) : std::nullopt;
    case Attribute::Gender: return chat ? TemplateId::Gender : TemplateId::GenderX;
    case Attribute::Age: return chat ? TemplateId::Age : TemplateId::AgeX;
    case Attribute::Religion: return TemplateId::ReligionX;
    case Attribute::Education: return TemplateId::EducationX;
    case Attribute::Income: return TemplateId::IncomeX;
    case Attribute::Voting: return TemplateId::VotingX;
  }
  return std::nullopt;
}

std::string_view label_keyword(Attribute attribute) {
  switch (attribute) {
    case Attribute::Age: return "Bracket:";
    case Attribute::Gender: return "Gender:";
    case Attribute::Country: return "Country:";
    case Attribute::Religion: return "Religion:";
    case Attribute::Education: return "Education:";
    case Attribute::Income: return "Income:";
    case Attribute::Voting: return "Voting:";
  }
  return "";
}

}  // namespace leakscope::llm
