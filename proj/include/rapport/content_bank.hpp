#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "rapport/error.hpp"
#include "rapport/text.hpp"

namespace rapport {

using TopicId = std::string;
using HobbyId = std::string;
using PoqId = std::string;

enum class PoqKind { wyr, hyp };

const char* to_string(PoqKind kind);
std::optional<PoqKind> parse_poq_kind(std::string_view s);

struct TopicEntry {
    TopicId id;
    std::string display_name;
    std::vector<std::string> referential_expressions;
    bool has_poq = false;
    bool menu_eligible = true;
    bool placeholder = false;
    // Authored on-topic prompts, consumed in order while the topic is active.
    std::vector<std::string> subdialogues;

    bool operator==(const TopicEntry&) const = default;
};

class TopicRegistry {
public:
    TopicRegistry() = default;
    explicit TopicRegistry(std::vector<TopicEntry> topics);

    const std::vector<TopicEntry>& topics() const { return topics_; }
    const TopicEntry* find(std::string_view id) const;
    // Registry position, used as the stable tie-break order.
    std::optional<std::size_t> position(std::string_view id) const;
    std::size_t size() const { return topics_.size(); }
    bool operator==(const TopicRegistry& o) const { return topics_ == o.topics_; }

    // Referential expression lookup, longest match first.
    const PhraseIndex& expressions() const { return expressions_; }

private:
    std::vector<TopicEntry> topics_;
    std::unordered_map<std::string, std::size_t> by_id_;
    PhraseIndex expressions_;
};

struct HobbyEntry {
    HobbyId id;
    std::string display_name;
    std::vector<std::string> paraphrases;
    std::vector<TopicId> linked_topics;

    bool operator==(const HobbyEntry&) const = default;
};

class Gazetteer {
public:
    Gazetteer() = default;
    explicit Gazetteer(std::vector<HobbyEntry> entries);

    const std::vector<HobbyEntry>& entries() const { return entries_; }
    const HobbyEntry* find(std::string_view id) const;
    const PhraseIndex& paraphrases() const { return paraphrases_; }
    std::size_t size() const { return entries_.size(); }
    bool operator==(const Gazetteer& o) const { return entries_ == o.entries_; }

private:
    std::vector<HobbyEntry> entries_;
    std::unordered_map<std::string, std::size_t> by_id_;
    PhraseIndex paraphrases_;
};

struct AnswerOption {
    std::vector<std::string> choice_phrases;
    std::string grounding;

    bool operator==(const AnswerOption&) const = default;
};

struct PoqItem {
    PoqId id;
    TopicId topic;
    PoqKind kind = PoqKind::wyr;
    std::string question_text;
    std::vector<AnswerOption> expected_answers;
    std::string generic_grounding;
    std::string agent_opinion;
    bool kid_friendly = false;
    std::optional<std::string> persona_note;

    bool operator==(const PoqItem&) const = default;
};

// One scripted question inside an intro stage. When `branch` is set the
// user's reply is classified yes/no/unknown and answered from it.
struct IntroStep {
    std::string prompt;
    struct Branch {
        std::string yes;
        std::string no;
        std::string unknown;

        bool operator==(const Branch&) const = default;
    };
    std::optional<Branch> branch;

    bool operator==(const IntroStep&) const = default;
};

struct IntroStage {
    std::string id;
    std::vector<IntroStep> steps;
    std::string ack;
    std::string hobby_ack;  // "{hobby}" is substituted with the hobby name

    bool operator==(const IntroStage&) const = default;
};

struct Icebreaker {
    std::string id;
    std::string text;

    bool operator==(const Icebreaker&) const = default;
};

struct IntroScript {
    std::string greeting_new;
    std::string greeting_returning;  // "{name}"
    std::string name_ack;            // "{name}"
    std::string name_fallback;
    std::vector<IntroStage> stages;  // recent_activities, work_school, travel, fun_hobbies
    std::string advice_preface;
    std::vector<Icebreaker> icebreakers;
    std::string advice_ack;
    std::string invite_question;
    std::string handoff;             // "{topic}"
    std::string topic_request_ack;   // "{topic}"
    std::string menu_prompt;         // "{options}"
    std::string menu_retry;
    std::string topic_exhausted;     // "{topic}"
    std::string filler;              // "{topic}"
    std::string closing;
    std::string neutral_ack;

    const IntroStage* stage(std::string_view id) const;

    bool operator==(const IntroScript&) const = default;
};

struct PersonaFaqEntry {
    std::vector<std::string> question_phrases;
    std::string answer_text;

    bool operator==(const PersonaFaqEntry&) const = default;
};

struct PersonaFaq {
    std::vector<PersonaFaqEntry> entries;
    std::string fallback;

    bool operator==(const PersonaFaq&) const = default;
};

// Marker phrase lists used by the rule-based matchers.
struct Lexicon {
    std::map<std::string, std::vector<std::string>> raw_phrases;
    std::map<std::string, std::vector<std::vector<std::string>>> phrase_lists;  // tokenized raw_phrases
    std::map<std::string, std::vector<std::string>> text_lists;

    const std::vector<std::vector<std::string>>& phrases(const std::string& name) const;
    const std::vector<std::string>& texts(const std::string& name) const;
    int substantive_threshold = 4;

    bool operator==(const Lexicon&) const = default;
};

// Phrase lists the lexicon must define.
const std::vector<std::string>& required_lexicon_lists();
// Text lists (free-form strings used in responses).
const std::vector<std::string>& required_lexicon_texts();

struct ContentBank {
    std::string version;
    TopicRegistry registry;
    Gazetteer gazetteer;
    std::vector<PoqItem> poq_bank;
    IntroScript intro_script;
    PersonaFaq persona_faq;
    Lexicon lexicon;

    const PoqItem* find_poq(std::string_view id) const;

    bool operator==(const ContentBank&) const = default;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool empty() const { return violations.empty(); }
    bool ok() const { return violations.empty(); }
};

// File names inside a bank directory.
namespace asset {
inline constexpr const char* topics = "topics.json";
inline constexpr const char* hobbies = "hobbies.jsonl";
inline constexpr const char* poq = "poq.jsonl";
inline constexpr const char* intro = "intro.json";
inline constexpr const char* persona = "persona.json";
inline constexpr const char* lexicon = "lexicon.json";
}  // namespace asset

// Loads and validates every asset in `data_dir`. Throws MissingAsset,
// ParseError or ValidationError (carrying every violation found).
ContentBank load_assets(const std::filesystem::path& data_dir);

// Parses without validating; used by tooling that wants the report itself.
ContentBank parse_assets(const std::filesystem::path& data_dir);

ValidationReport validate_bank(const ContentBank& bank);

// Default bank directory: $RAPPORT_DATA_DIR, else the compiled-in path.
std::filesystem::path default_data_dir();

}  // namespace rapport
