#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rapport/content_bank.hpp"
#include "rapport/text.hpp"
#include "rapport/user_model.hpp"

// Deterministic rule-based understanding over normalized token sequences.
// Every matcher is a pure function of the utterance and the (immutable) bank.
namespace rapport::nlu {

enum class TopicTrigger { explicit_command, mention };
const char* to_string(TopicTrigger t);

struct TopicRequest {
    TopicId topic;
    TopicTrigger trigger;

    bool operator==(const TopicRequest&) const = default;
};

struct WyrMatch {
    enum class Outcome { choice, both, neither, no_match };
    Outcome outcome = Outcome::no_match;
    int index = -1;  // valid only for choice
    std::optional<std::string> matched_phrase;

    bool operator==(const WyrMatch&) const = default;
};
const char* to_string(WyrMatch::Outcome o);

struct HypClass {
    enum class Kind { substantive, matched_option, struggle, refusal, no_match };
    Kind kind = Kind::no_match;
    int index = -1;  // valid only for matched_option

    bool operator==(const HypClass&) const = default;
};
const char* to_string(HypClass::Kind k);

enum class Affirmation { yes, no, unknown };
const char* to_string(Affirmation a);

std::vector<HobbyId> match_hobbies(const NormalizedUtterance& utt, const Gazetteer& gazetteer);

// Topics referenced in the utterance, duplicate-free, in utterance order.
std::vector<TopicId> detect_topics(const NormalizedUtterance& utt, const TopicRegistry& registry);

std::optional<TopicRequest> resolve_topic_request(const NormalizedUtterance& utt, const TopicRegistry& registry,
                                                  const Lexicon& lexicon);

// Picks the offered topic the user chose. A matching topic outside `offered`
// is also returned; the caller treats it as a fresh request.
std::optional<TopicId> resolve_menu_choice(const NormalizedUtterance& utt, const std::vector<TopicId>& offered,
                                           const TopicRegistry& registry, const Lexicon& lexicon);

WyrMatch match_wyr_answer(const NormalizedUtterance& utt, const PoqItem& item, const Lexicon& lexicon);

HypClass classify_hyp_answer(const NormalizedUtterance& utt, const PoqItem& item, const Lexicon& lexicon);

Affirmation detect_affirmation(const NormalizedUtterance& utt, const Lexicon& lexicon);

std::optional<OpinionRecord> detect_opinion(const NormalizedUtterance& utt, const TopicRegistry& registry,
                                            const Gazetteer& gazetteer, const Lexicon& lexicon,
                                            int turn_index = 0);

// Intro-sequence extractors.
std::optional<std::string> extract_name(const NormalizedUtterance& utt, const Lexicon& lexicon);
std::optional<Occupation> detect_occupation(const NormalizedUtterance& utt, const Lexicon& lexicon);
std::optional<AgeGroup> detect_age_signal(const NormalizedUtterance& utt, const Lexicon& lexicon);
std::optional<std::string> extract_travel_destination(const NormalizedUtterance& utt, const Lexicon& lexicon);

bool is_stop_request(const NormalizedUtterance& utt, const Lexicon& lexicon);

// Index of the best-matching persona FAQ entry, if any.
std::optional<std::size_t> match_persona_question(const NormalizedUtterance& utt, const PersonaFaq& faq);

}  // namespace rapport::nlu
