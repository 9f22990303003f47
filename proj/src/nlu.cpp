#include "rapport/nlu.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <set>

namespace rapport::nlu {

const char* to_string(TopicTrigger t) {
    return t == TopicTrigger::explicit_command ? "explicit_command" : "mention";
}

const char* to_string(WyrMatch::Outcome o) {
    switch (o) {
        case WyrMatch::Outcome::choice: return "choice";
        case WyrMatch::Outcome::both: return "both";
        case WyrMatch::Outcome::neither: return "neither";
        case WyrMatch::Outcome::no_match: break;
    }
    return "no_match";
}

const char* to_string(HypClass::Kind k) {
    switch (k) {
        case HypClass::Kind::substantive: return "substantive";
        case HypClass::Kind::matched_option: return "matched_option";
        case HypClass::Kind::struggle: return "struggle";
        case HypClass::Kind::refusal: return "refusal";
        case HypClass::Kind::no_match: break;
    }
    return "no_match";
}

const char* to_string(Affirmation a) {
    switch (a) {
        case Affirmation::yes: return "yes";
        case Affirmation::no: return "no";
        case Affirmation::unknown: break;
    }
    return "unknown";
}

namespace {

bool any_phrase(const std::vector<std::string>& tokens, const std::vector<std::vector<std::string>>& phrases) {
    return std::any_of(phrases.begin(), phrases.end(),
                       [&](const auto& p) { return contains_phrase(tokens, p); });
}

bool equals_any(const std::vector<std::string>& tokens, const std::vector<std::vector<std::string>>& phrases) {
    return std::any_of(phrases.begin(), phrases.end(), [&](const auto& p) { return p == tokens; });
}

// Marks every token covered by an occurrence of any phrase.
void cover(const std::vector<std::string>& tokens, const std::vector<std::vector<std::string>>& phrases,
           std::vector<bool>& covered) {
    for (const auto& p : phrases) {
        std::size_t pos = find_phrase(tokens, p);
        while (pos != std::string::npos) {
            for (std::size_t k = 0; k < p.size(); ++k) covered[pos + k] = true;
            pos = find_phrase(tokens, p, pos + 1);
        }
    }
}

bool option_matches(const std::vector<std::string>& tokens, const AnswerOption& opt, std::string* which) {
    std::size_t best = 0;
    for (const auto& phrase : opt.choice_phrases) {
        auto toks = tokenize(phrase);
        if (toks.size() > best && contains_phrase(tokens, toks)) {
            best = toks.size();
            if (which) *which = phrase;
        }
    }
    return best > 0;
}

std::optional<int> small_number(std::string_view tok) {
    static const std::array<const char*, 20> units = {
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
        "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};
    static const std::array<const char*, 10> tens = {"", "", "twenty", "thirty", "forty",
                                                     "fifty", "sixty", "seventy", "eighty", "ninety"};
    int value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec == std::errc() && ptr == tok.data() + tok.size()) return value;
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (tok == units[i]) return static_cast<int>(i);
    }
    for (std::size_t i = 2; i < tens.size(); ++i) {
        if (tok == tens[i]) return static_cast<int>(i * 10);
    }
    return std::nullopt;
}

// Reads a number word/digits at i, including "twenty five". Returns value and token count.
std::optional<std::pair<int, std::size_t>> number_at(const std::vector<std::string>& t, std::size_t i) {
    if (i >= t.size()) return std::nullopt;
    auto first = small_number(t[i]);
    if (!first) return std::nullopt;
    if (*first >= 20 && *first % 10 == 0 && *first < 100 && i + 1 < t.size()) {
        if (auto unit = small_number(t[i + 1]); unit && *unit > 0 && *unit < 10) {
            return std::pair{*first + *unit, std::size_t{2}};
        }
    }
    return std::pair{*first, std::size_t{1}};
}

bool is_grade_ordinal(std::string_view tok) {
    static const std::set<std::string_view> words = {"first", "second", "third", "fourth", "fifth", "sixth",
                                                     "seventh", "eighth", "ninth", "tenth", "eleventh", "twelfth"};
    if (words.count(tok)) return true;
    if (tok.size() >= 3) {
        auto suffix = tok.substr(tok.size() - 2);
        auto digits = tok.substr(0, tok.size() - 2);
        bool numeric = std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; });
        return numeric && (suffix == "st" || suffix == "nd" || suffix == "rd" || suffix == "th");
    }
    return false;
}

bool is_unit(std::string_view tok) {
    static const std::set<std::string_view> units = {"minutes", "minute", "hours", "hour", "days", "weeks",
                                                      "months", "feet", "foot", "miles", "percent", "dollars",
                                                      "times", "o'clock", "inches", "pounds"};
    return units.count(tok) > 0;
}

}  // namespace

std::vector<HobbyId> match_hobbies(const NormalizedUtterance& utt, const Gazetteer& gazetteer) {
    std::vector<HobbyId> out;
    for (const auto& hit : gazetteer.paraphrases().scan(utt.tokens)) {
        const auto& id = gazetteer.entries()[hit.payload].id;
        if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    }
    return out;
}

std::vector<TopicId> detect_topics(const NormalizedUtterance& utt, const TopicRegistry& registry) {
    std::vector<TopicId> out;
    for (const auto& hit : registry.expressions().scan(utt.tokens)) {
        const auto& id = registry.topics()[hit.payload].id;
        if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
    }
    return out;
}

std::optional<TopicRequest> resolve_topic_request(const NormalizedUtterance& utt, const TopicRegistry& registry,
                                                  const Lexicon& lexicon) {
    auto hits = registry.expressions().scan(utt.tokens);
    if (hits.empty()) return std::nullopt;
    // Earliest command occurrence; the referenced topic must follow it.
    std::size_t command_end = std::string::npos;
    for (const auto& cmd : lexicon.phrases("discuss_commands")) {
        auto pos = find_phrase(utt.tokens, cmd);
        if (pos != std::string::npos) command_end = std::min(command_end, pos + cmd.size());
    }
    if (command_end != std::string::npos) {
        for (const auto& hit : hits) {
            if (hit.begin >= command_end) {
                return TopicRequest{registry.topics()[hit.payload].id, TopicTrigger::explicit_command};
            }
        }
    }
    return TopicRequest{registry.topics()[hits.front().payload].id, TopicTrigger::mention};
}

std::optional<TopicId> resolve_menu_choice(const NormalizedUtterance& utt, const std::vector<TopicId>& offered,
                                           const TopicRegistry& registry, const Lexicon& lexicon) {
    auto mentioned = detect_topics(utt, registry);
    for (const auto& t : mentioned) {
        if (std::find(offered.begin(), offered.end(), t) != offered.end()) return t;
    }
    if (!mentioned.empty()) return mentioned.front();
    if (any_phrase(utt.tokens, lexicon.phrases("menu_rejections"))) return std::nullopt;
    static const std::array<const char*, 3> ordinals = {"ordinal_1", "ordinal_2", "ordinal_3"};
    for (std::size_t i = 0; i < ordinals.size() && i < offered.size(); ++i) {
        if (any_phrase(utt.tokens, lexicon.phrases(ordinals[i]))) return offered[i];
    }
    if (!offered.empty() && any_phrase(utt.tokens, lexicon.phrases("ordinal_last"))) return offered.back();
    return std::nullopt;
}

WyrMatch match_wyr_answer(const NormalizedUtterance& utt, const PoqItem& item, const Lexicon& lexicon) {
    WyrMatch m;
    if (utt.empty()) return m;
    if (any_phrase(utt.tokens, lexicon.phrases("both_markers"))) {
        m.outcome = WyrMatch::Outcome::both;
        return m;
    }
    std::vector<int> matched;
    std::string phrase;
    std::string chosen;
    for (std::size_t i = 0; i < item.expected_answers.size(); ++i) {
        if (option_matches(utt.tokens, item.expected_answers[i], &phrase)) {
            matched.push_back(static_cast<int>(i));
            chosen = phrase;
        }
    }
    if (matched.size() >= 2) {
        m.outcome = WyrMatch::Outcome::both;
    } else if (matched.size() == 1) {
        m.outcome = WyrMatch::Outcome::choice;
        m.index = matched.front();
        m.matched_phrase = chosen;
    } else if (any_phrase(utt.tokens, lexicon.phrases("neither_markers"))) {
        m.outcome = WyrMatch::Outcome::neither;
    }
    return m;
}

HypClass classify_hyp_answer(const NormalizedUtterance& utt, const PoqItem& item, const Lexicon& lexicon) {
    HypClass c;
    if (utt.empty()) return c;
    for (std::size_t i = 0; i < item.expected_answers.size(); ++i) {
        if (option_matches(utt.tokens, item.expected_answers[i], nullptr)) {
            c.kind = HypClass::Kind::matched_option;
            c.index = static_cast<int>(i);
            return c;
        }
    }
    if (any_phrase(utt.tokens, lexicon.phrases("refusal_markers"))) {
        c.kind = HypClass::Kind::refusal;
        return c;
    }
    std::vector<bool> hedged(utt.tokens.size(), false);
    cover(utt.tokens, lexicon.phrases("hedge_markers"), hedged);
    bool any_hedge = std::find(hedged.begin(), hedged.end(), true) != hedged.end();
    if (any_hedge) {
        cover(utt.tokens, lexicon.phrases("filler_words"), hedged);
        if (std::all_of(hedged.begin(), hedged.end(), [](bool b) { return b; })) {
            c.kind = HypClass::Kind::struggle;
            return c;
        }
    }
    if (static_cast<int>(utt.tokens.size()) >= lexicon.substantive_threshold) c.kind = HypClass::Kind::substantive;
    return c;
}

Affirmation detect_affirmation(const NormalizedUtterance& utt, const Lexicon& lexicon) {
    if (any_phrase(utt.tokens, lexicon.phrases("affirm_no"))) return Affirmation::no;
    if (any_phrase(utt.tokens, lexicon.phrases("affirm_yes"))) return Affirmation::yes;
    return Affirmation::unknown;
}

std::optional<OpinionRecord> detect_opinion(const NormalizedUtterance& utt, const TopicRegistry& registry,
                                            const Gazetteer& gazetteer, const Lexicon& lexicon, int turn_index) {
    std::optional<Polarity> polarity;
    if (any_phrase(utt.tokens, lexicon.phrases("negative_markers"))) {
        polarity = Polarity::negative;
    } else if (any_phrase(utt.tokens, lexicon.phrases("positive_markers"))) {
        polarity = Polarity::positive;
    }
    if (!polarity) return std::nullopt;
    OpinionRecord rec;
    rec.polarity = *polarity;
    rec.utterance = utt.raw.empty() ? utt.joined() : utt.raw;
    rec.turn_index = turn_index;
    if (auto topics = detect_topics(utt, registry); !topics.empty()) {
        rec.topic = topics.front();
    } else {
        for (const auto& hobby : match_hobbies(utt, gazetteer)) {
            const auto* h = gazetteer.find(hobby);
            if (h && !h->linked_topics.empty()) {
                rec.topic = h->linked_topics.front();
                break;
            }
        }
    }
    return rec;
}

std::optional<std::string> extract_name(const NormalizedUtterance& utt, const Lexicon& lexicon) {
    const auto& t = utt.tokens;
    if (t.empty()) return std::nullopt;
    auto is_stopword = [&](const std::string& tok) {
        return equals_any({tok}, lexicon.phrases("name_stopwords"));
    };
    for (const auto& prefix : lexicon.phrases("name_prefixes")) {
        auto pos = find_phrase(t, prefix);
        if (pos == std::string::npos) continue;
        auto at = pos + prefix.size();
        if (at < t.size() && !is_stopword(t[at])) return t[at];
    }
    // Bare answer: "sam" or "sam smith".
    if (t.size() <= 2 && !is_stopword(t[0]) && detect_affirmation(utt, lexicon) == Affirmation::unknown) return t[0];
    return std::nullopt;
}

std::optional<Occupation> detect_occupation(const NormalizedUtterance& utt, const Lexicon& lexicon) {
    if (any_phrase(utt.tokens, lexicon.phrases("student_markers"))) return Occupation::student;
    if (any_phrase(utt.tokens, lexicon.phrases("not_working_markers"))) return Occupation::none_stated;
    if (any_phrase(utt.tokens, lexicon.phrases("worker_markers"))) return Occupation::worker;
    return std::nullopt;
}

std::optional<AgeGroup> detect_age_signal(const NormalizedUtterance& utt, const Lexicon& lexicon) {
    const auto& t = utt.tokens;
    if (any_phrase(t, lexicon.phrases("child_cues"))) return AgeGroup::child;
    for (std::size_t i = 0; i < t.size(); ++i) {
        // "in 5th grade" / "in fifth grade"
        if (t[i] == "grade" && i >= 2 && t[i - 2] == "in" && is_grade_ordinal(t[i - 1])) return AgeGroup::child;
        auto num = number_at(t, i);
        if (!num) continue;
        auto [age, len] = *num;
        std::size_t after = i + len;
        bool years_old = after + 1 < t.size() && (t[after] == "years" || t[after] == "year") && t[after + 1] == "old";
        bool stated = i >= 1 && (t[i - 1] == "i'm" || t[i - 1] == "im" || (t[i - 1] == "am" && i >= 2 && t[i - 2] == "i"));
        if (!years_old && !stated) continue;
        if (stated && !years_old && after < t.size() && is_unit(t[after])) continue;  // "i'm 5 minutes away"
        if (age < 3 || age > 120) continue;
        return age < 18 ? AgeGroup::child : AgeGroup::adult;
    }
    return std::nullopt;
}

std::optional<std::string> extract_travel_destination(const NormalizedUtterance& utt, const Lexicon& lexicon) {
    std::vector<std::string> rest = utt.tokens;
    bool stripped = true;
    while (stripped && !rest.empty()) {
        stripped = false;
        std::size_t best = 0;
        for (const auto& p : lexicon.phrases("travel_prefixes")) {
            if (p.size() > best && p.size() <= rest.size() && std::equal(p.begin(), p.end(), rest.begin())) best = p.size();
        }
        if (best > 0) {
            rest.erase(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(best));
            stripped = true;
        }
    }
    if (rest.empty()) return std::nullopt;
    NormalizedUtterance r{join(rest, " "), rest};
    if (detect_affirmation(r, lexicon) == Affirmation::no) return std::nullopt;
    std::vector<bool> hedged(rest.size(), false);
    cover(rest, lexicon.phrases("hedge_markers"), hedged);
    cover(rest, lexicon.phrases("filler_words"), hedged);
    if (std::all_of(hedged.begin(), hedged.end(), [](bool b) { return b; })) return std::nullopt;
    return join(rest, " ");
}

bool is_stop_request(const NormalizedUtterance& utt, const Lexicon& lexicon) {
    return !utt.empty() && equals_any(utt.tokens, lexicon.phrases("stop_phrases"));
}

std::optional<std::size_t> match_persona_question(const NormalizedUtterance& utt, const PersonaFaq& faq) {
    std::optional<std::size_t> best;
    std::size_t best_len = 0;
    for (std::size_t i = 0; i < faq.entries.size(); ++i) {
        for (const auto& phrase : faq.entries[i].question_phrases) {
            auto toks = tokenize(phrase);
            if (toks.size() > best_len && contains_phrase(utt.tokens, toks)) {
                best = i;
                best_len = toks.size();
            }
        }
    }
    return best;
}

}  // namespace rapport::nlu
