#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rapport/content_bank.hpp"

namespace rapport {

// Milliseconds since the Unix epoch.
using Timestamp = std::int64_t;

enum class AgeGroup { adult, child, unknown };
enum class Occupation { worker, student, none_stated, unknown };
enum class Polarity { positive, negative };

const char* to_string(AgeGroup a);
const char* to_string(Occupation o);
const char* to_string(Polarity p);
std::optional<AgeGroup> parse_age_group(std::string_view s);
std::optional<Occupation> parse_occupation(std::string_view s);
std::optional<Polarity> parse_polarity(std::string_view s);

struct OpinionRecord {
    std::optional<TopicId> topic;
    Polarity polarity = Polarity::positive;
    std::string utterance;
    int turn_index = 0;

    bool operator==(const OpinionRecord&) const = default;
};

struct UserModel {
    std::string user_id;
    std::optional<std::string> name;
    AgeGroup age_group = AgeGroup::unknown;
    std::map<HobbyId, Timestamp> hobbies;  // hobby -> first seen
    std::map<TopicId, int> topic_interests;
    std::vector<OpinionRecord> opinions;
    std::vector<std::string> travel_interests;
    Occupation occupation = Occupation::unknown;
    std::vector<std::string> advice_feedback;
    std::uint64_t conversation_count = 0;

    bool operator==(const UserModel&) const = default;

    bool is_child() const { return age_group == AgeGroup::child; }
    int interest(std::string_view topic) const;
};

UserModel fresh_user(std::string user_id);

namespace event {
struct NameStated {
    std::string name;
    bool operator==(const NameStated&) const = default;
};
struct HobbyDetected {
    HobbyId hobby;
    bool operator==(const HobbyDetected&) const = default;
};
struct OpinionStated {
    OpinionRecord opinion;
    bool operator==(const OpinionStated&) const = default;
};
struct TopicRequested {
    TopicId topic;
    bool operator==(const TopicRequested&) const = default;
};
struct AgeSignal {
    AgeGroup age;  // child or adult
    bool operator==(const AgeSignal&) const = default;
};
struct TravelInterest {
    std::string place;
    bool operator==(const TravelInterest&) const = default;
};
struct OccupationSignal {
    Occupation occupation;  // worker, student or none_stated
    bool operator==(const OccupationSignal&) const = default;
};
struct AdviceGiven {
    std::string text;
    bool operator==(const AdviceGiven&) const = default;
};
}  // namespace event

using UserModelEvent = std::variant<event::NameStated, event::HobbyDetected, event::OpinionStated,
                                    event::TopicRequested, event::AgeSignal, event::TravelInterest,
                                    event::OccupationSignal, event::AdviceGiven>;

const char* event_name(const UserModelEvent& e);

// Pure update. `at` stamps first-seen hobbies.
UserModel apply_event(UserModel model, const UserModelEvent& event, Timestamp at = 0);

// Registry topics ordered for promotion: hobby-linked topics first, then by
// interest score (descending), then registry order.
std::vector<TopicId> rank_topics(const UserModel& model, const TopicRegistry& registry, const Gazetteer& gazetteer);

}  // namespace rapport
