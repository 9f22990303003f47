#include "rapport/serialization.hpp"

namespace rapport {

using nlohmann::json;

namespace {

template <typename T>
T parse_enum(const json& j, std::optional<T> (*parse)(std::string_view), const char* what) {
    auto v = parse(j.get<std::string>());
    if (!v) throw json::other_error::create(501, std::string("bad ") + what + " value", &j);
    return *v;
}

}  // namespace

void to_json(json& j, const OpinionRecord& r) {
    j = json{{"polarity", to_string(r.polarity)}, {"utterance", r.utterance}, {"turn_index", r.turn_index}};
    j["topic"] = r.topic ? json(*r.topic) : json(nullptr);
}

void from_json(const json& j, OpinionRecord& r) {
    r.polarity = parse_enum(j.at("polarity"), parse_polarity, "polarity");
    r.utterance = j.at("utterance").get<std::string>();
    r.turn_index = j.at("turn_index").get<int>();
    if (j.contains("topic") && !j["topic"].is_null()) {
        r.topic = j["topic"].get<std::string>();
    } else {
        r.topic.reset();
    }
}

void to_json(json& j, const UserModel& m) {
    j = json{{"user_id", m.user_id},
             {"age_group", to_string(m.age_group)},
             {"hobbies", m.hobbies},
             {"topic_interests", m.topic_interests},
             {"opinions", m.opinions},
             {"travel_interests", m.travel_interests},
             {"occupation", to_string(m.occupation)},
             {"advice_feedback", m.advice_feedback},
             {"conversation_count", m.conversation_count}};
    j["name"] = m.name ? json(*m.name) : json(nullptr);
}

void from_json(const json& j, UserModel& m) {
    m.user_id = j.at("user_id").get<std::string>();
    if (j.contains("name") && !j["name"].is_null()) {
        m.name = j["name"].get<std::string>();
    } else {
        m.name.reset();
    }
    m.age_group = parse_enum(j.at("age_group"), parse_age_group, "age_group");
    m.hobbies = j.at("hobbies").get<std::map<HobbyId, Timestamp>>();
    m.topic_interests = j.at("topic_interests").get<std::map<TopicId, int>>();
    m.opinions = j.at("opinions").get<std::vector<OpinionRecord>>();
    m.travel_interests = j.at("travel_interests").get<std::vector<std::string>>();
    m.occupation = parse_enum(j.at("occupation"), parse_occupation, "occupation");
    m.advice_feedback = j.at("advice_feedback").get<std::vector<std::string>>();
    m.conversation_count = j.at("conversation_count").get<std::uint64_t>();
}

json event_to_json(const UserModelEvent& e) {
    struct Visitor {
        json operator()(const event::NameStated& v) const { return {{"name", v.name}}; }
        json operator()(const event::HobbyDetected& v) const { return {{"hobby", v.hobby}}; }
        json operator()(const event::OpinionStated& v) const { return {{"opinion", v.opinion}}; }
        json operator()(const event::TopicRequested& v) const { return {{"topic", v.topic}}; }
        json operator()(const event::AgeSignal& v) const { return {{"age", to_string(v.age)}}; }
        json operator()(const event::TravelInterest& v) const { return {{"place", v.place}}; }
        json operator()(const event::OccupationSignal& v) const { return {{"occupation", to_string(v.occupation)}}; }
        json operator()(const event::AdviceGiven& v) const { return {{"text", v.text}}; }
    };
    json j = std::visit(Visitor{}, e);
    j["type"] = event_name(e);
    return j;
}

UserModelEvent event_from_json(const json& j) {
    auto type = j.at("type").get<std::string>();
    if (type == "NameStated") return event::NameStated{j.at("name").get<std::string>()};
    if (type == "HobbyDetected") return event::HobbyDetected{j.at("hobby").get<std::string>()};
    if (type == "OpinionStated") return event::OpinionStated{j.at("opinion").get<OpinionRecord>()};
    if (type == "TopicRequested") return event::TopicRequested{j.at("topic").get<std::string>()};
    if (type == "AgeSignal") return event::AgeSignal{parse_enum(j.at("age"), parse_age_group, "age")};
    if (type == "TravelInterest") return event::TravelInterest{j.at("place").get<std::string>()};
    if (type == "OccupationSignal") {
        return event::OccupationSignal{parse_enum(j.at("occupation"), parse_occupation, "occupation")};
    }
    if (type == "AdviceGiven") return event::AdviceGiven{j.at("text").get<std::string>()};
    throw json::other_error::create(501, "unknown event type " + type, &j);
}

}  // namespace rapport
