#include "rapport/user_model.hpp"

#include <algorithm>
#include <set>

namespace rapport {

const char* to_string(AgeGroup a) {
    switch (a) {
        case AgeGroup::adult: return "adult";
        case AgeGroup::child: return "child";
        case AgeGroup::unknown: break;
    }
    return "unknown";
}

const char* to_string(Occupation o) {
    switch (o) {
        case Occupation::worker: return "worker";
        case Occupation::student: return "student";
        case Occupation::none_stated: return "none_stated";
        case Occupation::unknown: break;
    }
    return "unknown";
}

const char* to_string(Polarity p) {
    return p == Polarity::positive ? "positive" : "negative";
}

std::optional<AgeGroup> parse_age_group(std::string_view s) {
    if (s == "adult") return AgeGroup::adult;
    if (s == "child") return AgeGroup::child;
    if (s == "unknown") return AgeGroup::unknown;
    return std::nullopt;
}

std::optional<Occupation> parse_occupation(std::string_view s) {
    if (s == "worker") return Occupation::worker;
    if (s == "student") return Occupation::student;
    if (s == "none_stated") return Occupation::none_stated;
    if (s == "unknown") return Occupation::unknown;
    return std::nullopt;
}

std::optional<Polarity> parse_polarity(std::string_view s) {
    if (s == "positive") return Polarity::positive;
    if (s == "negative") return Polarity::negative;
    return std::nullopt;
}

int UserModel::interest(std::string_view topic) const {
    auto it = topic_interests.find(std::string(topic));
    return it == topic_interests.end() ? 0 : it->second;
}

UserModel fresh_user(std::string user_id) {
    UserModel m;
    m.user_id = std::move(user_id);
    return m;
}

const char* event_name(const UserModelEvent& e) {
    struct Visitor {
        const char* operator()(const event::NameStated&) const { return "NameStated"; }
        const char* operator()(const event::HobbyDetected&) const { return "HobbyDetected"; }
        const char* operator()(const event::OpinionStated&) const { return "OpinionStated"; }
        const char* operator()(const event::TopicRequested&) const { return "TopicRequested"; }
        const char* operator()(const event::AgeSignal&) const { return "AgeSignal"; }
        const char* operator()(const event::TravelInterest&) const { return "TravelInterest"; }
        const char* operator()(const event::OccupationSignal&) const { return "OccupationSignal"; }
        const char* operator()(const event::AdviceGiven&) const { return "AdviceGiven"; }
    };
    return std::visit(Visitor{}, e);
}

UserModel apply_event(UserModel model, const UserModelEvent& ev, Timestamp at) {
    struct Visitor {
        UserModel& m;
        Timestamp at;

        void operator()(const event::NameStated& e) const { m.name = e.name; }
        void operator()(const event::HobbyDetected& e) const { m.hobbies.emplace(e.hobby, at); }
        void operator()(const event::OpinionStated& e) const {
            m.opinions.push_back(e.opinion);
            if (e.opinion.topic) m.topic_interests[*e.opinion.topic] += e.opinion.polarity == Polarity::positive ? 1 : -1;
        }
        void operator()(const event::TopicRequested& e) const { m.topic_interests[e.topic] += 1; }
        void operator()(const event::AgeSignal& e) const { m.age_group = e.age; }
        void operator()(const event::TravelInterest& e) const {
            if (std::find(m.travel_interests.begin(), m.travel_interests.end(), e.place) == m.travel_interests.end()) {
                m.travel_interests.push_back(e.place);
            }
        }
        void operator()(const event::OccupationSignal& e) const { m.occupation = e.occupation; }
        void operator()(const event::AdviceGiven& e) const { m.advice_feedback.push_back(e.text); }
    };
    std::visit(Visitor{model, at}, ev);
    return model;
}

std::vector<TopicId> rank_topics(const UserModel& model, const TopicRegistry& registry, const Gazetteer& gazetteer) {
    std::set<TopicId> linked;
    for (const auto& [hobby, _] : model.hobbies) {
        if (const auto* h = gazetteer.find(hobby)) linked.insert(h->linked_topics.begin(), h->linked_topics.end());
    }
    struct Key {
        bool linked;
        int score;
        std::size_t pos;
    };
    std::vector<std::pair<Key, TopicId>> keyed;
    const auto& topics = registry.topics();
    for (std::size_t i = 0; i < topics.size(); ++i) {
        keyed.push_back({Key{linked.count(topics[i].id) > 0, model.interest(topics[i].id), i}, topics[i].id});
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.first.linked != b.first.linked) return a.first.linked;
        if (a.first.score != b.first.score) return a.first.score > b.first.score;
        return a.first.pos < b.first.pos;
    });
    std::vector<TopicId> out;
    out.reserve(keyed.size());
    for (auto& [_, id] : keyed) out.push_back(std::move(id));
    return out;
}

}  // namespace rapport
