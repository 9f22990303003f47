#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <thread>

#include "../support/paths.hpp"
#include "rapport/serialization.hpp"
#include "rapport/user_model.hpp"
#include "rapport/user_store.hpp"

using namespace rapport;
using testing_support::TempDir;

namespace {

const ContentBank& bank() { return testing_support::shipped_bank(); }

UserModelEvent random_event(std::mt19937& rng) {
    const std::vector<std::string> topics{"sports", "movies", "animals", "food", "music"};
    const std::vector<std::string> hobbies{"swimming", "chess", "gaming", "piano", "reading"};
    auto pick = [&](const std::vector<std::string>& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };
    switch (std::uniform_int_distribution<int>(0, 7)(rng)) {
        case 0: return event::NameStated{pick({"sam", "alex", "kim"})};
        case 1: return event::HobbyDetected{pick(hobbies)};
        case 2: {
            OpinionRecord op;
            if (rng() % 4) op.topic = pick(topics);
            op.polarity = rng() % 2 ? Polarity::positive : Polarity::negative;
            op.utterance = "i feel something";
            op.turn_index = static_cast<int>(rng() % 50);
            return event::OpinionStated{op};
        }
        case 3: return event::TopicRequested{pick(topics)};
        case 4: return event::AgeSignal{rng() % 2 ? AgeGroup::child : AgeGroup::adult};
        case 5: return event::TravelInterest{pick({"hawaii", "paris", "tokyo"})};
        case 6: return event::OccupationSignal{rng() % 2 ? Occupation::student : Occupation::worker};
        default: return event::AdviceGiven{"talk more about space"};
    }
}

UserModel sample_model() {
    UserModel m = fresh_user("u-1");
    m = apply_event(m, event::NameStated{"Sam"});
    for (const char* h : {"swimming", "chess", "piano"}) m = apply_event(m, event::HobbyDetected{h}, 1000);
    m = apply_event(m, event::OpinionStated{{TopicId("sports"), Polarity::positive, "i love sports", 4}});
    m = apply_event(m, event::OpinionStated{{std::nullopt, Polarity::negative, "that is boring", 9}});
    m = apply_event(m, event::OccupationSignal{Occupation::student});
    m = apply_event(m, event::TravelInterest{"hawaii"});
    m = apply_event(m, event::AdviceGiven{"have a different voice"});
    m.conversation_count = 2;
    return m;
}

}  // namespace

TEST_CASE("hobbies accumulate as a set") {
    auto m = fresh_user("u");
    m = apply_event(m, event::HobbyDetected{"swimming"}, 10);
    m = apply_event(m, event::HobbyDetected{"chess"}, 20);
    CHECK(m.hobbies.size() == 2);
    CHECK(m.hobbies.count("swimming"));
    CHECK(m.hobbies.count("chess"));

    auto again = apply_event(m, event::HobbyDetected{"swimming"}, 99);
    CHECK(again == m);
    CHECK(again.hobbies.at("swimming") == 10);
}

TEST_CASE("occupation signal") {
    auto m = apply_event(fresh_user("u"), event::OccupationSignal{Occupation::student});
    CHECK(m.occupation == Occupation::student);
    CHECK(m.age_group == AgeGroup::unknown);
    CHECK(m.hobbies.empty());
}

TEST_CASE("opinions move interest by one in their direction") {
    auto m = fresh_user("u");
    m = apply_event(m, event::OpinionStated{{TopicId("movies"), Polarity::positive, "i love movies", 1}});
    m = apply_event(m, event::OpinionStated{{TopicId("movies"), Polarity::positive, "i love films", 2}});
    m = apply_event(m, event::OpinionStated{{TopicId("animals"), Polarity::negative, "i hate animals", 3}});
    m = apply_event(m, event::TopicRequested{"animals"});
    CHECK(m.interest("movies") == 2);
    CHECK(m.interest("animals") == 0);
    CHECK(m.interest("food") == 0);
    CHECK(m.opinions.size() == 3);
}

TEST_CASE("event replay matches incremental updates and the brute force interest count") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<UserModelEvent> log;
        auto live = fresh_user("u");
        int n = std::uniform_int_distribution<int>(0, 40)(rng);
        for (int i = 0; i < n; ++i) {
            auto e = random_event(rng);
            log.push_back(e);
            live = apply_event(live, e, i);
        }
        // Replay through the serialized form.
        auto replayed = fresh_user("u");
        for (std::size_t i = 0; i < log.size(); ++i)
            replayed = apply_event(replayed, event_from_json(event_to_json(log[i])), static_cast<Timestamp>(i));
        CHECK(replayed == live);

        std::map<TopicId, int> expected;
        for (const auto& e : log) {
            if (const auto* op = std::get_if<event::OpinionStated>(&e)) {
                if (op->opinion.topic) expected[*op->opinion.topic] += op->opinion.polarity == Polarity::positive ? 1 : -1;
            } else if (const auto* req = std::get_if<event::TopicRequested>(&e)) {
                expected[req->topic] += 1;
            }
        }
        for (const auto& t : bank().registry.topics()) CHECK(live.interest(t.id) == expected[t.id]);
    }
}

TEST_CASE("rank_topics") {
    const auto& reg = bank().registry;
    const auto& gaz = bank().gazetteer;

    auto empty = rank_topics(fresh_user("u"), reg, gaz);
    std::vector<TopicId> order;
    for (const auto& t : reg.topics()) order.push_back(t.id);
    CHECK(empty == order);

    auto hooper = apply_event(fresh_user("u"), event::HobbyDetected{"basketball"});
    CHECK(rank_topics(hooper, reg, gaz).front() == "sports");

    auto pianist = apply_event(fresh_user("u"), event::HobbyDetected{"piano"});
    CHECK(rank_topics(pianist, reg, gaz).front() == "music");

    auto scored = fresh_user("u");
    scored.topic_interests = {{"movies", 3}, {"animals", -1}};
    auto ranked = rank_topics(scored, reg, gaz);
    auto pos = [&](const std::string& id) { return std::find(ranked.begin(), ranked.end(), id) - ranked.begin(); };
    CHECK(pos("movies") < pos("animals"));
    CHECK(ranked.front() == "movies");
    CHECK(ranked.back() == "animals");
}

TEST_CASE("rank_topics is always a permutation of the registry") {
    std::mt19937 rng(3);
    std::vector<TopicId> ids;
    for (const auto& t : bank().registry.topics()) ids.push_back(t.id);
    std::sort(ids.begin(), ids.end());
    for (int trial = 0; trial < 100; ++trial) {
        auto m = fresh_user("u");
        for (int i = 0; i < 15; ++i) m = apply_event(m, random_event(rng));
        auto ranked = rank_topics(m, bank().registry, bank().gazetteer);
        std::sort(ranked.begin(), ranked.end());
        CHECK(ranked == ids);
    }
}

TEST_CASE("JSON round trip") {
    auto m = sample_model();
    nlohmann::json j = m;
    CHECK(j.get<UserModel>() == m);
}

TEST_CASE("file store round trip and unknown users") {
    TempDir dir;
    FileUserStore store(dir.path());
    auto m = sample_model();
    store.save_user(m);
    CHECK(store.load_user("u-1") == m);

    auto fresh = store.load_user("u-999");
    CHECK(fresh.conversation_count == 0);
    CHECK(fresh.age_group == AgeGroup::unknown);
    CHECK(fresh.user_id == "u-999");
}

TEST_CASE("odd user ids map to safe file names") {
    TempDir dir;
    FileUserStore store(dir.path());
    auto m = fresh_user("../evil/id with space");
    m.name = "x";
    store.save_user(m);
    CHECK(store.record_path(m.user_id).parent_path() == dir.path());
    CHECK(store.load_user(m.user_id) == m);
    CHECK(encode_user_id("abc-1.2_3") == "abc-1.2_3");
}

TEST_CASE("corrupt records are quarantined and logged") {
    TempDir dir;
    std::vector<std::string> messages;
    FileUserStore store(dir.path(), [&](const std::string& m) { messages.push_back(m); });
    std::ofstream(store.record_path("u-7")) << "{ broken";
    auto m = store.load_user("u-7");
    CHECK(m == fresh_user("u-7"));
    CHECK(messages.size() == 1);
    auto quarantined = store.record_path("u-7");
    quarantined += ".corrupt";
    CHECK(std::filesystem::exists(quarantined));
    CHECK_FALSE(std::filesystem::exists(store.record_path("u-7")));
}

TEST_CASE("unavailable storage") {
    MemoryUserStore mem;
    mem.set_available(false);
    CHECK_THROWS_AS(mem.load_user("u"), StorageUnavailable);
    CHECK_THROWS_AS(mem.save_user(fresh_user("u")), StorageUnavailable);

    TempDir dir;
    auto file = dir / "not-a-dir";
    std::ofstream(file) << "x";
    CHECK_THROWS_AS(FileUserStore(file).load_user("u"), StorageUnavailable);
}

TEST_CASE("one session per user") {
    MemoryUserStore store;
    auto lease = store.open_session("u");
    CHECK(store.session_open("u"));
    CHECK_THROWS_AS(store.open_session("u"), SessionConflict);
    auto other = store.open_session("v");
    lease.release();
    CHECK_FALSE(store.session_open("u"));
    CHECK_NOTHROW(store.open_session("u"));
}

TEST_CASE("concurrent session opens admit exactly one winner") {
    MemoryUserStore store;
    std::atomic<int> won{0}, lost{0};
    std::vector<SessionLease> leases(8);
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&, i] {
            try {
                leases[i] = store.open_session("same");
                ++won;
            } catch (const SessionConflict&) {
                ++lost;
            }
        });
    }
    for (auto& t : threads) t.join();
    CHECK(won == 1);
    CHECK(lost == 7);
}
