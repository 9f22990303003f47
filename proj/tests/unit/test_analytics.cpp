#include <doctest.h>

#include <sstream>

#include "../support/fixture_logs.hpp"
#include "rapport/analytics.hpp"

using namespace rapport;
using namespace rapport::analytics;
using nlohmann::json;

TEST_CASE("hobby distribution matches the generator") {
    std::map<std::string, long> counts{{"gaming", 22}, {"reading", 9}, {"swimming", 30}, {"chess", 39}};
    auto f = fixture::hobby_fixture(counts, 1);
    auto report = compute_distribution(f.logs, DistributionKind::hobby, Window{f.from, f.to});
    CHECK(report.total == 100);
    CHECK(report.count("gaming") == 22);
    CHECK(static_cast<double>(report.count("gaming")) / report.total == doctest::Approx(0.22));
    for (const auto& [k, n] : counts) CHECK(report.count(k) == n);
    REQUIRE(report.rows.size() == 4);
    CHECK(report.rows[0].first == "chess");

    // Without a window the planted out-of-window detections count too.
    auto all = compute_distribution(f.logs, DistributionKind::hobby);
    CHECK(all.total == 103);
    CHECK(all.count("gaming") == 24);
}

TEST_CASE("rows sort by count then key") {
    auto f = fixture::hobby_fixture({{"b", 3}, {"a", 3}, {"c", 5}}, 2);
    auto report = compute_distribution(f.logs, DistributionKind::hobby, Window{f.from, f.to});
    std::vector<std::string> keys;
    for (const auto& [k, n] : report.rows) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"c", "a", "b"});
}

TEST_CASE("long tail threshold count") {
    auto counts = fixture::long_tail_counts(131, 42, 25, 9);
    auto f = fixture::hobby_fixture(counts, 3);
    auto report = compute_distribution(f.logs, DistributionKind::hobby, Window{f.from, f.to});
    CHECK(report.rows.size() == 131);
    CHECK(report.keys_above(25) == 42);
    long total = 0;
    for (const auto& [k, n] : counts) total += n;
    CHECK(report.total == total);
}

TEST_CASE("empty logs") {
    auto report = compute_distribution({}, DistributionKind::hobby);
    CHECK(report.rows.empty());
    CHECK(report.total == 0);
    auto cont = poq_continuation_rate({});
    CHECK(cont.asked == 0);
    CHECK_FALSE(cont.rate);
    CHECK(render_table(cont).find("n/a") != std::string::npos);
    CHECK(icebreaker_detection_rate({}).rate == 0.0);
}

TEST_CASE("continuation rate") {
    auto f = fixture::continuation_fixture(100, 88, 4);
    auto stats = poq_continuation_rate(f.logs);
    CHECK(stats.asked == 100);
    CHECK(stats.continued == 88);
    REQUIRE(stats.rate);
    CHECK(format_rate(*stats.rate) == "0.8800");

    auto all = fixture::continuation_fixture(25, 25, 5);
    CHECK(*poq_continuation_rate(all.logs).rate == 1.0);
}

TEST_CASE("continuation ignores record order in the input") {
    auto f = fixture::continuation_fixture(60, 40, 6);
    std::reverse(f.logs.begin(), f.logs.end());
    auto stats = poq_continuation_rate(f.logs);
    CHECK(stats.asked == 60);
    CHECK(stats.continued == 40);
}

TEST_CASE("icebreaker detection rate") {
    auto f = fixture::icebreaker_fixture(2300, 691, 168, 7);
    auto stats = icebreaker_detection_rate(f.logs);
    CHECK(stats.responses == 2300);
    CHECK(stats.with_topic == 691);
    CHECK(stats.rate == doctest::Approx(691.0 / 2300.0));
    long detections = 0;
    for (const auto& [t, n] : stats.topics) {
        CHECK(f.topic_counts[t] == n);
        detections += n;
    }
    CHECK(detections == 691 + 168);

    auto none = fixture::icebreaker_fixture(10, 0, 0, 8);
    CHECK(icebreaker_detection_rate(none.logs).rate == 0.0);

    auto two = fixture::icebreaker_fixture(1, 1, 1, 9);
    auto s2 = icebreaker_detection_rate(two.logs);
    CHECK(s2.with_topic == 1);
    long total = 0;
    for (const auto& [t, n] : s2.topics) total += n;
    CHECK(total == 2);
}

TEST_CASE("topic request and opinion distributions") {
    fixture::Builder b;
    b.engine("c1", {{"topic_request", {{"topic", "movies"}, {"trigger", "explicit_command"}}}});
    b.engine("c1", {{"topic_request", {{"topic", "music"}, {"trigger", "menu"}}}});
    b.engine("c2", {{"topic_request", {{"topic", "movies"}, {"trigger", "explicit_command"}}}});
    json op1 = {{"type", "OpinionStated"}, {"opinion", {{"topic", "animals"}, {"polarity", "positive"}}}};
    json op2 = {{"type", "OpinionStated"}, {"opinion", {{"topic", nullptr}, {"polarity", "negative"}}}};
    b.engine("c2", {{"events_emitted", {op1, op2}}});
    b.user("c2", "let's talk about movies");

    auto explicit_ = compute_distribution(b.logs, DistributionKind::topic_request_explicit);
    CHECK(explicit_.count("movies") == 2);
    CHECK(explicit_.total == 2);
    CHECK(compute_distribution(b.logs, DistributionKind::topic_request_menu).count("music") == 1);
    auto ops = compute_distribution(b.logs, DistributionKind::opinion_polarity_by_topic);
    CHECK(ops.count("animals/positive") == 1);
    CHECK(ops.count("none/negative") == 1);
}

TEST_CASE("reports are byte identical across runs") {
    auto f = fixture::hobby_fixture(fixture::long_tail_counts(40, 10, 25, 1), 1);
    auto a = render_csv(compute_distribution(f.logs, DistributionKind::hobby));
    auto b = render_csv(compute_distribution(f.logs, DistributionKind::hobby));
    CHECK(a == b);
    auto table = render_table(compute_distribution(f.logs, DistributionKind::hobby), 5);
    CHECK(std::count(table.begin(), table.end(), '\n') == 6);
}

TEST_CASE("log parse errors name the line") {
    std::istringstream in("{\"conversation_id\":\"a\",\"turn\":0,\"speaker\":\"user\"}\n\n{oops\n");
    try {
        read_log(in, "x.jsonl");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    std::istringstream bad_speaker("{\"conversation_id\":\"a\",\"turn\":0,\"speaker\":\"robot\"}\n");
    CHECK_THROWS_AS(read_log(bad_speaker, "y"), ParseError);
}

TEST_CASE("log records round trip through JSONL") {
    auto f = fixture::continuation_fixture(10, 5, 1);
    std::stringstream buf;
    for (const auto& r : f.logs) write_record(buf, r);
    auto back = read_log(buf, "mem");
    CHECK(back == f.logs);
}
