// Acceptance runner: one [PASS]/[FAIL] line per criterion, non-zero exit on any failure.

#include <httplib.h>

#include <chrono>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "../support/fixture_logs.hpp"
#include "../support/oracle.hpp"
#include "../support/paths.hpp"
#include "rapport/analytics.hpp"
#include "rapport/gateway.hpp"
#include "rapport/sim_user.hpp"

using namespace rapport;
using nlohmann::json;

namespace {

const ContentBank& bank() { return testing_support::shipped_bank(); }

struct Outcome {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) detail << what;
        ok = ok && cond;
    }
};

int failures = 0;

void criterion(const std::string& name, double budget_seconds, const std::function<void(Outcome&)>& body) {
    Outcome out;
    auto t0 = std::chrono::steady_clock::now();
    try {
        body(out);
    } catch (const std::exception& e) {
        out.require(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.require(secs <= budget_seconds, "over time budget");
    if (!out.ok) ++failures;
    std::cout << (out.ok ? "[PASS] " : "[FAIL] ") << name << " (" << std::fixed << std::setprecision(2) << secs << " s)";
    auto d = out.detail.str();
    if (!d.empty()) std::cout << ": " << d;
    std::cout << std::endl;
}

void gazetteer_recall(Outcome& o) {
    std::size_t total = 0, hit = 0;
    for (const auto& h : bank().gazetteer.entries()) {
        for (const auto& p : h.paraphrases) {
            ++total;
            auto found = nlu::match_hobbies(normalize(p), bank().gazetteer);
            if (std::find(found.begin(), found.end(), h.id) != found.end()) {
                ++hit;
            } else {
                o.require(false, "missed '" + p + "' for " + h.id + "; ");
            }
        }
    }
    for (const char* u : {"i like to paint", "i like painting", "i painted when i was young"}) {
        auto found = nlu::match_hobbies(normalize(u), bank().gazetteer);
        o.require(found == std::vector<HobbyId>{"painting"}, std::string("'") + u + "' did not resolve to painting");
    }
    o.detail << hit << "/" << total << " paraphrases";
}

void figure_replay(Outcome& o) {
    MemoryUserStore store;
    auto started = start_conversation("fig1-user", bank(), store, ArmPolicy{}, 1);
    auto state = std::move(started.state);
    auto model = std::move(started.model);
    // Name and two greeting replies come first; "yes every weekend" answers
    // the hobby stage's follow-up question.
    const std::vector<std::string> turns{"sam",
                                         "pretty good",
                                         "fine",
                                         "swim",
                                         "i don't work but i've been able to do school",
                                         "not really",
                                         "hawaii",
                                         "i've already been there and i really liked it",
                                         "just bring out with to feel like i don't have any responsibility there because "
                                         "it's not my own house",
                                         "yeah",
                                         "i play chess",
                                         "yes every weekend",
                                         "if you had a different voice all the time",
                                         "how old are you"};
    for (const auto& t : turns) {
        auto r = advance(std::move(state), t, bank(), std::move(model));
        state = std::move(r.state);
        model = std::move(r.model);
    }
    o.require(model.hobbies.count("swimming") == 1, "swimming missing; ");
    o.require(model.hobbies.count("chess") == 1, "chess missing; ");
    o.require(model.occupation == Occupation::student, "occupation is not student; ");
    o.require(std::find(model.travel_interests.begin(), model.travel_interests.end(), "hawaii") !=
                  model.travel_interests.end(),
              "hawaii missing; ");
    o.require(model.name == std::string("Sam"), "name not captured; ");
    o.detail << "hobbies=" << model.hobbies.size() << " travel=" << model.travel_interests.size();
}

void poq_policy(Outcome& o) {
    sim::SimConfig c;
    c.population_seed = 11;
    c.behavior.seed = 12;
    std::size_t conversations = 0, asks = 0, child_asks = 0;
    sim::RunOptions opts;
    opts.on_transcript = [&](const sim::Transcript& t) {
        ++conversations;
        std::map<std::pair<TopicId, PoqKind>, int> per_topic;
        const auto& rs = t.responses;
        for (std::size_t i = 0; i < rs.size(); ++i) {
            const auto& seq = rs[i].annotations.poq_sequence;
            if (!seq || seq->step != PoqStep::ask) continue;
            ++asks;
            if (++per_topic[{seq->topic, seq->kind}] > 1) o.require(false, "repeated kind on topic " + seq->topic + "; ");
            if (i > 0 && rs[i - 1].annotations.poq_sequence && rs[i - 1].annotations.poq_sequence->step == PoqStep::ask)
                o.require(false, "consecutive asks; ");
            if (t.profile.age_group == AgeGroup::child) {
                ++child_asks;
                const auto* item = bank().find_poq(seq->item);
                o.require(item && item->kid_friendly, "non kid-friendly item " + seq->item + " for a child; ");
            }
            // The ask exchange is followed by exactly one grounding exchange for the same item.
            bool grounded = i + 1 < rs.size() && rs[i + 1].annotations.poq_sequence &&
                            rs[i + 1].annotations.poq_sequence->step == PoqStep::ground &&
                            rs[i + 1].annotations.poq_sequence->item == seq->item;
            o.require(grounded, "ask of " + seq->item + " not grounded in the next exchange; ");
            if (grounded && i + 2 < rs.size() && rs[i + 2].annotations.poq_sequence &&
                rs[i + 2].annotations.poq_sequence->step == PoqStep::ground)
                o.require(false, "sequence longer than two exchanges; ");
        }
    };
    sim::run_simulation(1200, bank(), c, opts);
    o.require(conversations >= 1000, "fewer than 1000 conversations; ");
    o.require(asks > 0 && child_asks > 0, "no asks observed; ");
    o.detail << conversations << " conversations, " << asks << " asks, " << child_asks << " to children";
}

void statistics_oracle(Outcome& o) {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u(0.2, 4.0);
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
        std::vector<double> a(2 + rng() % 60), b(2 + rng() % 60);
        double sa = u(rng), sb = u(rng), shift = z(rng);
        for (auto& v : a) v = sa * z(rng) + shift;
        for (auto& v : b) v = sb * z(rng);
        auto w = welch_t_test(a, b);
        auto ref = oracle::welch(a, b);
        o.require(std::fabs(w.t - ref.t) < 1e-9 && std::fabs(w.df - ref.df) < 1e-9 && std::fabs(w.p - ref.p) < 1e-9,
                  "welch mismatch on fixture " + std::to_string(i) + "; ");

        std::vector<double> x(3 + rng() % 60), y;
        double slope = z(rng);
        for (auto& v : x) {
            v = z(rng);
            y.push_back(slope * v + z(rng));
        }
        auto r = pearson_r(x, y);
        auto rref = oracle::pearson(x, y);
        o.require(std::fabs(r.r - rref.r) < 1e-9 && std::fabs(r.p - rref.p) < 1e-9,
                  "pearson mismatch on fixture " + std::to_string(i) + "; ");
        ++checked;
    }
    std::vector<double> s{4, 5, 3, 5, 4, 2};
    o.require(welch_t_test(s, s).p == 1.0, "identical samples p != 1; ");
    std::vector<double> line;
    for (double v : s) line.push_back(3 * v - 2);
    o.require(pearson_r(s, line).r == 1.0, "perfect line r != 1; ");
    o.detail << checked << " fixtures";
}

std::string describe(const ExperimentReport& r) {
    std::ostringstream s;
    for (const auto& row : r.rows)
        s << "[" << row.req_poq << ": rating p=" << format_p(row.rating_p.value_or(-1))
          << " len " << row.a_mean_length.value_or(0) << " p=" << format_p(row.length_p.value_or(-1)) << "] ";
    if (r.poq_length) s << "r=" << r.poq_length->r;
    return s.str();
}

void table_structure(Outcome& o) {
    sim::SimConfig c;
    auto records = sim::run_simulation(5000, bank(), c);
    auto report = build_report(records, c.experiment);
    o.require(c.experiment.traffic_split == 0.75 && c.experiment.thresholds == std::vector<int>{0, 1, 2, 3},
              "unexpected default design; ");
    o.require(report.rows.size() == 4, "expected four threshold rows; ");
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& row = report.rows[i];
        if (i > 0) {
            o.require(row.a_mean_length && report.rows[i - 1].a_mean_length &&
                          *row.a_mean_length > *report.rows[i - 1].a_mean_length,
                      "A length not increasing at " + std::to_string(row.req_poq) + "; ");
            o.require(row.length_p && *row.length_p < 0.001, "length p >= .001 at " + std::to_string(row.req_poq) + "; ");
        }
        if (row.req_poq == 0) o.require(row.rating_p && *row.rating_p >= 0.05, "rating significant at threshold 0; ");
        if (row.req_poq >= 2)
            o.require(row.rating_p && *row.rating_p < 0.05, "rating n.s. at " + std::to_string(row.req_poq) + "; ");
    }
    o.require(report.poq_length && report.poq_length->r > 0.5, "POQ count vs length r <= 0.5; ");
    auto again = build_report(sim::run_simulation(5000, bank(), c), c.experiment);
    o.require(render_csv(again) == render_csv(report), "not deterministic; ");
    o.detail << describe(report);
}

void null_model(Outcome& o) {
    int clean = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        sim::SimConfig c;
        c.behavior.poq_rating_effect = 0.0;
        c.behavior.poq_length_effect = 0.0;
        c.population_seed = seed;
        c.behavior.seed = seed;
        auto report = build_report(sim::run_simulation(5000, bank(), c), c.experiment);
        bool any = false;
        for (const auto& row : report.rows) any |= row.rating_p && *row.rating_p < 0.05;
        clean += !any;
    }
    o.require(clean >= 18, "too many significant runs; ");
    o.detail << clean << "/20 runs without a significant rating difference";
}

void analytics_oracle(Outcome& o) {
    using namespace analytics;
    auto hobbies = fixture::hobby_fixture({{"gaming", 22}, {"reading", 9}, {"swimming", 30}, {"chess", 39}}, 21);
    auto dist = compute_distribution(hobbies.logs, DistributionKind::hobby, Window{hobbies.from, hobbies.to});
    o.require(dist.total == 100 && dist.count("gaming") == 22, "hobby distribution mismatch; ");
    for (const auto& [k, n] : hobbies.truth) o.require(dist.count(k) == n, "count mismatch for " + k + "; ");

    auto tail = fixture::long_tail_counts(131, 42, 25, 22);
    auto tail_logs = fixture::hobby_fixture(tail, 23);
    auto tail_dist = compute_distribution(tail_logs.logs, DistributionKind::hobby, Window{tail_logs.from, tail_logs.to});
    o.require(tail_dist.rows.size() == 131 && tail_dist.keys_above(25) == 42, "long tail mismatch; ");

    auto cont = fixture::continuation_fixture(100, 88, 24);
    auto cs = poq_continuation_rate(cont.logs);
    o.require(cs.asked == 100 && cs.continued == 88 && cs.rate && *cs.rate == 0.88, "continuation rate mismatch; ");

    auto ice = fixture::icebreaker_fixture(2300, 691, 168, 25);
    auto is = icebreaker_detection_rate(ice.logs);
    o.require(is.responses == 2300 && is.with_topic == 691, "icebreaker counts mismatch; ");
    o.require(std::fabs(is.rate - 691.0 / 2300.0) < 1e-15, "icebreaker rate mismatch; ");
    std::map<std::string, long> got(is.topics.begin(), is.topics.end());
    o.require(got == std::map<std::string, long>(ice.topic_counts.begin(), ice.topic_counts.end()), "per-topic counts mismatch; ");

    o.detail << "continuation " << format_rate(*cs.rate) << ", icebreaker " << format_rate(is.rate);
}

struct HttpResult {
    bool ok = true;
    std::string error;
    std::string session_id;
    std::vector<std::string> sent;
};

HttpResult drive_session(int port, int i) {
    HttpResult out;
    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(60, 0);
    cli.set_write_timeout(60, 0);
    cli.set_connection_timeout(60, 0);
    auto fail = [&](const std::string& what) {
        out.ok = false;
        out.error = what;
        return out;
    };
    auto created = cli.Post("/sessions", json{{"user_id", "load-" + std::to_string(i)}}.dump(), "application/json");
    if (!created || created->status != 201) return fail("create");
    auto body = json::parse(created->body);
    out.session_id = body["session_id"];
    const std::vector<std::string> script{"user " + std::to_string(i), "pretty good", "fine", "i like to swim",
                                          "i'm a student", "yes", "paris", "the food", "yes", "i play chess",
                                          "sometimes", "be funny", "no", "ok", "cool", "tell me more"};
    bool done = body["done"];
    for (const auto& text : script) {
        if (done) break;
        auto r = cli.Post(("/sessions/" + out.session_id + "/turns").c_str(), json{{"text", text}}.dump(),
                          "application/json");
        if (!r || r->status != 200)
            return fail("turn '" + text + "' (" + (r ? std::to_string(r->status) + " " + r->body : httplib::to_string(r.error())) + ")");
        out.sent.push_back(text);
        done = json::parse(r->body)["done"];
    }
    auto rated = cli.Post(("/sessions/" + out.session_id + "/rating").c_str(), json{{"rating", 1 + i % 5}}.dump(),
                          "application/json");
    if (!rated || rated->status != 200) return fail("rating");
    return out;
}

void service_contract(Outcome& o) {
    testing_support::TempDir dir;
    MemoryUserStore store;
    GatewayConfig cfg;
    cfg.log_dir = dir.path();
    SessionManager mgr(bank(), store, cfg);
    HttpGateway gw(mgr);
    int port = gw.start_background();
    o.require(port > 0, "server did not start; ");

    constexpr int kSessions = 100;
    std::vector<HttpResult> results(kSessions);
    std::vector<std::thread> threads;
    for (int i = 0; i < kSessions; ++i) threads.emplace_back([&, i] { results[i] = drive_session(port, i); });
    for (auto& t : threads) t.join();
    gw.stop();

    std::set<std::string> ids;
    for (const auto& r : results) {
        o.require(r.ok, "client failed at " + r.error + "; ");
        if (!r.ok) continue;
        ids.insert(r.session_id);
        auto logs = read_log_file(dir / (r.session_id + ".jsonl"));
        int ratings = 0;
        std::vector<std::string> user_texts;
        for (std::size_t k = 0; k < logs.size(); ++k) {
            const auto& rec = logs[k];
            o.require(rec.turn == static_cast<int>(k), "turn gap in " + r.session_id + "; ");
            o.require(rec.conversation_id == r.session_id, "foreign record in " + r.session_id + "; ");
            ratings += rec.annotations.value("event", "") == "rating";
            if (rec.speaker == Speaker::user) user_texts.push_back(rec.text);
        }
        o.require(ratings == 1, "rating count != 1 in " + r.session_id + "; ");
        o.require(user_texts == r.sent, "user turns out of order in " + r.session_id + "; ");
    }
    o.require(ids.size() == kSessions, "session ids not unique; ");
    o.detail << ids.size() << " sessions";
}

}  // namespace

int main() {
    criterion("gazetteer recall", 1.0, gazetteer_recall);
    criterion("introduction replay builds the expected user model", 1.0, figure_replay);
    criterion("POQ policy properties over simulated conversations", 30.0, poq_policy);
    criterion("statistics match the reference formulas", 5.0, statistics_oracle);
    criterion("experiment table structure on 5000 simulated conversations", 120.0, table_structure);
    criterion("null model shows no rating effect", 300.0, null_model);
    criterion("analytics match generator bookkeeping", 10.0, analytics_oracle);
    criterion("service contract under 100 concurrent sessions", 60.0, service_contract);
    return failures == 0 ? 0 : 1;
}
