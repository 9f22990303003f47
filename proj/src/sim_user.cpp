#include "rapport/sim_user.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "rapport/error.hpp"

namespace rapport::sim {

using nlohmann::json;

namespace {

const std::vector<std::string>& first_names() {
    static const std::vector<std::string> names = {"sam",   "alex",  "jordan", "taylor", "morgan", "casey",
                                                   "riley", "jamie", "avery",  "quinn",  "drew",   "robin",
                                                   "maya",  "leo",   "nina",   "omar",   "priya",  "felix"};
    return names;
}

const std::vector<std::string>& destinations() {
    static const std::vector<std::string> places = {"hawaii", "japan", "paris", "new york", "iceland",
                                                    "italy",  "peru",  "egypt", "alaska",   "australia"};
    return places;
}

const std::vector<std::string>& small_talk() {
    static const std::vector<std::string> lines = {"yeah", "that's cool", "i guess so", "okay", "sure",
                                                   "i didn't know that", "interesting", "yes i think so",
                                                   "not really", "hmm maybe"};
    return lines;
}

template <typename T>
const T& pick(const std::vector<T>& xs, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> d(0, xs.size() - 1);
    return xs[d(rng)];
}

bool roll(double p, std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

std::string first_raw(const Lexicon& lex, const std::string& list, std::string fallback) {
    auto it = lex.raw_phrases.find(list);
    if (it == lex.raw_phrases.end() || it->second.empty()) return fallback;
    return it->second.front();
}

std::string raw_pick(const Lexicon& lex, const std::string& list, std::string fallback, std::mt19937_64& rng) {
    auto it = lex.raw_phrases.find(list);
    if (it == lex.raw_phrases.end() || it->second.empty()) return fallback;
    return pick(it->second, rng);
}

std::string topic_phrase(const TopicRegistry& registry, const TopicId& id) {
    const auto* t = registry.find(id);
    return t && !t->referential_expressions.empty() ? t->referential_expressions.front() : id;
}

std::string hobby_phrase(const SimProfile& p, const Gazetteer& gazetteer, std::mt19937_64& rng) {
    if (p.hobbies.empty()) return "nothing much";
    const auto* h = gazetteer.find(pick(p.hobbies, rng));
    if (!h || h->paraphrases.empty()) return "nothing much";
    return pick(h->paraphrases, rng);
}

std::string opinion_line(const SimProfile& p, const ContentBank& bank, const TopicId& topic, std::mt19937_64& rng) {
    bool positive = roll(p.positive_opinion_share, rng);
    auto marker = raw_pick(bank.lexicon, positive ? "positive_markers" : "negative_markers", positive ? "love" : "hate", rng);
    return "i " + marker + " " + topic_phrase(bank.registry, topic);
}

std::vector<double> normalized(std::vector<double> w) {
    double total = 0.0;
    for (double x : w) total += x;
    if (total > 0.0) {
        for (double& x : w) x /= total;
    }
    return w;
}

}  // namespace

std::vector<SimProfile> sample_population(std::size_t n, const PopulationConfig& config, const SimBehaviorConfig& behavior,
                                          std::uint64_t seed, const Gazetteer& gazetteer) {
    std::vector<HobbyId> ids;
    std::vector<double> weights;
    double named_mass = 0.0;
    for (const auto& hw : config.hobby_weights) {
        if (!gazetteer.find(hw.hobby)) continue;
        ids.push_back(hw.hobby);
        weights.push_back(hw.weight);
        named_mass += hw.weight;
    }
    std::vector<HobbyId> rest;
    for (const auto& h : gazetteer.entries()) {
        if (std::find(ids.begin(), ids.end(), h.id) == ids.end()) rest.push_back(h.id);
    }
    double rest_mass = std::max(0.0, 1.0 - named_mass);
    for (const auto& h : rest) {
        ids.push_back(h);
        weights.push_back(rest.empty() ? 0.0 : rest_mass / static_cast<double>(rest.size()));
    }
    weights = normalized(std::move(weights));
    std::discrete_distribution<std::size_t> hobby_dist(weights.begin(), weights.end());

    std::mt19937_64 rng(seed);
    std::lognormal_distribution<double> patience(std::log(config.patience_median), config.patience_sigma);
    std::normal_distribution<double> base(config.rating_base_mean, config.rating_base_sd);
    std::vector<SimProfile> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        SimProfile p;
        p.user_id = "sim-" + std::to_string(seed) + "-" + std::to_string(i);
        p.age_group = roll(config.child_probability, rng) ? AgeGroup::child : AgeGroup::adult;
        for (int k = 0; k < config.hobbies_per_user && !ids.empty(); ++k) {
            const auto& h = ids[hobby_dist(rng)];
            if (std::find(p.hobbies.begin(), p.hobbies.end(), h) == p.hobbies.end()) p.hobbies.push_back(h);
        }
        p.patience = std::max(1.0, patience(rng));
        p.engagement_gain = behavior.poq_length_effect;
        p.base_rating_propensity = base(rng);
        p.positive_opinion_share = config.positive_opinion_share;
        p.name = pick(first_names(), rng);
        out.push_back(std::move(p));
    }
    return out;
}

bool out_of_patience(const SimProfile& profile, const TurnContext& context) {
    return context.exchanges >= profile.patience + profile.engagement_gain * context.completed_poqs;
}

std::string respond(const SimProfile& p, const EngineResponse& prompt, const TurnContext& context,
                    const ContentBank& bank, const SimBehaviorConfig& behavior, std::mt19937_64& rng) {
    const auto& lex = bank.lexicon;
    const auto& a = prompt.annotations;
    // A question already asked gets answered before the user leaves.
    bool poq_pending = a.expect == Expect::wyr || a.expect == Expect::hyp;
    if (!poq_pending && out_of_patience(p, context)) return first_raw(lex, "stop_phrases", "goodbye");
    bool child = p.age_group == AgeGroup::child;
    switch (a.expect) {
        case Expect::name:
            return "my name is " + p.name;
        case Expect::hobby:
            return roll(0.85, rng) ? hobby_phrase(p, bank.gazetteer, rng) : "not much really";
        case Expect::occupation:
            if (child) return "i'm in " + pick(std::vector<std::string>{"third", "fourth", "fifth", "sixth"}, rng) + " grade";
            return roll(0.25, rng) ? "i'm a student" : "i work at an office";
        case Expect::yes_no:
            return roll(0.6, rng) ? raw_pick(lex, "affirm_yes", "yes", rng) : raw_pick(lex, "affirm_no", "no", rng);
        case Expect::travel:
            return roll(0.8, rng) ? "i want to go to " + pick(destinations(), rng) : "i'm not sure";
        case Expect::open:
            return pick(small_talk(), rng);
        case Expect::advice: {
            if (roll(behavior.icebreaker_topic_rate, rng) && !bank.registry.topics().empty()) {
                const auto& t = pick(bank.registry.topics(), rng);
                return "maybe try " + topic_phrase(bank.registry, t.id);
            }
            return "just be yourself";
        }
        case Expect::question:
            return roll(0.5, rng) ? "what is your favorite color" : raw_pick(lex, "affirm_no", "no", rng);
        case Expect::menu:
            if (a.menu.empty() || roll(0.1, rng)) return raw_pick(lex, "menu_rejections", "none of those", rng);
            return topic_phrase(bank.registry, pick(a.menu, rng));
        case Expect::wyr: {
            const auto* item = a.poq_sequence ? bank.find_poq(a.poq_sequence->item) : nullptr;
            if (item && roll(behavior.poq_answer_match_rate, rng)) {
                const auto& opt = pick(item->expected_answers, rng);
                return "i'd pick " + pick(opt.choice_phrases, rng);
            }
            return roll(0.5, rng) ? "i love both" : "hmm i don't know";
        }
        case Expect::hyp: {
            const auto* item = a.poq_sequence ? bank.find_poq(a.poq_sequence->item) : nullptr;
            if (item && !item->expected_answers.empty() && roll(behavior.poq_answer_match_rate, rng)) {
                return pick(pick(item->expected_answers, rng).choice_phrases, rng);
            }
            if (roll(behavior.hyp_substantive_rate, rng)) return "i would probably try to help my friends with it";
            return "um i don't know";
        }
        case Expect::chat: {
            if (roll(behavior.topic_request_rate, rng) && !bank.registry.topics().empty()) {
                const auto& t = pick(bank.registry.topics(), rng);
                return first_raw(lex, "discuss_commands", "let's talk about") + " " + topic_phrase(bank.registry, t.id);
            }
            if (a.topic && roll(behavior.opinion_rate, rng)) return opinion_line(p, bank, *a.topic, rng);
            return pick(small_talk(), rng);
        }
        case Expect::none:
            return first_raw(lex, "stop_phrases", "goodbye");
    }
    return pick(small_talk(), rng);
}

int rate(const SimProfile& profile, int completed_poq_count, const SimBehaviorConfig& behavior, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, behavior.rating_noise_sd);
    double raw = profile.base_rating_propensity + behavior.poq_rating_effect * completed_poq_count + noise(rng);
    return static_cast<int>(std::clamp(std::lround(raw), 1L, 5L));
}

namespace {

void read_population(const json& j, PopulationConfig& c) {
    c.child_probability = j.value("child_probability", c.child_probability);
    if (j.contains("hobby_weights")) {
        c.hobby_weights.clear();
        for (const auto& [id, w] : j.at("hobby_weights").items()) c.hobby_weights.push_back({id, w.get<double>()});
    }
    c.hobbies_per_user = j.value("hobbies_per_user", c.hobbies_per_user);
    c.patience_median = j.value("patience_median", c.patience_median);
    c.patience_sigma = j.value("patience_sigma", c.patience_sigma);
    c.rating_base_mean = j.value("rating_base_mean", c.rating_base_mean);
    c.rating_base_sd = j.value("rating_base_sd", c.rating_base_sd);
    c.positive_opinion_share = j.value("positive_opinion_share", c.positive_opinion_share);
}

void read_behavior(const json& j, SimBehaviorConfig& b) {
    b.poq_answer_match_rate = j.value("poq_answer_match_rate", b.poq_answer_match_rate);
    b.hyp_substantive_rate = j.value("hyp_substantive_rate", b.hyp_substantive_rate);
    b.poq_rating_effect = j.value("poq_rating_effect", b.poq_rating_effect);
    b.poq_length_effect = j.value("poq_length_effect", b.poq_length_effect);
    b.rating_noise_sd = j.value("rating_noise_sd", b.rating_noise_sd);
    b.rating_probability = j.value("rating_probability", b.rating_probability);
    b.topic_request_rate = j.value("topic_request_rate", b.topic_request_rate);
    b.opinion_rate = j.value("opinion_rate", b.opinion_rate);
    b.icebreaker_topic_rate = j.value("icebreaker_topic_rate", b.icebreaker_topic_rate);
    b.seed = j.value("seed", b.seed);
}

void check_fraction(std::vector<Violation>& out, const std::string& source, const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) out.push_back({source, std::string("config.") + name, std::string(name) + " must lie in [0, 1]"});
}

}  // namespace

SimConfig sim_config_from_json(const json& j, const std::string& source) {
    if (!j.is_object()) throw ParseError(source, 1, "sim config must be an object");
    SimConfig c;
    try {
        if (j.contains("population")) read_population(j.at("population"), c.population);
        if (j.contains("behavior")) read_behavior(j.at("behavior"), c.behavior);
        if (j.contains("experiment")) c.experiment = experiment_config_from_json(j.at("experiment"), source);
        c.population_seed = j.value("population_seed", c.population_seed);
        c.start_time = j.value("start_time", c.start_time);
        c.max_exchanges = j.value("max_exchanges", c.max_exchanges);
    } catch (const json::exception& e) {
        throw ParseError(source, 1, e.what());
    }
    std::vector<Violation> problems;
    check_fraction(problems, source, "child_probability", c.population.child_probability);
    check_fraction(problems, source, "positive_opinion_share", c.population.positive_opinion_share);
    check_fraction(problems, source, "poq_answer_match_rate", c.behavior.poq_answer_match_rate);
    check_fraction(problems, source, "hyp_substantive_rate", c.behavior.hyp_substantive_rate);
    check_fraction(problems, source, "rating_probability", c.behavior.rating_probability);
    check_fraction(problems, source, "topic_request_rate", c.behavior.topic_request_rate);
    check_fraction(problems, source, "opinion_rate", c.behavior.opinion_rate);
    check_fraction(problems, source, "icebreaker_topic_rate", c.behavior.icebreaker_topic_rate);
    if (!(c.population.patience_median > 0.0)) {
        problems.push_back({source, "config.patience_median", "patience_median must be positive"});
    }
    if (c.population.hobbies_per_user < 0) {
        problems.push_back({source, "config.hobbies_per_user", "hobbies_per_user must be >= 0"});
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));
    return c;
}

json to_json(const SimConfig& c) {
    json weights = json::object();
    for (const auto& hw : c.population.hobby_weights) weights[hw.hobby] = hw.weight;
    const auto& p = c.population;
    const auto& b = c.behavior;
    return {{"population",
             {{"child_probability", p.child_probability},
              {"hobby_weights", weights},
              {"hobbies_per_user", p.hobbies_per_user},
              {"patience_median", p.patience_median},
              {"patience_sigma", p.patience_sigma},
              {"rating_base_mean", p.rating_base_mean},
              {"rating_base_sd", p.rating_base_sd},
              {"positive_opinion_share", p.positive_opinion_share}}},
            {"behavior",
             {{"poq_answer_match_rate", b.poq_answer_match_rate},
              {"hyp_substantive_rate", b.hyp_substantive_rate},
              {"poq_rating_effect", b.poq_rating_effect},
              {"poq_length_effect", b.poq_length_effect},
              {"rating_noise_sd", b.rating_noise_sd},
              {"rating_probability", b.rating_probability},
              {"topic_request_rate", b.topic_request_rate},
              {"opinion_rate", b.opinion_rate},
              {"icebreaker_topic_rate", b.icebreaker_topic_rate},
              {"seed", b.seed}}},
            {"experiment", rapport::to_json(c.experiment)},
            {"population_seed", c.population_seed},
            {"start_time", c.start_time},
            {"max_exchanges", c.max_exchanges}};
}

SimConfig load_sim_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingAsset(path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string(), 1, e.what());
    }
    return sim_config_from_json(j, path.string());
}

namespace {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t x = seed * 0x9e3779b97f4a7c15ULL + index + 0x632be59bd9b4e019ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::vector<ConversationRecord> run_simulation(std::size_t users, const ContentBank& bank, const SimConfig& config,
                                               const RunOptions& options) {
    auto population = sample_population(users, config.population, config.behavior, config.population_seed, bank.gazetteer);
    MemoryUserStore store;
    std::vector<ConversationRecord> records;
    records.reserve(users);
    for (std::size_t i = 0; i < population.size(); ++i) {
        const auto& profile = population[i];
        std::mt19937_64 rng(stream_seed(config.behavior.seed, i));
        Arm arm = assign_arm(profile.user_id, config.experiment);
        const auto& policy = config.experiment.policy(arm);
        std::string conv_id = profile.user_id + "-c1";

        Transcript tr;
        tr.profile = profile;
        tr.arm = arm;
        ConversationLogger logger(conv_id, options.log_sink);
        Timestamp clock = config.start_time + static_cast<Timestamp>(i) * 60'000;
        auto tick = [&clock] { return clock += 1'000; };

        auto started = start_conversation(profile.user_id, bank, store, policy, rng(), conv_id);
        auto state = std::move(started.state);
        auto model = std::move(started.model);
        EngineResponse last = started.response;
        if (options.log_sink) {
            logger.start(profile.user_id, to_string(arm), policy, clock);
            logger.engine(last, tick());
        }
        if (options.on_transcript) tr.responses.push_back(last);

        TurnContext ctx;
        while (!last.done && (ctx.exchanges < config.max_exchanges || state.pending_poq)) {
            auto utterance = respond(profile, last, ctx, bank, config.behavior, rng);
            Timestamp at = tick();
            if (options.log_sink) logger.user(utterance, at);
            auto next = advance(std::move(state), utterance, bank, std::move(model), at);
            state = std::move(next.state);
            model = std::move(next.model);
            last = std::move(next.response);
            ctx.exchanges = state.exchange_count;
            ctx.completed_poqs = state.completed_poqs;
            if (options.log_sink) logger.engine(last, tick());
            if (options.on_transcript) {
                tr.user_turns.push_back(std::move(utterance));
                tr.responses.push_back(last);
            }
        }

        ConversationRecord rec{conv_id, arm, state.exchange_count, state.completed_poqs, std::nullopt,
                               2 * state.completed_poqs};
        if (options.log_sink) logger.end(state.exchange_count, last.done ? "user_stop" : "max_exchanges", tick());
        if (roll(config.behavior.rating_probability, rng)) {
            rec.rating = rate(profile, state.completed_poqs, config.behavior, rng);
            if (options.log_sink) logger.rating(*rec.rating, tick());
        }
        finish_conversation(store, model);
        started.lease.release();

        if (options.on_transcript) {
            tr.model = model;
            tr.record = rec;
            options.on_transcript(tr);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace rapport::sim
