#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rapport/content_bank.hpp"
#include "rapport/conversation_log.hpp"
#include "rapport/dialogue_engine.hpp"
#include "rapport/experiment.hpp"

namespace rapport::sim {

struct HobbyWeight {
    HobbyId hobby;
    double weight = 0.0;
};

struct PopulationConfig {
    double child_probability = 0.1144;
    // Named hobbies with explicit mass; the remaining mass is spread evenly
    // over every other gazetteer hobby.
    std::vector<HobbyWeight> hobby_weights{
        {"gaming", 0.22}, {"reading", 0.09}, {"television", 0.07}, {"drawing", 0.055}, {"biking", 0.045}};
    int hobbies_per_user = 1;
    double patience_median = 15.0;  // exchanges
    double patience_sigma = 0.8;    // of log-patience
    double rating_base_mean = 3.8;
    double rating_base_sd = 0.35;
    double positive_opinion_share = 9755.0 / (9755.0 + 1866.0);
};

struct SimBehaviorConfig {
    double poq_answer_match_rate = 0.88;
    double hyp_substantive_rate = 0.7;  // of unmatched HYP answers; the rest struggle
    double poq_rating_effect = 0.045;   // rating points per completed POQ
    double poq_length_effect = 1.5;     // extra patience (exchanges) per completed POQ
    double rating_noise_sd = 0.9;
    double rating_probability = 0.8;
    double topic_request_rate = 0.1;    // chat turns that explicitly ask for a topic
    double opinion_rate = 0.15;         // chat turns that voice an opinion
    double icebreaker_topic_rate = 0.3; // advice answers that name a topic
    std::uint64_t seed = 1;
};

struct SimProfile {
    std::string user_id;
    AgeGroup age_group = AgeGroup::adult;
    std::vector<HobbyId> hobbies;
    double patience = 20.0;
    double engagement_gain = 0.0;
    double base_rating_propensity = 3.8;
    double positive_opinion_share = 0.84;
    std::string name;
};

// Deterministic in (n, config, seed). Hobby ids absent from the gazetteer
// are ignored.
std::vector<SimProfile> sample_population(std::size_t n, const PopulationConfig& config, const SimBehaviorConfig& behavior,
                                          std::uint64_t seed, const Gazetteer& gazetteer);

struct TurnContext {
    int exchanges = 0;       // exchanges completed so far
    int completed_poqs = 0;  // POQ sequences completed so far
};

// The next user utterance for an engine prompt. Emits the stop phrase
// "goodbye" once patience runs out.
std::string respond(const SimProfile& profile, const EngineResponse& prompt, const TurnContext& context,
                    const ContentBank& bank, const SimBehaviorConfig& behavior, std::mt19937_64& rng);

bool out_of_patience(const SimProfile& profile, const TurnContext& context);

int rate(const SimProfile& profile, int completed_poq_count, const SimBehaviorConfig& behavior, std::mt19937_64& rng);

struct SimConfig {
    PopulationConfig population;
    SimBehaviorConfig behavior;
    ExperimentConfig experiment;
    std::uint64_t population_seed = 1;
    Timestamp start_time = 1600000000000;
    int max_exchanges = 400;
};

SimConfig sim_config_from_json(const nlohmann::json& j, const std::string& source = "config");
nlohmann::json to_json(const SimConfig& c);
SimConfig load_sim_config(const std::filesystem::path& path);

// Everything observed about one simulated conversation.
struct Transcript {
    SimProfile profile;
    Arm arm = Arm::B;
    std::vector<std::string> user_turns;
    std::vector<EngineResponse> responses;  // greeting first
    UserModel model;
    ConversationRecord record;
};

struct RunOptions {
    // Receives each log record; none are produced when empty.
    std::function<void(const LogRecord&)> log_sink;
    std::function<void(const Transcript&)> on_transcript;
};

// One conversation per sampled user. Returns the per-conversation records.
std::vector<ConversationRecord> run_simulation(std::size_t users, const ContentBank& bank, const SimConfig& config,
                                               const RunOptions& options = {});

}  // namespace rapport::sim
