#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rapport/conversation_log.hpp"
#include "rapport/dialogue_engine.hpp"
#include "rapport/statistics.hpp"

namespace rapport {

enum class Arm { A, B };
const char* to_string(Arm a);
std::optional<Arm> parse_arm(std::string_view s);

struct ExperimentConfig {
    std::string name = "experiment";
    ArmPolicy arm_a;                                   // both kinds on
    ArmPolicy arm_b{false, false, 3};                  // no POQs
    double traffic_split = 0.75;                       // share of users in A
    int min_exchanges = 6;                             // kept when exchanges > min_exchanges
    std::vector<int> thresholds{0, 1, 2, 3};
    std::uint64_t seed = 0;

    const ArmPolicy& policy(Arm arm) const { return arm == Arm::A ? arm_a : arm_b; }
};

// Throws ParseError for malformed documents and ValidationError for values
// outside their ranges. Missing keys keep their defaults.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::string& source = "config");
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Deterministic in (user_id, seed).
Arm assign_arm(const std::string& user_id, const ExperimentConfig& config);

struct ConversationRecord {
    std::string conversation_id;
    Arm arm = Arm::B;
    int exchanges = 0;
    int poq_count = 0;  // completed POQ sequences
    std::optional<int> rating;
    int poq_exchange_count = 0;  // 2 per completed sequence

    bool operator==(const ConversationRecord&) const = default;
};

std::vector<ConversationRecord> filter_records(const std::vector<ConversationRecord>& records,
                                               const ExperimentConfig& config, int threshold);

struct ThresholdRow {
    int req_poq = 0;
    std::size_t a_count = 0;
    std::size_t b_count = 0;
    std::optional<double> a_mean_rating;
    std::optional<double> b_mean_rating;
    std::optional<double> rating_p;
    std::optional<double> a_mean_length;
    std::optional<double> b_mean_length;
    std::optional<double> length_p;
    std::optional<double> poq_share;  // mean poq_exchange_count / exchanges over A
};

struct ExperimentReport {
    std::string name;
    std::vector<ThresholdRow> rows;
    // Over arm-A records passing the exchange filter.
    std::optional<CorrelationResult> poq_rating;
    std::optional<CorrelationResult> poq_length;
};

// Throws InsufficientData when `records` is empty. Cells whose statistic
// cannot be computed are left empty.
ExperimentReport build_report(const std::vector<ConversationRecord>& records, const ExperimentConfig& config);

// Aligned text table in the column order
// Req. POQ | A convs. | B convs. | A rating | B rating | p-value | A length | B length | p-value | POQ share
std::string render_table(const ExperimentReport& report);
std::string render_csv(const ExperimentReport& report);
// "< .001" below one thousandth, otherwise three decimals without a leading zero.
std::string format_p(double p);

// One record per conversation that has a start record. Exchanges count user
// records; completed POQs count ground steps; the rating is the last rating
// record, if any.
std::vector<ConversationRecord> records_from_logs(const std::vector<LogRecord>& logs);

}  // namespace rapport
