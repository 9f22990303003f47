#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rapport/conversation_log.hpp"

namespace rapport::analytics {

enum class DistributionKind { hobby, topic_request_explicit, topic_request_menu, opinion_polarity_by_topic, icebreaker_topics };
const char* to_string(DistributionKind k);
std::optional<DistributionKind> parse_distribution_kind(std::string_view s);

// Half-open [from, to) over record timestamps; either end may be open.
struct Window {
    std::optional<Timestamp> from;
    std::optional<Timestamp> to;

    bool contains(Timestamp t) const { return (!from || t >= *from) && (!to || t < *to); }
    bool operator==(const Window&) const = default;
};

struct DistributionReport {
    DistributionKind kind = DistributionKind::hobby;
    std::vector<std::pair<std::string, long>> rows;  // count descending, then key
    long total = 0;
    Window window;

    long count(const std::string& key) const;
    // Number of keys whose count is strictly above `n`.
    std::size_t keys_above(long n) const;
};

// Counts come from the annotations written by the engine, never from
// re-reading user text. Opinion rows are keyed "<topic>/<polarity>", with
// "none" for opinions not tied to a topic.
DistributionReport compute_distribution(const std::vector<LogRecord>& logs, DistributionKind kind, Window window = {});

struct ContinuationStats {
    long asked = 0;
    long continued = 0;
    std::optional<double> rate;  // absent when nothing was asked
};

// An ask continues when the next engine record of the same conversation
// grounds the same item and stays on the ask's topic.
ContinuationStats poq_continuation_rate(const std::vector<LogRecord>& logs, Window window = {});

struct IcebreakerStats {
    long responses = 0;
    long with_topic = 0;
    double rate = 0.0;
    std::vector<std::pair<std::string, long>> topics;  // count descending, then key
};

IcebreakerStats icebreaker_detection_rate(const std::vector<LogRecord>& logs, Window window = {});

// "0.8800" style, four decimals.
std::string format_rate(double rate);

std::string render_table(const DistributionReport& report, std::size_t top = 20);
std::string render_csv(const DistributionReport& report);
std::string render_table(const ContinuationStats& stats);
std::string render_csv(const ContinuationStats& stats);
std::string render_table(const IcebreakerStats& stats);
std::string render_csv(const IcebreakerStats& stats);

}  // namespace rapport::analytics
