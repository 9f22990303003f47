#include "rapport/analytics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

namespace rapport::analytics {

using nlohmann::json;

const char* to_string(DistributionKind k) {
    switch (k) {
        case DistributionKind::hobby: return "hobby";
        case DistributionKind::topic_request_explicit: return "topic_request_explicit";
        case DistributionKind::topic_request_menu: return "topic_request_menu";
        case DistributionKind::opinion_polarity_by_topic: return "opinion_polarity_by_topic";
        case DistributionKind::icebreaker_topics: return "icebreaker_topics";
    }
    return "hobby";
}

std::optional<DistributionKind> parse_distribution_kind(std::string_view s) {
    for (auto k : {DistributionKind::hobby, DistributionKind::topic_request_explicit,
                   DistributionKind::topic_request_menu, DistributionKind::opinion_polarity_by_topic,
                   DistributionKind::icebreaker_topics}) {
        if (s == to_string(k)) return k;
    }
    return std::nullopt;
}

long DistributionReport::count(const std::string& key) const {
    for (const auto& [k, n] : rows) {
        if (k == key) return n;
    }
    return 0;
}

std::size_t DistributionReport::keys_above(long n) const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [n](const auto& row) { return row.second > n; }));
}

namespace {

std::vector<std::pair<std::string, long>> sorted_rows(const std::map<std::string, long>& counts) {
    std::vector<std::pair<std::string, long>> rows(counts.begin(), counts.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return rows;
}

void count_record(const LogRecord& r, DistributionKind kind, std::map<std::string, long>& counts) {
    const auto& a = r.annotations;
    switch (kind) {
        case DistributionKind::hobby:
        case DistributionKind::opinion_polarity_by_topic: {
            auto it = a.find("events_emitted");
            if (it == a.end()) return;
            for (const auto& ev : *it) {
                auto type = ev.value("type", "");
                if (kind == DistributionKind::hobby && type == "HobbyDetected") {
                    ++counts[ev.value("hobby", "")];
                } else if (kind == DistributionKind::opinion_polarity_by_topic && type == "OpinionStated") {
                    const auto& op = ev.at("opinion");
                    std::string topic = op.contains("topic") && op["topic"].is_string() ? op["topic"].get<std::string>()
                                                                                        : "none";
                    ++counts[topic + "/" + op.value("polarity", "")];
                }
            }
            return;
        }
        case DistributionKind::topic_request_explicit:
        case DistributionKind::topic_request_menu: {
            auto it = a.find("topic_request");
            if (it == a.end()) return;
            std::string want = kind == DistributionKind::topic_request_menu ? "menu" : "explicit_command";
            if (it->value("trigger", "") == want) ++counts[it->value("topic", "")];
            return;
        }
        case DistributionKind::icebreaker_topics: {
            auto it = a.find("icebreaker");
            if (it == a.end()) return;
            for (const auto& t : it->value("topics", json::array())) ++counts[t.get<std::string>()];
            return;
        }
    }
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

DistributionReport compute_distribution(const std::vector<LogRecord>& logs, DistributionKind kind, Window window) {
    std::map<std::string, long> counts;
    for (const auto& r : logs) {
        if (r.speaker != Speaker::engine || !window.contains(r.timestamp)) continue;
        count_record(r, kind, counts);
    }
    DistributionReport report;
    report.kind = kind;
    report.window = window;
    report.rows = sorted_rows(counts);
    for (const auto& [_, n] : report.rows) report.total += n;
    return report;
}

ContinuationStats poq_continuation_rate(const std::vector<LogRecord>& logs, Window window) {
    // Engine records per conversation, in turn order.
    std::map<std::string, std::vector<const LogRecord*>> by_conv;
    for (const auto& r : logs) {
        if (r.speaker == Speaker::engine) by_conv[r.conversation_id].push_back(&r);
    }
    ContinuationStats stats;
    for (auto& [_, recs] : by_conv) {
        std::stable_sort(recs.begin(), recs.end(), [](const auto* a, const auto* b) { return a->turn < b->turn; });
        for (std::size_t i = 0; i < recs.size(); ++i) {
            const auto& a = recs[i]->annotations;
            auto it = a.find("poq_sequence");
            if (it == a.end() || it->value("step", "") != "ask" || !window.contains(recs[i]->timestamp)) continue;
            ++stats.asked;
            if (i + 1 == recs.size()) continue;
            const auto& next = recs[i + 1]->annotations;
            auto nit = next.find("poq_sequence");
            bool grounded = nit != next.end() && nit->value("step", "") == "ground" &&
                            nit->value("item", "") == it->value("item", "");
            bool on_topic = next.value("topic", "") == it->value("topic", "");
            if (grounded && on_topic) ++stats.continued;
        }
    }
    if (stats.asked > 0) stats.rate = static_cast<double>(stats.continued) / static_cast<double>(stats.asked);
    return stats;
}

IcebreakerStats icebreaker_detection_rate(const std::vector<LogRecord>& logs, Window window) {
    IcebreakerStats stats;
    std::map<std::string, long> counts;
    for (const auto& r : logs) {
        if (r.speaker != Speaker::engine || !window.contains(r.timestamp)) continue;
        auto it = r.annotations.find("icebreaker");
        if (it == r.annotations.end()) continue;
        ++stats.responses;
        auto topics = it->value("topics", json::array());
        if (!topics.empty()) ++stats.with_topic;
        for (const auto& t : topics) ++counts[t.get<std::string>()];
    }
    if (stats.responses > 0) stats.rate = static_cast<double>(stats.with_topic) / static_cast<double>(stats.responses);
    stats.topics = sorted_rows(counts);
    return stats;
}

std::string format_rate(double rate) { return fmt("%.4f", rate); }

std::string render_table(const DistributionReport& report, std::size_t top) {
    std::ostringstream out;
    std::size_t width = 3;
    for (std::size_t i = 0; i < report.rows.size() && i < top; ++i) width = std::max(width, report.rows[i].first.size());
    out << to_string(report.kind) << " (total " << report.total << ", " << report.rows.size() << " keys)\n";
    for (std::size_t i = 0; i < report.rows.size() && i < top; ++i) {
        const auto& [key, n] = report.rows[i];
        double share = report.total ? 100.0 * n / report.total : 0.0;
        out << key << std::string(width - key.size() + 2, ' ') << n << "  " << fmt("%.1f%%", share) << '\n';
    }
    return out.str();
}

std::string render_csv(const DistributionReport& report) {
    std::ostringstream out;
    out << "kind,key,count,share\n";
    for (const auto& [key, n] : report.rows) {
        double share = report.total ? static_cast<double>(n) / report.total : 0.0;
        out << to_string(report.kind) << ',' << csv_field(key) << ',' << n << ',' << format_rate(share) << '\n';
    }
    return out.str();
}

std::string render_table(const ContinuationStats& stats) {
    std::ostringstream out;
    out << "asked      " << stats.asked << '\n'
        << "continued  " << stats.continued << '\n'
        << "rate       " << (stats.rate ? format_rate(*stats.rate) : "n/a") << '\n';
    return out.str();
}

std::string render_csv(const ContinuationStats& stats) {
    std::ostringstream out;
    out << "asked,continued,rate\n"
        << stats.asked << ',' << stats.continued << ',' << (stats.rate ? format_rate(*stats.rate) : "") << '\n';
    return out.str();
}

std::string render_table(const IcebreakerStats& stats) {
    std::ostringstream out;
    out << "responses   " << stats.responses << '\n'
        << "with topic  " << stats.with_topic << '\n'
        << "rate        " << format_rate(stats.rate) << '\n';
    for (const auto& [topic, n] : stats.topics) out << "  " << topic << "  " << n << '\n';
    return out.str();
}

std::string render_csv(const IcebreakerStats& stats) {
    std::ostringstream out;
    out << "topic,count,responses,with_topic,rate\n";
    for (const auto& [topic, n] : stats.topics) {
        out << csv_field(topic) << ',' << n << ',' << stats.responses << ',' << stats.with_topic << ','
            << format_rate(stats.rate) << '\n';
    }
    if (stats.topics.empty()) out << ",0," << stats.responses << ',' << stats.with_topic << ',' << format_rate(stats.rate) << '\n';
    return out.str();
}

}  // namespace rapport::analytics
