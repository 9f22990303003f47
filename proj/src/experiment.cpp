#include "rapport/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "rapport/error.hpp"

namespace rapport {

using nlohmann::json;

const char* to_string(Arm a) { return a == Arm::A ? "A" : "B"; }

std::optional<Arm> parse_arm(std::string_view s) {
    if (s == "A") return Arm::A;
    if (s == "B") return Arm::B;
    return std::nullopt;
}

namespace {

ArmPolicy policy_from_json(const json& j, ArmPolicy p) {
    p.wyr_enabled = j.value("wyr_enabled", p.wyr_enabled);
    p.hyp_enabled = j.value("hyp_enabled", p.hyp_enabled);
    p.min_topic_exchanges_before_poq = j.value("min_topic_exchanges_before_poq", p.min_topic_exchanges_before_poq);
    return p;
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<double> ratings_of(const std::vector<ConversationRecord>& rs, Arm arm) {
    std::vector<double> out;
    for (const auto& r : rs) {
        if (r.arm == arm && r.rating) out.push_back(*r.rating);
    }
    return out;
}

std::vector<double> lengths_of(const std::vector<ConversationRecord>& rs, Arm arm) {
    std::vector<double> out;
    for (const auto& r : rs) {
        if (r.arm == arm) out.push_back(r.exchanges);
    }
    return out;
}

std::optional<double> mean_or_empty(const std::vector<double>& xs) {
    if (xs.empty()) return std::nullopt;
    return mean(xs);
}

std::optional<double> welch_p_or_empty(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) return std::nullopt;
    return welch_t_test(a, b).p;
}

std::string fixed(std::optional<double> v, int digits) {
    if (!v) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
    return buf;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j, const std::string& source) {
    if (!j.is_object()) throw ParseError(source, 1, "experiment config must be an object");
    ExperimentConfig c;
    try {
        c.name = j.value("name", c.name);
        if (j.contains("arm_a")) c.arm_a = policy_from_json(j.at("arm_a"), c.arm_a);
        if (j.contains("arm_b")) c.arm_b = policy_from_json(j.at("arm_b"), c.arm_b);
        c.traffic_split = j.value("traffic_split", c.traffic_split);
        c.min_exchanges = j.value("min_exchanges", c.min_exchanges);
        if (j.contains("thresholds")) c.thresholds = j.at("thresholds").get<std::vector<int>>();
        c.seed = j.value("seed", c.seed);
    } catch (const json::exception& e) {
        throw ParseError(source, 1, e.what());
    }
    std::vector<Violation> problems;
    if (!(c.traffic_split > 0.0 && c.traffic_split < 1.0)) {
        problems.push_back({source, "config.traffic_split", "traffic_split must lie strictly between 0 and 1"});
    }
    if (!std::is_sorted(c.thresholds.begin(), c.thresholds.end()) ||
        std::any_of(c.thresholds.begin(), c.thresholds.end(), [](int t) { return t < 0; })) {
        problems.push_back({source, "config.thresholds", "thresholds must be non-negative and ascending"});
    }
    if (c.min_exchanges < 0) problems.push_back({source, "config.min_exchanges", "min_exchanges must be >= 0"});
    if (!problems.empty()) throw ValidationError(std::move(problems));
    return c;
}

json to_json(const ExperimentConfig& c) {
    return {{"name", c.name},
            {"arm_a", policy_to_json(c.arm_a)},
            {"arm_b", policy_to_json(c.arm_b)},
            {"traffic_split", c.traffic_split},
            {"min_exchanges", c.min_exchanges},
            {"thresholds", c.thresholds},
            {"seed", c.seed}};
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingAsset(path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string(), 1, e.what());
    }
    return experiment_config_from_json(j, path.string());
}

Arm assign_arm(const std::string& user_id, const ExperimentConfig& config) {
    std::uint64_t h = splitmix(fnv1a(user_id) ^ splitmix(config.seed));
    double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return u < config.traffic_split ? Arm::A : Arm::B;
}

std::vector<ConversationRecord> filter_records(const std::vector<ConversationRecord>& records,
                                               const ExperimentConfig& config, int threshold) {
    std::vector<ConversationRecord> out;
    for (const auto& r : records) {
        if (r.exchanges <= config.min_exchanges) continue;
        if (r.arm == Arm::A && r.poq_count < threshold) continue;
        out.push_back(r);
    }
    return out;
}

ExperimentReport build_report(const std::vector<ConversationRecord>& records, const ExperimentConfig& config) {
    if (records.empty()) throw InsufficientData("no conversation records");
    ExperimentReport report;
    report.name = config.name;
    for (int threshold : config.thresholds) {
        auto kept = filter_records(records, config, threshold);
        ThresholdRow row;
        row.req_poq = threshold;
        for (const auto& r : kept) ++(r.arm == Arm::A ? row.a_count : row.b_count);
        auto ra = ratings_of(kept, Arm::A), rb = ratings_of(kept, Arm::B);
        auto la = lengths_of(kept, Arm::A), lb = lengths_of(kept, Arm::B);
        row.a_mean_rating = mean_or_empty(ra);
        row.b_mean_rating = mean_or_empty(rb);
        row.rating_p = welch_p_or_empty(ra, rb);
        row.a_mean_length = mean_or_empty(la);
        row.b_mean_length = mean_or_empty(lb);
        row.length_p = welch_p_or_empty(la, lb);
        std::vector<double> shares;
        for (const auto& r : kept) {
            if (r.arm == Arm::A && r.exchanges > 0) {
                shares.push_back(static_cast<double>(r.poq_exchange_count) / r.exchanges);
            }
        }
        row.poq_share = mean_or_empty(shares);
        report.rows.push_back(row);
    }

    std::vector<double> poq_all, len_all, poq_rated, rating;
    for (const auto& r : filter_records(records, config, 0)) {
        if (r.arm != Arm::A) continue;
        poq_all.push_back(r.poq_count);
        len_all.push_back(r.exchanges);
        if (r.rating) {
            poq_rated.push_back(r.poq_count);
            rating.push_back(*r.rating);
        }
    }
    auto correlate = [](const std::vector<double>& x, const std::vector<double>& y) -> std::optional<CorrelationResult> {
        try {
            return pearson_r(x, y);
        } catch (const InsufficientData&) {
        } catch (const ConstantInput&) {
        }
        return std::nullopt;
    };
    report.poq_rating = correlate(poq_rated, rating);
    report.poq_length = correlate(poq_all, len_all);
    return report;
}

std::string format_p(double p) {
    if (p < 0.001) return "< .001";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", p);
    std::string s = buf;
    if (s.rfind("0.", 0) == 0) s.erase(0, 1);
    return s;
}

std::string render_table(const ExperimentReport& report) {
    const std::vector<std::string> header = {"Req. POQ", "A convs.", "B convs.", "A rating", "B rating",
                                             "p-value",  "A length", "B length", "p-value",  "POQ share"};
    std::vector<std::vector<std::string>> cells;
    cells.push_back(header);
    auto opt_p = [](std::optional<double> p) { return p ? format_p(*p) : std::string{}; };
    for (const auto& r : report.rows) {
        cells.push_back({std::to_string(r.req_poq), std::to_string(r.a_count), std::to_string(r.b_count),
                         fixed(r.a_mean_rating, 2), fixed(r.b_mean_rating, 2), opt_p(r.rating_p),
                         fixed(r.a_mean_length, 2), fixed(r.b_mean_length, 2), opt_p(r.length_p),
                         r.poq_share ? fixed(*r.poq_share * 100.0, 1) + "%" : std::string{}});
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    std::ostringstream out;
    out << report.name << '\n';
    for (std::size_t k = 0; k < cells.size(); ++k) {
        for (std::size_t i = 0; i < cells[k].size(); ++i) {
            if (i) out << " | ";
            out << std::string(width[i] - cells[k][i].size(), ' ') << cells[k][i];
        }
        out << '\n';
        if (k == 0) {
            for (std::size_t i = 0; i < width.size(); ++i) {
                if (i) out << "-+-";
                out << std::string(width[i], '-');
            }
            out << '\n';
        }
    }
    auto corr = [&](const char* label, const std::optional<CorrelationResult>& c) {
        out << label;
        if (c) {
            auto p = format_p(c->p);
            out << "r = " << fixed(c->r, 3) << ", p " << (p[0] == '<' ? p : "= " + p) << ", n = " << c->n << '\n';
        } else {
            out << "n/a\n";
        }
    };
    corr("POQ count vs rating: ", report.poq_rating);
    corr("POQ count vs length: ", report.poq_length);
    return out.str();
}

std::string render_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "req_poq,a_count,b_count,a_mean_rating,b_mean_rating,rating_p,a_mean_length,b_mean_length,length_p,"
           "poq_share\n";
    for (const auto& r : report.rows) {
        out << r.req_poq << ',' << r.a_count << ',' << r.b_count << ',' << fixed(r.a_mean_rating, 6) << ','
            << fixed(r.b_mean_rating, 6) << ',' << fixed(r.rating_p, 6) << ',' << fixed(r.a_mean_length, 6) << ','
            << fixed(r.b_mean_length, 6) << ',' << fixed(r.length_p, 6) << ',' << fixed(r.poq_share, 6) << '\n';
    }
    return out.str();
}

std::vector<ConversationRecord> records_from_logs(const std::vector<LogRecord>& logs) {
    struct Acc {
        std::optional<Arm> arm;
        int exchanges = 0;
        int poqs = 0;
        std::optional<int> rating;
        std::size_t order = 0;
    };
    std::map<std::string, Acc> by_id;
    for (const auto& r : logs) {
        auto [it, inserted] = by_id.try_emplace(r.conversation_id);
        if (inserted) it->second.order = by_id.size();
        auto& acc = it->second;
        const auto& a = r.annotations;
        switch (r.speaker) {
            case Speaker::user: ++acc.exchanges; break;
            case Speaker::engine:
                if (a.contains("poq_sequence") && a["poq_sequence"].value("step", "") == "ground") ++acc.poqs;
                break;
            case Speaker::system: {
                auto ev = a.value("event", "");
                if (ev == "start") {
                    acc.arm = parse_arm(a.value("arm", ""));
                } else if (ev == "rating" && a.contains("rating")) {
                    acc.rating = a["rating"].get<int>();
                }
                break;
            }
        }
    }
    std::vector<std::pair<std::size_t, ConversationRecord>> ordered;
    for (const auto& [id, acc] : by_id) {
        if (!acc.arm) continue;
        ordered.push_back({acc.order, ConversationRecord{id, *acc.arm, acc.exchanges, acc.poqs, acc.rating, 2 * acc.poqs}});
    }
    std::sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<ConversationRecord> out;
    for (auto& [_, rec] : ordered) out.push_back(std::move(rec));
    return out;
}

}  // namespace rapport
