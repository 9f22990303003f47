#include "rapport/conversation_log.hpp"

#include <algorithm>

#include "rapport/error.hpp"
#include "rapport/serialization.hpp"

namespace rapport {

using nlohmann::json;

const char* to_string(Speaker s) {
    switch (s) {
        case Speaker::user: return "user";
        case Speaker::engine: return "engine";
        case Speaker::system: return "system";
    }
    return "system";
}

std::optional<Speaker> parse_speaker(std::string_view s) {
    if (s == "user") return Speaker::user;
    if (s == "engine") return Speaker::engine;
    if (s == "system") return Speaker::system;
    return std::nullopt;
}

json annotations_to_json(const EngineResponse& response) {
    const auto& a = response.annotations;
    json j = json::object();
    if (a.poq_sequence) {
        const auto& p = *a.poq_sequence;
        json poq = {{"item", p.item}, {"topic", p.topic}, {"kind", to_string(p.kind)}, {"step", to_string(p.step)}};
        if (p.match) poq["match"] = *p.match;
        j["poq_sequence"] = poq;
    }
    if (a.topic) j["topic"] = *a.topic;
    if (a.intro_stage) j["intro_stage"] = *a.intro_stage;
    json events = json::array();
    for (const auto& e : a.events_emitted) events.push_back(event_to_json(e));
    j["events_emitted"] = events;
    j["expect"] = to_string(a.expect);
    if (!a.menu.empty()) j["menu"] = a.menu;
    if (a.topic_request) j["topic_request"] = {{"topic", a.topic_request->topic}, {"trigger", a.topic_request->trigger}};
    if (a.icebreaker) j["icebreaker"] = {{"question", a.icebreaker->question}, {"topics", a.icebreaker->topics}};
    j["done"] = response.done;
    return j;
}

json policy_to_json(const ArmPolicy& policy) {
    return {{"wyr_enabled", policy.wyr_enabled},
            {"hyp_enabled", policy.hyp_enabled},
            {"min_topic_exchanges_before_poq", policy.min_topic_exchanges_before_poq}};
}

json to_json(const LogRecord& r) {
    return {{"conversation_id", r.conversation_id},
            {"turn", r.turn},
            {"speaker", to_string(r.speaker)},
            {"text", r.text},
            {"annotations", r.annotations},
            {"timestamp", r.timestamp}};
}

LogRecord record_from_json(const json& j, const std::string& source, std::size_t line) {
    if (!j.is_object()) throw ParseError(source, line, "record is not an object");
    LogRecord r;
    try {
        r.conversation_id = j.at("conversation_id").get<std::string>();
        r.turn = j.at("turn").get<int>();
        auto speaker = parse_speaker(j.at("speaker").get<std::string>());
        if (!speaker) throw ParseError(source, line, "unknown speaker");
        r.speaker = *speaker;
        r.text = j.value("text", std::string{});
        r.annotations = j.value("annotations", json::object());
        r.timestamp = j.value("timestamp", Timestamp{0});
    } catch (const json::exception& e) {
        throw ParseError(source, line, e.what());
    }
    return r;
}

void write_record(std::ostream& out, const LogRecord& r) {
    out << to_json(r).dump() << '\n';
}

std::vector<LogRecord> read_log(std::istream& in, const std::string& source) {
    std::vector<LogRecord> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(source, n, e.what());
        }
        out.push_back(record_from_json(j, source, n));
    }
    return out;
}

std::vector<LogRecord> read_log_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingAsset(path.string());
    return read_log(in, path.string());
}

std::vector<LogRecord> read_log_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (fs::is_regular_file(dir)) return read_log_file(dir);
    if (!fs::is_directory(dir)) throw MissingAsset(dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<LogRecord> out;
    for (const auto& f : files) {
        auto part = read_log_file(f);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
}

JsonlFileSink::JsonlFileSink(const std::filesystem::path& path)
    : out_(std::make_shared<std::ofstream>(path, std::ios::app)), mutex_(std::make_shared<std::mutex>()) {
    if (!*out_) throw StorageUnavailable("cannot open log file " + path.string());
}

void JsonlFileSink::operator()(const LogRecord& r) {
    std::lock_guard lock(*mutex_);
    write_record(*out_, r);
    out_->flush();
}

ConversationLogger::ConversationLogger(std::string conversation_id, LogSink sink)
    : conversation_id_(std::move(conversation_id)), sink_(std::move(sink)) {}

void ConversationLogger::emit(Speaker speaker, std::string text, json annotations, Timestamp at) {
    LogRecord r{conversation_id_, turn_++, speaker, std::move(text), std::move(annotations), at};
    if (sink_) sink_(r);
}

void ConversationLogger::start(const std::string& user_id, const std::string& arm, const ArmPolicy& policy,
                               Timestamp at) {
    emit(Speaker::system, "start",
         {{"event", "start"}, {"user_id", user_id}, {"arm", arm}, {"policy", policy_to_json(policy)}}, at);
}

void ConversationLogger::user(const std::string& text, Timestamp at) {
    emit(Speaker::user, text, json::object(), at);
}

void ConversationLogger::engine(const EngineResponse& response, Timestamp at) {
    emit(Speaker::engine, response.text, annotations_to_json(response), at);
}

void ConversationLogger::end(int exchanges, const std::string& reason, Timestamp at) {
    emit(Speaker::system, "end", {{"event", "end"}, {"exchanges", exchanges}, {"reason", reason}}, at);
}

void ConversationLogger::rating(int value, Timestamp at) {
    emit(Speaker::system, "rating", {{"event", "rating"}, {"rating", value}}, at);
}

}  // namespace rapport
