#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rapport/dialogue_engine.hpp"

namespace rapport {

enum class Speaker { user, engine, system };
const char* to_string(Speaker s);
std::optional<Speaker> parse_speaker(std::string_view s);

// One line of a conversation log. `turn` numbers the records of a
// conversation 0, 1, 2, ... without gaps.
struct LogRecord {
    std::string conversation_id;
    int turn = 0;
    Speaker speaker = Speaker::engine;
    std::string text;
    nlohmann::json annotations = nlohmann::json::object();
    Timestamp timestamp = 0;

    bool operator==(const LogRecord&) const = default;
};

nlohmann::json annotations_to_json(const EngineResponse& response);
nlohmann::json policy_to_json(const ArmPolicy& policy);

nlohmann::json to_json(const LogRecord& r);
// `source` and `line` are only used for error messages.
LogRecord record_from_json(const nlohmann::json& j, const std::string& source, std::size_t line);

void write_record(std::ostream& out, const LogRecord& r);
// Blank lines are skipped. Throws ParseError naming the offending line.
std::vector<LogRecord> read_log(std::istream& in, const std::string& source);
std::vector<LogRecord> read_log_file(const std::filesystem::path& path);
// Every *.jsonl file under `dir` in file name order. A path to a single file
// is read as that file.
std::vector<LogRecord> read_log_dir(const std::filesystem::path& dir);

using LogSink = std::function<void(const LogRecord&)>;

// Appends to <dir>/<conversation_id>.jsonl, flushing after every record.
class JsonlFileSink {
public:
    explicit JsonlFileSink(const std::filesystem::path& path);
    void operator()(const LogRecord& r);

private:
    std::shared_ptr<std::ofstream> out_;
    std::shared_ptr<std::mutex> mutex_;
};

// Stamps records of one conversation with gapless turn numbers.
class ConversationLogger {
public:
    ConversationLogger(std::string conversation_id, LogSink sink);

    void start(const std::string& user_id, const std::string& arm, const ArmPolicy& policy, Timestamp at);
    void user(const std::string& text, Timestamp at);
    void engine(const EngineResponse& response, Timestamp at);
    void end(int exchanges, const std::string& reason, Timestamp at);
    void rating(int value, Timestamp at);

    int next_turn() const { return turn_; }
    const std::string& conversation_id() const { return conversation_id_; }

private:
    void emit(Speaker speaker, std::string text, nlohmann::json annotations, Timestamp at);

    std::string conversation_id_;
    LogSink sink_;
    int turn_ = 0;
};

}  // namespace rapport
