// rapport: command line front end for the dialogue engine and its tooling.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>

#include "rapport/analytics.hpp"
#include "rapport/content_bank.hpp"
#include "rapport/conversation_log.hpp"
#include "rapport/error.hpp"
#include "rapport/experiment.hpp"
#include "rapport/gateway.hpp"
#include "rapport/nlu.hpp"
#include "rapport/serialization.hpp"
#include "rapport/sim_user.hpp"
#include "rapport/user_store.hpp"

namespace fs = std::filesystem;
using namespace rapport;

namespace {

HttpGateway* g_gateway = nullptr;

void on_signal(int) {
    if (g_gateway) g_gateway->stop();
}

std::string bank_dir_or_default(const std::string& dir) {
    return dir.empty() ? default_data_dir().string() : dir;
}

int cmd_serve(const std::string& bank_dir, const std::string& store_dir, const std::string& logs, int port,
              const std::string& host, const std::string& experiment_file, int idle_seconds) {
    auto bank = load_assets(bank_dir_or_default(bank_dir));
    fs::create_directories(store_dir);
    FileUserStore store(store_dir, [](const std::string& msg) { std::cerr << msg << '\n'; });
    GatewayConfig config;
    config.log_dir = logs;
    if (!experiment_file.empty()) config.experiment = load_experiment_config(experiment_file);
    config.idle_timeout = std::chrono::seconds(idle_seconds);
    SessionManager sessions(bank, store, config);
    HttpGateway gateway(sessions);
    g_gateway = &gateway;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    gateway.start_reaper(std::chrono::seconds(10));
    std::cerr << "listening on " << host << ":" << port << '\n';
    if (!gateway.listen(host, port)) {
        std::cerr << "could not listen on " << host << ":" << port << '\n';
        return 1;
    }
    return 0;
}

int cmd_bank_validate(const std::string& dir) {
    try {
        auto bank = load_assets(bank_dir_or_default(dir));
        std::cout << "ok: " << bank.registry.size() << " topics, " << bank.gazetteer.size() << " hobbies, "
                  << bank.poq_bank.size() << " questions\n";
        return 0;
    } catch (const ValidationError& e) {
        for (const auto& v : e.violations()) std::cout << v.asset_id << ": " << v.rule << ": " << v.message << '\n';
        return 2;
    }
}

int cmd_user_show(const std::string& id, const std::string& store_dir) {
    FileUserStore store(store_dir, [](const std::string& msg) { std::cerr << msg << '\n'; });
    nlohmann::json j = store.load_user(id);
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_nlu_match(const std::string& kind, const std::string& bank_dir, const std::string& item_id,
                  const std::string& text) {
    auto bank = load_assets(bank_dir_or_default(bank_dir));
    auto utt = normalize(text);
    nlohmann::json out;
    if (kind == "hobby") {
        out["hobbies"] = nlu::match_hobbies(utt, bank.gazetteer);
    } else if (kind == "topic") {
        out["topics"] = nlu::detect_topics(utt, bank.registry);
        if (auto req = nlu::resolve_topic_request(utt, bank.registry, bank.lexicon)) {
            out["request"] = {{"topic", req->topic}, {"trigger", nlu::to_string(req->trigger)}};
        }
    } else if (kind == "wyr" || kind == "hyp") {
        const auto* item = bank.find_poq(item_id);
        if (!item) {
            std::cerr << "unknown item '" << item_id << "'\n";
            return 2;
        }
        if (kind == "wyr") {
            auto m = nlu::match_wyr_answer(utt, *item, bank.lexicon);
            out = {{"outcome", nlu::to_string(m.outcome)}, {"index", m.index}, {"matched_phrase", m.matched_phrase ? nlohmann::json(*m.matched_phrase) : nlohmann::json()}};
        } else {
            auto c = nlu::classify_hyp_answer(utt, *item, bank.lexicon);
            out = {{"kind", nlu::to_string(c.kind)}, {"index", c.index}};
        }
    } else {
        std::cerr << "unknown kind '" << kind << "'\n";
        return 2;
    }
    std::cout << out.dump() << '\n';
    return 0;
}

int cmd_sim_run(std::size_t users, const std::string& config_file, const std::string& out_dir,
                const std::string& bank_dir) {
    auto bank = load_assets(bank_dir_or_default(bank_dir));
    sim::SimConfig config = config_file.empty() ? sim::SimConfig{} : sim::load_sim_config(config_file);
    fs::create_directories(out_dir);
    auto path = fs::path(out_dir) / "simulation.jsonl";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StorageUnavailable("cannot write " + path.string());
    sim::RunOptions options;
    options.log_sink = [&out](const LogRecord& r) { write_record(out, r); };
    auto records = sim::run_simulation(users, bank, config, options);
    std::size_t a = 0;
    for (const auto& r : records) a += r.arm == Arm::A;
    std::cout << "simulated " << records.size() << " conversations (" << a << " in arm A) -> " << path.string() << '\n';
    return 0;
}

int cmd_analytics(const std::string& kind, const std::string& logs_dir, std::optional<Timestamp> from,
                  std::optional<Timestamp> to, const std::string& format, std::size_t top) {
    auto logs = read_log_dir(logs_dir);
    analytics::Window window{from, to};
    bool csv = format == "csv";
    if (kind == "poq_continuation") {
        auto s = analytics::poq_continuation_rate(logs, window);
        std::cout << (csv ? analytics::render_csv(s) : analytics::render_table(s));
    } else if (kind == "icebreaker_rate") {
        auto s = analytics::icebreaker_detection_rate(logs, window);
        std::cout << (csv ? analytics::render_csv(s) : analytics::render_table(s));
    } else if (auto k = analytics::parse_distribution_kind(kind)) {
        auto r = analytics::compute_distribution(logs, *k, window);
        std::cout << (csv ? analytics::render_csv(r) : analytics::render_table(r, top));
    } else {
        std::cerr << "unknown report kind '" << kind << "'\n";
        return 2;
    }
    return 0;
}

int cmd_experiment(const std::string& config_file, const std::string& logs_dir, const std::string& out_file) {
    ExperimentConfig config = config_file.empty() ? ExperimentConfig{} : load_experiment_config(config_file);
    auto records = records_from_logs(read_log_dir(logs_dir));
    auto report = build_report(records, config);
    std::cout << render_table(report);
    if (!out_file.empty()) {
        std::ofstream out(out_file, std::ios::trunc);
        if (!out) throw StorageUnavailable("cannot write " + out_file);
        out << render_csv(report);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Personalized rule-based dialogue engine and experiment tooling"};
    app.require_subcommand(1);
    int rc = 0;

    auto* serve = app.add_subcommand("serve", "Run the HTTP gateway");
    std::string bank_dir, store_dir = "store", logs_dir = "logs", host = "0.0.0.0", experiment_file;
    int port = 8080, idle_seconds = 300;
    serve->add_option("--bank", bank_dir, "Content bank directory (default: $RAPPORT_DATA_DIR or the shipped bank)");
    serve->add_option("--store", store_dir, "User model directory");
    serve->add_option("--logs", logs_dir, "Conversation log directory");
    serve->add_option("--port", port, "Port");
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--experiment", experiment_file, "Experiment config used for arm assignment");
    serve->add_option("--idle-timeout", idle_seconds, "Seconds before an idle session is closed");
    serve->callback([&] { rc = cmd_serve(bank_dir, store_dir, logs_dir, port, host, experiment_file, idle_seconds); });

    auto* bank = app.add_subcommand("bank", "Content bank tools");
    bank->require_subcommand(1);
    auto* validate = bank->add_subcommand("validate", "Load and validate a content bank");
    std::string validate_dir;
    validate->add_option("dir", validate_dir, "Bank directory");
    validate->callback([&] { rc = cmd_bank_validate(validate_dir); });

    auto* user = app.add_subcommand("user", "User model tools");
    user->require_subcommand(1);
    auto* show = user->add_subcommand("show", "Print a stored user model");
    std::string user_id, show_store = "store";
    show->add_option("id", user_id, "User id")->required();
    show->add_option("--store", show_store, "User model directory");
    show->callback([&] { rc = cmd_user_show(user_id, show_store); });

    auto* nlu_cmd = app.add_subcommand("nlu", "Run a single NLU matcher");
    nlu_cmd->require_subcommand(1);
    auto* match = nlu_cmd->add_subcommand("match", "Match an utterance");
    std::string kind, nlu_bank, item_id, text;
    match->add_option("--kind", kind, "hobby | topic | wyr | hyp")->required();
    match->add_option("--bank", nlu_bank, "Content bank directory");
    match->add_option("--item", item_id, "Question id for wyr/hyp");
    match->add_option("utterance", text, "User utterance")->required();
    match->callback([&] { rc = cmd_nlu_match(kind, nlu_bank, item_id, text); });

    auto* sim_cmd = app.add_subcommand("sim", "Simulated users");
    sim_cmd->require_subcommand(1);
    auto* run = sim_cmd->add_subcommand("run", "Simulate conversations and write logs");
    std::size_t users = 1000;
    std::string sim_config, sim_out = "logs", sim_bank;
    run->add_option("--users", users, "Number of simulated users");
    run->add_option("--config", sim_config, "Simulation config (JSON)");
    run->add_option("--out", sim_out, "Output log directory");
    run->add_option("--bank", sim_bank, "Content bank directory");
    run->callback([&] { rc = cmd_sim_run(users, sim_config, sim_out, sim_bank); });

    auto* analytics_cmd = app.add_subcommand("analytics", "Log reports");
    analytics_cmd->require_subcommand(1);
    auto* report = analytics_cmd->add_subcommand("report", "Compute a report over conversation logs");
    std::string report_kind, report_logs = "logs", format = "table";
    std::optional<Timestamp> from, to;
    std::size_t top = 20;
    report->add_option("--kind", report_kind,
                       "hobby | topic_request_explicit | topic_request_menu | opinion_polarity_by_topic | "
                       "icebreaker_topics | poq_continuation | icebreaker_rate")
        ->required();
    report->add_option("--logs", report_logs, "Log directory or file");
    report->add_option("--from", from, "Window start, ms since epoch (inclusive)");
    report->add_option("--to", to, "Window end, ms since epoch (exclusive)");
    report->add_option("--format", format, "table | csv")->check(CLI::IsMember({"table", "csv"}));
    report->add_option("--top", top, "Rows shown in table format");
    report->callback([&] { rc = cmd_analytics(report_kind, report_logs, from, to, format, top); });

    auto* experiment = app.add_subcommand("experiment", "A/B analysis");
    experiment->require_subcommand(1);
    auto* exp_run = experiment->add_subcommand("run", "Build the threshold report from logs");
    std::string exp_config, exp_logs = "logs", exp_out;
    exp_run->add_option("--config", exp_config, "Experiment config (JSON)");
    exp_run->add_option("--logs", exp_logs, "Log directory or file");
    exp_run->add_option("--out", exp_out, "CSV output path");
    exp_run->callback([&] { rc = cmd_experiment(exp_config, exp_logs, exp_out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return rc;
}
