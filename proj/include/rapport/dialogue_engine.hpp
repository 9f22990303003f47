#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rapport/content_bank.hpp"
#include "rapport/nlu.hpp"
#include "rapport/user_model.hpp"
#include "rapport/user_store.hpp"

namespace rapport {

// Which personal opinion question strategies a conversation may use.
struct ArmPolicy {
    bool wyr_enabled = true;
    bool hyp_enabled = true;
    // On-topic non-POQ exchanges required before an ask, counted from the
    // start of the topic or from the topic's previous POQ.
    int min_topic_exchanges_before_poq = 4;

    bool enabled(PoqKind kind) const { return kind == PoqKind::wyr ? wyr_enabled : hyp_enabled; }
    bool operator==(const ArmPolicy&) const = default;
};

enum class IntroStageId {
    greet_name,
    recent_activities,
    work_school,
    travel,
    fun_hobbies,
    advice,
    invite_question,
    handoff_to_topics
};
const char* to_string(IntroStageId s);

// What kind of user input the engine's last prompt solicits. Used by
// simulated users and debug tooling; never by the engine itself.
enum class Expect { name, hobby, occupation, yes_no, travel, open, advice, question, menu, wyr, hyp, chat, none };
const char* to_string(Expect e);

enum class PoqStep { ask, ground };
const char* to_string(PoqStep s);

struct PoqAnnotation {
    PoqId item;
    TopicId topic;
    PoqKind kind = PoqKind::wyr;
    PoqStep step = PoqStep::ask;
    std::optional<std::string> match;  // answer classification, ground step only

    bool operator==(const PoqAnnotation&) const = default;
};

struct TopicRequestAnnotation {
    TopicId topic;
    std::string trigger;  // "explicit_command" or "menu"

    bool operator==(const TopicRequestAnnotation&) const = default;
};

struct IcebreakerAnnotation {
    std::string question;
    std::vector<TopicId> topics;

    bool operator==(const IcebreakerAnnotation&) const = default;
};

struct ResponseAnnotations {
    std::optional<PoqAnnotation> poq_sequence;
    std::optional<TopicId> topic;
    std::optional<std::string> intro_stage;
    std::vector<UserModelEvent> events_emitted;
    Expect expect = Expect::chat;
    std::vector<TopicId> menu;
    std::optional<TopicRequestAnnotation> topic_request;
    std::optional<IcebreakerAnnotation> icebreaker;

    bool operator==(const ResponseAnnotations&) const = default;
};

struct EngineResponse {
    std::string text;
    ResponseAnnotations annotations;
    bool done = false;

    bool operator==(const EngineResponse&) const = default;
};

enum class LedgerStatus { unused, asked, completed };

struct LedgerEntry {
    LedgerStatus status = LedgerStatus::unused;
    PoqId item;

    bool operator==(const LedgerEntry&) const = default;
};

enum class PhaseKind { intro, topic, closing };
enum class ExchangeKind { poq, other };

struct Phase {
    PhaseKind kind = PhaseKind::intro;
    IntroStageId stage = IntroStageId::greet_name;  // intro: the stage awaiting the user's answer
    std::size_t step = 0;                           // intro: step within a scripted stage
    TopicId topic;                                  // topic

    bool operator==(const Phase&) const = default;
};

struct TopicProgress {
    std::size_t next_subdialogue = 0;
    int non_poq_exchanges = 0;  // since topic entry or its last POQ
    bool filler_used = false;

    bool operator==(const TopicProgress&) const = default;
};

struct PendingPoq {
    PoqId item;
    TopicId topic;
    PoqKind kind = PoqKind::wyr;

    bool operator==(const PendingPoq&) const = default;
};

struct ConversationState {
    std::string conversation_id;
    std::string user_id;
    Phase phase;
    int exchange_count = 0;
    std::map<std::pair<TopicId, PoqKind>, LedgerEntry> poq_ledger;
    ExchangeKind last_exchange_kind = ExchangeKind::other;
    std::optional<std::vector<TopicId>> menu_offered;
    std::uint64_t rng_seed = 0;

    ArmPolicy policy;
    std::mt19937_64 rng;
    std::optional<PendingPoq> pending_poq;
    std::map<TopicId, TopicProgress> progress;
    std::vector<TopicId> discussed;
    std::vector<TopicId> declined;  // offered in the current menu round and refused
    int stage_retries = 0;
    int menu_retries = 0;
    std::string icebreaker;
    std::string travel_place;
    int completed_poqs = 0;

    LedgerStatus ledger_status(const TopicId& topic, PoqKind kind) const;
    bool operator==(const ConversationState&) const = default;
};

struct StartResult {
    ConversationState state;
    EngineResponse response;
    UserModel model;
    SessionLease lease;
};

// Opens a conversation: claims the user's session, loads their model and
// produces the greeting. Throws SessionConflict or StorageUnavailable.
StartResult start_conversation(const std::string& user_id, const ContentBank& bank, UserStore& store,
                               const ArmPolicy& policy, std::uint64_t seed, std::string conversation_id = {});

struct AdvanceResult {
    ConversationState state;
    EngineResponse response;
    UserModel model;
};

// Processes one user turn. Throws InvalidState once the conversation closed.
AdvanceResult advance(ConversationState state, std::string_view utterance, const ContentBank& bank, UserModel model,
                      Timestamp now = 0);

// Uniform seeded choice among eligible items, or nullptr.
const PoqItem* select_poq(const ConversationState& state, const TopicId& topic, PoqKind kind, AgeGroup age_group,
                          const ContentBank& bank, std::mt19937_64& rng);

using PoqAnswer = std::variant<nlu::WyrMatch, nlu::HypClass>;

// Grounding (specific when the answer matched an option, generic otherwise),
// then the agent's own opinion, then the transitional phrase.
std::string assemble_poq_exchange(const PoqItem& item, const PoqAnswer& answer, std::string_view transition);

// Persists the model at conversation end; the caller drops the lease after.
void finish_conversation(UserStore& store, const UserModel& model);

}  // namespace rapport
