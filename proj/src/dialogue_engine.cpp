#include "rapport/dialogue_engine.hpp"

#include <algorithm>
#include <cctype>
#include <random>

#include "rapport/error.hpp"

namespace rapport {

const char* to_string(IntroStageId s) {
    switch (s) {
        case IntroStageId::greet_name: return "greet_name";
        case IntroStageId::recent_activities: return "recent_activities";
        case IntroStageId::work_school: return "work_school";
        case IntroStageId::travel: return "travel";
        case IntroStageId::fun_hobbies: return "fun_hobbies";
        case IntroStageId::advice: return "advice";
        case IntroStageId::invite_question: return "invite_question";
        case IntroStageId::handoff_to_topics: return "handoff_to_topics";
    }
    return "unknown";
}

const char* to_string(Expect e) {
    switch (e) {
        case Expect::name: return "name";
        case Expect::hobby: return "hobby";
        case Expect::occupation: return "occupation";
        case Expect::yes_no: return "yes_no";
        case Expect::travel: return "travel";
        case Expect::open: return "open";
        case Expect::advice: return "advice";
        case Expect::question: return "question";
        case Expect::menu: return "menu";
        case Expect::wyr: return "wyr";
        case Expect::hyp: return "hyp";
        case Expect::chat: return "chat";
        case Expect::none: return "none";
    }
    return "none";
}

const char* to_string(PoqStep s) {
    return s == PoqStep::ask ? "ask" : "ground";
}

LedgerStatus ConversationState::ledger_status(const TopicId& topic, PoqKind kind) const {
    auto it = poq_ledger.find({topic, kind});
    return it == poq_ledger.end() ? LedgerStatus::unused : it->second.status;
}

namespace {

std::string substitute(std::string text, std::string_view key, std::string_view value) {
    std::string pattern = "{" + std::string(key) + "}";
    for (auto pos = text.find(pattern); pos != std::string::npos; pos = text.find(pattern, pos + value.size())) {
        text.replace(pos, pattern.size(), value);
    }
    return text;
}

template <typename T>
const T& pick(const std::vector<T>& items, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> dist(0, items.size() - 1);
    return items[dist(rng)];
}

std::string options_text(const std::vector<std::string>& names) {
    if (names.size() == 1) return names[0];
    if (names.size() == 2) return names[0] + " or " + names[1];
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i + 1 == names.size()) {
            out += "or " + names[i];
        } else {
            out += names[i] + ", ";
        }
    }
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

const std::vector<IntroStageId>& scripted_stages() {
    static const std::vector<IntroStageId> ids = {IntroStageId::recent_activities, IntroStageId::work_school,
                                                  IntroStageId::travel, IntroStageId::fun_hobbies};
    return ids;
}

// Builds one engine response. Holds references to the state and model being
// updated for this turn.
class Turn {
public:
    Turn(ConversationState& state, UserModel& model, const ContentBank& bank, Timestamp now)
        : s_(state), m_(model), bank_(bank), now_(now) {}

    EngineResponse& response() { return r_; }

    void say(std::string text) {
        if (!text.empty()) parts_.push_back(std::move(text));
    }

    void emit(UserModelEvent ev) {
        m_ = apply_event(std::move(m_), ev, now_);
        r_.annotations.events_emitted.push_back(std::move(ev));
    }

    EngineResponse finish() {
        r_.text = join(parts_, " ");
        if (r_.text.empty()) r_.text = bank_.intro_script.neutral_ack;
        if (s_.phase.kind == PhaseKind::topic) r_.annotations.topic = s_.phase.topic;
        if (s_.phase.kind == PhaseKind::closing) {
            r_.done = true;
            r_.annotations.expect = Expect::none;
        }
        s_.last_exchange_kind = r_.annotations.poq_sequence ? ExchangeKind::poq : ExchangeKind::other;
        return r_;
    }

    // ---- intro ---------------------------------------------------------

    void greet() {
        const auto& intro = bank_.intro_script;
        r_.annotations.intro_stage = to_string(IntroStageId::greet_name);
        if (m_.name) {
            say(substitute(intro.greeting_returning, "name", *m_.name));
            prompt_stage(IntroStageId::recent_activities, 0, false);
            r_.annotations.intro_stage = to_string(IntroStageId::greet_name);
        } else {
            say(intro.greeting_new);
            s_.phase = Phase{PhaseKind::intro, IntroStageId::greet_name, 0, {}};
            r_.annotations.expect = Expect::name;
        }
    }

    void intro_turn(const NormalizedUtterance& utt, const std::vector<HobbyId>& hobbies) {
        const auto& intro = bank_.intro_script;
        auto stage = s_.phase.stage;
        switch (stage) {
            case IntroStageId::greet_name: {
                if (auto name = nlu::extract_name(utt, bank_.lexicon)) {
                    name->front() = static_cast<char>(std::toupper(static_cast<unsigned char>(name->front())));
                    emit(event::NameStated{*name});
                    say(substitute(intro.name_ack, "name", *name));
                } else if (s_.stage_retries == 0) {
                    ++s_.stage_retries;
                    say(intro.name_fallback);
                    r_.annotations.intro_stage = to_string(stage);
                    r_.annotations.expect = Expect::name;
                    return;
                } else {
                    say(intro.neutral_ack);
                }
                prompt_stage(IntroStageId::recent_activities, 0, true);
                return;
            }
            case IntroStageId::recent_activities:
            case IntroStageId::work_school:
            case IntroStageId::travel:
            case IntroStageId::fun_hobbies:
                scripted_turn(utt, hobbies);
                return;
            case IntroStageId::advice: {
                if (!utt.empty()) emit(event::AdviceGiven{utt.raw});
                auto topics = nlu::detect_topics(utt, bank_.registry);
                for (const auto& t : topics) emit(event::TopicRequested{t});
                r_.annotations.icebreaker = IcebreakerAnnotation{s_.icebreaker, topics};
                say(intro.advice_ack);
                say(intro.invite_question);
                enter_stage(IntroStageId::invite_question);
                r_.annotations.expect = Expect::question;
                return;
            }
            case IntroStageId::invite_question: {
                if (auto faq = nlu::match_persona_question(utt, bank_.persona_faq)) {
                    say(bank_.persona_faq.entries[*faq].answer_text);
                } else if (utt.empty() || nlu::detect_affirmation(utt, bank_.lexicon) == nlu::Affirmation::no) {
                    say(intro.neutral_ack);
                } else {
                    say(bank_.persona_faq.fallback);
                }
                handoff();
                return;
            }
            case IntroStageId::handoff_to_topics:
                handoff();
                return;
        }
    }

    // ---- topics --------------------------------------------------------

    void enter_topic(const TopicId& topic) {
        s_.phase = Phase{PhaseKind::topic, IntroStageId::handoff_to_topics, 0, topic};
        s_.menu_offered.reset();
        s_.menu_retries = 0;
        s_.declined.clear();
        if (std::find(s_.discussed.begin(), s_.discussed.end(), topic) == s_.discussed.end()) {
            s_.discussed.push_back(topic);
        }
        s_.progress.try_emplace(topic);
        continue_topic(false);
    }

    // Next on-topic content: a POQ ask when allowed and eligible, else the
    // next authored sub-dialogue, else a one-off filler while a POQ is still
    // available, else a menu of new topics.
    void continue_topic(bool allow_poq) {
        const auto& topic = s_.phase.topic;
        auto& progress = s_.progress[topic];
        const auto* entry = bank_.registry.find(topic);
        if (allow_poq && s_.last_exchange_kind != ExchangeKind::poq &&
            progress.non_poq_exchanges >= s_.policy.min_topic_exchanges_before_poq) {
            for (auto kind : {PoqKind::wyr, PoqKind::hyp}) {
                if (!poq_allowed(topic, kind)) continue;
                if (const auto* item = select_poq(s_, topic, kind, m_.age_group, bank_, s_.rng)) {
                    ask(*item);
                    return;
                }
            }
        }
        if (entry && progress.next_subdialogue < entry->subdialogues.size()) {
            say(entry->subdialogues[progress.next_subdialogue++]);
            ++progress.non_poq_exchanges;
            r_.annotations.expect = Expect::chat;
            return;
        }
        if (!progress.filler_used && any_poq_available(topic)) {
            progress.filler_used = true;
            ++progress.non_poq_exchanges;
            say(substitute(bank_.intro_script.filler, "topic", display(topic)));
            r_.annotations.expect = Expect::chat;
            return;
        }
        offer_menu(substitute(bank_.intro_script.topic_exhausted, "topic", display(topic)));
    }

    void ground(const NormalizedUtterance& utt) {
        auto pending = *s_.pending_poq;
        s_.pending_poq.reset();
        const auto* item = bank_.find_poq(pending.item);
        if (!item) throw InvalidState("pending poq item vanished: " + pending.item);
        PoqAnswer answer;
        std::string match;
        if (item->kind == PoqKind::wyr) {
            auto m = nlu::match_wyr_answer(utt, *item, bank_.lexicon);
            match = nlu::to_string(m.outcome);
            answer = m;
        } else {
            auto c = nlu::classify_hyp_answer(utt, *item, bank_.lexicon);
            match = nlu::to_string(c.kind);
            answer = c;
        }
        say(assemble_poq_exchange(*item, answer, pick(bank_.lexicon.texts("transitions"), s_.rng)));
        s_.poq_ledger[{pending.topic, pending.kind}] = LedgerEntry{LedgerStatus::completed, pending.item};
        s_.progress[pending.topic].non_poq_exchanges = 0;
        ++s_.completed_poqs;
        r_.annotations.poq_sequence = PoqAnnotation{pending.item, pending.topic, pending.kind, PoqStep::ground, match};
    }

    void offer_menu(std::string lead) {
        std::vector<TopicId> options;
        for (const auto& id : rank_topics(m_, bank_.registry, bank_.gazetteer)) {
            const auto* t = bank_.registry.find(id);
            if (!t || !t->menu_eligible) continue;
            if (contains(s_.discussed, id) || contains(s_.declined, id)) continue;
            options.push_back(id);
            if (options.size() == 3) break;
        }
        if (options.empty()) {
            close();
            return;
        }
        std::vector<std::string> names;
        for (const auto& id : options) names.push_back(lower(display(id)));
        say(std::move(lead));
        say(substitute(bank_.intro_script.menu_prompt, "options", options_text(names)));
        s_.menu_offered = options;
        r_.annotations.menu = options;
        r_.annotations.expect = Expect::menu;
    }

    void menu_turn(const NormalizedUtterance& utt) {
        const auto offered = *s_.menu_offered;
        if (auto choice = nlu::resolve_menu_choice(utt, offered, bank_.registry, bank_.lexicon)) {
            bool in_menu = contains(offered, *choice);
            request_topic(*choice, in_menu ? "menu" : "explicit_command");
            return;
        }
        if (++s_.menu_retries >= 2) {
            // Stop re-asking; take the best-ranked offer.
            say(bank_.intro_script.neutral_ack);
            say(substitute(bank_.intro_script.topic_request_ack, "topic", display(offered.front())));
            enter_topic(offered.front());
            return;
        }
        s_.declined.insert(s_.declined.end(), offered.begin(), offered.end());
        offer_menu(bank_.intro_script.menu_retry);
    }

    void request_topic(const TopicId& topic, const char* trigger) {
        emit(event::TopicRequested{topic});
        r_.annotations.topic_request = TopicRequestAnnotation{topic, trigger};
        say(substitute(bank_.intro_script.topic_request_ack, "topic", display(topic)));
        enter_topic(topic);
    }

    void close() {
        say(bank_.intro_script.closing);
        s_.phase = Phase{PhaseKind::closing, s_.phase.stage, 0, s_.phase.topic};
        s_.menu_offered.reset();
    }

    void chat_ack() {
        const auto& acks = bank_.lexicon.texts("chat_acks");
        if (!acks.empty()) say(pick(acks, s_.rng));
    }

private:
    static bool contains(const std::vector<TopicId>& v, const TopicId& id) {
        return std::find(v.begin(), v.end(), id) != v.end();
    }

    std::string display(const TopicId& id) const {
        const auto* t = bank_.registry.find(id);
        return t ? t->display_name : id;
    }

    bool poq_allowed(const TopicId& topic, PoqKind kind) const {
        const auto* t = bank_.registry.find(topic);
        return t && t->has_poq && s_.policy.enabled(kind) && s_.ledger_status(topic, kind) == LedgerStatus::unused;
    }

    bool any_poq_available(const TopicId& topic) const {
        for (auto kind : {PoqKind::wyr, PoqKind::hyp}) {
            if (!poq_allowed(topic, kind)) continue;
            for (const auto& item : bank_.poq_bank) {
                if (item.topic == topic && item.kind == kind && (!m_.is_child() || item.kid_friendly)) return true;
            }
        }
        return false;
    }

    void ask(const PoqItem& item) {
        say(pick(bank_.lexicon.texts("poq_lead_ins"), s_.rng));
        say(item.question_text);
        s_.poq_ledger[{item.topic, item.kind}] = LedgerEntry{LedgerStatus::asked, item.id};
        s_.pending_poq = PendingPoq{item.id, item.topic, item.kind};
        r_.annotations.poq_sequence = PoqAnnotation{item.id, item.topic, item.kind, PoqStep::ask, std::nullopt};
        r_.annotations.expect = item.kind == PoqKind::wyr ? Expect::wyr : Expect::hyp;
    }

    void enter_stage(IntroStageId id, std::size_t step = 0) {
        s_.phase = Phase{PhaseKind::intro, id, step, {}};
        s_.stage_retries = 0;
        r_.annotations.intro_stage = to_string(id);
    }

    static Expect step_expect(IntroStageId id, std::size_t step, const IntroStep& st) {
        if (st.branch) return Expect::yes_no;
        if (step > 0) return Expect::open;
        switch (id) {
            case IntroStageId::recent_activities:
            case IntroStageId::fun_hobbies: return Expect::hobby;
            case IntroStageId::work_school: return Expect::occupation;
            case IntroStageId::travel: return Expect::travel;
            default: return Expect::open;
        }
    }

    const IntroStage* script_for(IntroStageId id) const {
        return bank_.intro_script.stage(to_string(id));
    }

    // Says the prompt for (stage, step), moving on to later stages when the
    // script has nothing to ask there.
    void prompt_stage(IntroStageId id, std::size_t step, bool /*after_ack*/) {
        const auto& stages = scripted_stages();
        auto it = std::find(stages.begin(), stages.end(), id);
        while (it != stages.end()) {
            const auto* script = script_for(*it);
            if (script && step < script->steps.size()) {
                const auto& st = script->steps[step];
                std::string place = s_.travel_place.empty() ? "there" : s_.travel_place;
                say(substitute(st.prompt, "travel", place));
                enter_stage(*it, step);
                r_.annotations.expect = step_expect(*it, step, st);
                return;
            }
            ++it;
            step = 0;
        }
        prompt_advice();
    }

    void prompt_advice() {
        const auto& intro = bank_.intro_script;
        const Icebreaker* q = nullptr;
        for (const auto& ice : intro.icebreakers) {
            if (ice.id == s_.icebreaker) q = &ice;
        }
        if (!q) q = &intro.icebreakers.front();
        say(intro.advice_preface);
        say(q->text);
        enter_stage(IntroStageId::advice);
        r_.annotations.expect = Expect::advice;
    }

    void scripted_turn(const NormalizedUtterance& utt, const std::vector<HobbyId>& hobbies) {
        auto id = s_.phase.stage;
        auto step = s_.phase.step;
        const auto* script = script_for(id);
        if (!script || step >= script->steps.size()) {
            prompt_stage(id, step + 1, true);
            return;
        }
        const auto& lex = bank_.lexicon;
        if (step == 0 && id == IntroStageId::work_school) {
            if (auto occ = nlu::detect_occupation(utt, lex)) emit(event::OccupationSignal{*occ});
        }
        if (step == 0 && id == IntroStageId::travel) {
            if (auto place = nlu::extract_travel_destination(utt, lex)) {
                s_.travel_place = *place;
                emit(event::TravelInterest{*place});
            }
        }
        const auto& st = script->steps[step];
        if (utt.empty()) {
            say(bank_.intro_script.neutral_ack);
        } else if (st.branch) {
            switch (nlu::detect_affirmation(utt, lex)) {
                case nlu::Affirmation::yes: say(st.branch->yes); break;
                case nlu::Affirmation::no: say(st.branch->no); break;
                case nlu::Affirmation::unknown: say(st.branch->unknown); break;
            }
        } else if (!hobbies.empty() && !script->hobby_ack.empty()) {
            const auto* h = bank_.gazetteer.find(hobbies.front());
            say(substitute(script->hobby_ack, "hobby", h ? lower(h->display_name) : hobbies.front()));
        } else {
            say(script->ack);
        }
        prompt_stage(id, step + 1, true);
    }

    void handoff() {
        for (const auto& id : rank_topics(m_, bank_.registry, bank_.gazetteer)) {
            const auto* t = bank_.registry.find(id);
            if (!t || !t->menu_eligible || contains(s_.discussed, id)) continue;
            say(substitute(bank_.intro_script.handoff, "topic", t->display_name));
            enter_topic(id);
            return;
        }
        close();
    }

    ConversationState& s_;
    UserModel& m_;
    const ContentBank& bank_;
    Timestamp now_;
    EngineResponse r_;
    std::vector<std::string> parts_;
};

}  // namespace

StartResult start_conversation(const std::string& user_id, const ContentBank& bank, UserStore& store,
                               const ArmPolicy& policy, std::uint64_t seed, std::string conversation_id) {
    auto lease = store.open_session(user_id);
    UserModel model = store.load_user(user_id);
    ++model.conversation_count;

    ConversationState state;
    state.conversation_id = conversation_id.empty() ? user_id + "-" + std::to_string(model.conversation_count)
                                                    : std::move(conversation_id);
    state.user_id = user_id;
    state.rng_seed = seed;
    state.rng.seed(seed);
    state.policy = policy;
    if (!bank.intro_script.icebreakers.empty()) state.icebreaker = pick(bank.intro_script.icebreakers, state.rng).id;

    Turn turn(state, model, bank, 0);
    turn.greet();
    auto response = turn.finish();
    return StartResult{std::move(state), std::move(response), std::move(model), std::move(lease)};
}

AdvanceResult advance(ConversationState state, std::string_view utterance, const ContentBank& bank, UserModel model,
                      Timestamp now) {
    if (state.phase.kind == PhaseKind::closing) throw InvalidState("conversation " + state.conversation_id + " is closed");
    ++state.exchange_count;
    const auto utt = normalize(utterance);
    const auto& lex = bank.lexicon;

    Turn turn(state, model, bank, now);

    auto hobbies = nlu::match_hobbies(utt, bank.gazetteer);
    for (const auto& h : hobbies) turn.emit(event::HobbyDetected{h});
    if (auto age = nlu::detect_age_signal(utt, lex)) turn.emit(event::AgeSignal{*age});
    if (auto op = nlu::detect_opinion(utt, bank.registry, bank.gazetteer, lex, state.exchange_count)) {
        turn.emit(event::OpinionStated{*op});
    }

    if (nlu::is_stop_request(utt, lex)) {
        turn.close();
        auto response = turn.finish();
        return AdvanceResult{std::move(state), std::move(response), std::move(model)};
    }

    auto request = nlu::resolve_topic_request(utt, bank.registry, lex);
    bool explicit_request = request && request->trigger == nlu::TopicTrigger::explicit_command;

    if (state.phase.kind == PhaseKind::intro) {
        if (explicit_request) {
            turn.request_topic(request->topic, "explicit_command");
        } else {
            turn.intro_turn(utt, hobbies);
        }
    } else if (state.pending_poq) {
        turn.ground(utt);
        if (explicit_request && request->topic != state.phase.topic) {
            turn.request_topic(request->topic, "explicit_command");
        } else {
            turn.continue_topic(false);
        }
    } else if (state.menu_offered) {
        if (explicit_request) {
            bool in_menu = std::find(state.menu_offered->begin(), state.menu_offered->end(), request->topic) !=
                           state.menu_offered->end();
            turn.request_topic(request->topic, in_menu ? "menu" : "explicit_command");
        } else {
            turn.menu_turn(utt);
        }
    } else if (explicit_request) {
        turn.request_topic(request->topic, "explicit_command");
    } else {
        turn.chat_ack();
        turn.continue_topic(true);
    }

    auto response = turn.finish();
    return AdvanceResult{std::move(state), std::move(response), std::move(model)};
}

const PoqItem* select_poq(const ConversationState& state, const TopicId& topic, PoqKind kind, AgeGroup age_group,
                          const ContentBank& bank, std::mt19937_64& rng) {
    if (state.ledger_status(topic, kind) != LedgerStatus::unused) return nullptr;
    std::vector<const PoqItem*> eligible;
    for (const auto& item : bank.poq_bank) {
        if (item.topic != topic || item.kind != kind) continue;
        if (age_group == AgeGroup::child && !item.kid_friendly) continue;
        eligible.push_back(&item);
    }
    if (eligible.empty()) return nullptr;
    std::uniform_int_distribution<std::size_t> dist(0, eligible.size() - 1);
    return eligible[dist(rng)];
}

std::string assemble_poq_exchange(const PoqItem& item, const PoqAnswer& answer, std::string_view transition) {
    const std::string* grounding = &item.generic_grounding;
    if (const auto* w = std::get_if<nlu::WyrMatch>(&answer)) {
        if (w->outcome == nlu::WyrMatch::Outcome::choice && w->index >= 0 &&
            static_cast<std::size_t>(w->index) < item.expected_answers.size()) {
            grounding = &item.expected_answers[static_cast<std::size_t>(w->index)].grounding;
        }
    } else if (const auto* h = std::get_if<nlu::HypClass>(&answer)) {
        if (h->kind == nlu::HypClass::Kind::matched_option && h->index >= 0 &&
            static_cast<std::size_t>(h->index) < item.expected_answers.size()) {
            grounding = &item.expected_answers[static_cast<std::size_t>(h->index)].grounding;
        }
    }
    std::string out = *grounding;
    out += " ";
    out += item.agent_opinion;
    if (!transition.empty()) {
        out += " ";
        out += transition;
    }
    return out;
}

void finish_conversation(UserStore& store, const UserModel& model) {
    store.save_user(model);
}

}  // namespace rapport
