#include "rapport/content_bank.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#ifndef RAPPORT_DEFAULT_DATA_DIR
#define RAPPORT_DEFAULT_DATA_DIR "data/bank"
#endif

namespace rapport {

using nlohmann::json;

namespace {

std::string describe(const std::vector<Violation>& violations) {
    std::ostringstream out;
    out << violations.size() << " validation violation(s)";
    for (const auto& v : violations) out << "\n  [" << v.rule << "] " << v.asset_id << ": " << v.message;
    return out.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(describe(violations)), violations_(std::move(violations)) {}

const char* to_string(PoqKind kind) {
    return kind == PoqKind::wyr ? "wyr" : "hyp";
}

std::optional<PoqKind> parse_poq_kind(std::string_view s) {
    if (s == "wyr") return PoqKind::wyr;
    if (s == "hyp") return PoqKind::hyp;
    return std::nullopt;
}

TopicRegistry::TopicRegistry(std::vector<TopicEntry> topics) : topics_(std::move(topics)) {
    for (std::size_t i = 0; i < topics_.size(); ++i) {
        by_id_.emplace(topics_[i].id, i);
        for (const auto& expr : topics_[i].referential_expressions) expressions_.add(tokenize(expr), i);
    }
}

const TopicEntry* TopicRegistry::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &topics_[it->second];
}

std::optional<std::size_t> TopicRegistry::position(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

Gazetteer::Gazetteer(std::vector<HobbyEntry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        by_id_.emplace(entries_[i].id, i);
        for (const auto& p : entries_[i].paraphrases) paraphrases_.add(tokenize(p), i);
    }
}

const HobbyEntry* Gazetteer::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &entries_[it->second];
}

const IntroStage* IntroScript::stage(std::string_view id) const {
    for (const auto& s : stages) {
        if (s.id == id) return &s;
    }
    return nullptr;
}

const std::vector<std::vector<std::string>>& Lexicon::phrases(const std::string& name) const {
    static const std::vector<std::vector<std::string>> none;
    auto it = phrase_lists.find(name);
    return it == phrase_lists.end() ? none : it->second;
}

const std::vector<std::string>& Lexicon::texts(const std::string& name) const {
    static const std::vector<std::string> none;
    auto it = text_lists.find(name);
    return it == text_lists.end() ? none : it->second;
}

const std::vector<std::string>& required_lexicon_lists() {
    static const std::vector<std::string> names = {
        "affirm_yes",     "affirm_no",        "both_markers",    "neither_markers",
        "hedge_markers",  "refusal_markers",  "filler_words",    "positive_markers",
        "negative_markers", "discuss_commands", "ordinal_1",     "ordinal_2",
        "ordinal_3",      "menu_rejections",  "stop_phrases",    "name_prefixes",
        "name_stopwords", "student_markers",  "worker_markers",  "not_working_markers",
        "travel_prefixes", "child_cues"};
    return names;
}

const std::vector<std::string>& required_lexicon_texts() {
    static const std::vector<std::string> names = {"chat_acks", "poq_lead_ins", "transitions"};
    return names;
}

const PoqItem* ContentBank::find_poq(std::string_view id) const {
    for (const auto& item : poq_bank) {
        if (item.id == id) return &item;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

struct Source {
    std::string file;
    std::size_t line;
};

[[noreturn]] void fail(const Source& src, const std::string& what) {
    throw ParseError(src.file, src.line, what);
}

const json& field(const json& obj, const char* key, const Source& src) {
    if (!obj.is_object()) fail(src, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(src, std::string("missing field '") + key + "'");
    return *it;
}

std::string get_string(const json& obj, const char* key, const Source& src) {
    const auto& v = field(obj, key, src);
    if (!v.is_string()) fail(src, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

std::string opt_string(const json& obj, const char* key, const Source& src) {
    if (!obj.contains(key)) return {};
    return get_string(obj, key, src);
}

bool get_bool(const json& obj, const char* key, const Source& src, std::optional<bool> fallback = {}) {
    if (fallback && !obj.contains(key)) return *fallback;
    const auto& v = field(obj, key, src);
    if (!v.is_boolean()) fail(src, std::string("field '") + key + "' must be a boolean");
    return v.get<bool>();
}

std::vector<std::string> get_strings(const json& obj, const char* key, const Source& src,
                                     bool optional = false) {
    if (optional && !obj.contains(key)) return {};
    const auto& v = field(obj, key, src);
    if (!v.is_array()) fail(src, std::string("field '") + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) fail(src, std::string("field '") + key + "' must hold strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingAsset(path.filename().string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') ++line;
    }
    return line;
}

json parse_document(const std::filesystem::path& dir, const char* name) {
    auto path = dir / name;
    if (!std::filesystem::exists(path)) throw MissingAsset(name);
    auto text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(name, line_of(text, e.byte), e.what());
    }
}

// Calls fn(record, line_number) for each non-blank line.
template <typename Fn>
void for_each_record(const std::filesystem::path& dir, const char* name, Fn&& fn) {
    auto path = dir / name;
    if (!std::filesystem::exists(path)) throw MissingAsset(name);
    auto text = read_file(path);
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(name, n, e.what());
        }
        fn(rec, Source{name, n});
    }
}

TopicRegistry parse_topics(const json& doc, std::string& version) {
    Source src{asset::topics, 0};
    version = opt_string(doc, "version", src);
    const auto& arr = field(doc, "topics", src);
    if (!arr.is_array()) fail(src, "'topics' must be an array");
    std::vector<TopicEntry> topics;
    for (const auto& t : arr) {
        TopicEntry e;
        e.id = get_string(t, "id", src);
        e.display_name = get_string(t, "display_name", src);
        e.referential_expressions = get_strings(t, "referential_expressions", src);
        e.has_poq = get_bool(t, "has_poq", src);
        e.menu_eligible = get_bool(t, "menu_eligible", src, true);
        e.placeholder = get_bool(t, "placeholder", src, false);
        e.subdialogues = get_strings(t, "subdialogues", src, true);
        topics.push_back(std::move(e));
    }
    return TopicRegistry(std::move(topics));
}

IntroScript parse_intro(const json& doc) {
    Source src{asset::intro, 0};
    IntroScript s;
    s.greeting_new = get_string(doc, "greeting_new", src);
    s.greeting_returning = get_string(doc, "greeting_returning", src);
    s.name_ack = get_string(doc, "name_ack", src);
    s.name_fallback = get_string(doc, "name_fallback", src);
    const auto& stages = field(doc, "stages", src);
    if (!stages.is_array()) fail(src, "'stages' must be an array");
    for (const auto& st : stages) {
        IntroStage stage;
        stage.id = get_string(st, "id", src);
        stage.ack = get_string(st, "ack", src);
        stage.hobby_ack = opt_string(st, "hobby_ack", src);
        const auto& steps = field(st, "steps", src);
        if (!steps.is_array()) fail(src, "'steps' must be an array");
        for (const auto& sp : steps) {
            IntroStep step;
            step.prompt = get_string(sp, "prompt", src);
            if (sp.contains("branch")) {
                const auto& b = sp["branch"];
                step.branch = IntroStep::Branch{get_string(b, "yes", src), get_string(b, "no", src),
                                                get_string(b, "unknown", src)};
            }
            stage.steps.push_back(std::move(step));
        }
        s.stages.push_back(std::move(stage));
    }
    s.advice_preface = get_string(doc, "advice_preface", src);
    const auto& ice = field(doc, "icebreakers", src);
    if (!ice.is_array()) fail(src, "'icebreakers' must be an array");
    for (const auto& q : ice) s.icebreakers.push_back({get_string(q, "id", src), get_string(q, "text", src)});
    s.advice_ack = get_string(doc, "advice_ack", src);
    s.invite_question = get_string(doc, "invite_question", src);
    s.handoff = get_string(doc, "handoff", src);
    s.topic_request_ack = get_string(doc, "topic_request_ack", src);
    s.menu_prompt = get_string(doc, "menu_prompt", src);
    s.menu_retry = get_string(doc, "menu_retry", src);
    s.topic_exhausted = get_string(doc, "topic_exhausted", src);
    s.filler = get_string(doc, "filler", src);
    s.closing = get_string(doc, "closing", src);
    s.neutral_ack = get_string(doc, "neutral_ack", src);
    return s;
}

PersonaFaq parse_persona(const json& doc) {
    Source src{asset::persona, 0};
    PersonaFaq faq;
    faq.fallback = get_string(doc, "fallback", src);
    const auto& arr = field(doc, "faq", src);
    if (!arr.is_array()) fail(src, "'faq' must be an array");
    for (const auto& e : arr) {
        faq.entries.push_back({get_strings(e, "question_phrases", src), get_string(e, "answer_text", src)});
    }
    return faq;
}

Lexicon parse_lexicon(const json& doc) {
    Source src{asset::lexicon, 0};
    Lexicon lex;
    const auto& phrases = field(doc, "phrases", src);
    if (!phrases.is_object()) fail(src, "'phrases' must be an object");
    for (auto it = phrases.begin(); it != phrases.end(); ++it) {
        auto raw = get_strings(phrases, it.key().c_str(), src);
        std::vector<std::vector<std::string>> list;
        for (const auto& p : raw) list.push_back(tokenize(p));
        lex.phrase_lists.emplace(it.key(), std::move(list));
        lex.raw_phrases.emplace(it.key(), std::move(raw));
    }
    const auto& texts = field(doc, "texts", src);
    if (!texts.is_object()) fail(src, "'texts' must be an object");
    for (auto it = texts.begin(); it != texts.end(); ++it) {
        lex.text_lists.emplace(it.key(), get_strings(texts, it.key().c_str(), src));
    }
    if (doc.contains("substantive_threshold")) {
        const auto& v = doc["substantive_threshold"];
        if (!v.is_number_integer() || v.get<int>() < 1) fail(src, "'substantive_threshold' must be a positive integer");
        lex.substantive_threshold = v.get<int>();
    }
    return lex;
}

}  // namespace

ContentBank parse_assets(const std::filesystem::path& data_dir) {
    if (!std::filesystem::is_directory(data_dir)) throw MissingAsset(data_dir.string());
    // Check presence of every file up front so a missing asset is reported
    // before any parse error in another file.
    for (const char* name : {asset::topics, asset::hobbies, asset::poq, asset::intro, asset::persona, asset::lexicon}) {
        if (!std::filesystem::exists(data_dir / name)) throw MissingAsset(name);
    }

    ContentBank bank;
    bank.registry = parse_topics(parse_document(data_dir, asset::topics), bank.version);

    std::vector<HobbyEntry> hobbies;
    for_each_record(data_dir, asset::hobbies, [&](const json& rec, const Source& src) {
        HobbyEntry h;
        h.id = get_string(rec, "id", src);
        h.display_name = get_string(rec, "display_name", src);
        h.paraphrases = get_strings(rec, "paraphrases", src);
        h.linked_topics = get_strings(rec, "linked_topics", src, true);
        hobbies.push_back(std::move(h));
    });
    bank.gazetteer = Gazetteer(std::move(hobbies));

    for_each_record(data_dir, asset::poq, [&](const json& rec, const Source& src) {
        PoqItem item;
        item.id = get_string(rec, "id", src);
        item.topic = get_string(rec, "topic", src);
        auto kind = parse_poq_kind(get_string(rec, "kind", src));
        if (!kind) fail(src, "field 'kind' must be \"wyr\" or \"hyp\"");
        item.kind = *kind;
        item.question_text = get_string(rec, "question_text", src);
        if (rec.contains("expected_answers")) {
            const auto& arr = rec["expected_answers"];
            if (!arr.is_array()) fail(src, "'expected_answers' must be an array");
            for (const auto& a : arr) {
                item.expected_answers.push_back(
                    {get_strings(a, "choice_phrases", src), get_string(a, "grounding", src)});
            }
        }
        item.generic_grounding = get_string(rec, "generic_grounding", src);
        item.agent_opinion = get_string(rec, "agent_opinion", src);
        item.kid_friendly = get_bool(rec, "kid_friendly", src);
        if (rec.contains("persona_note") && !rec["persona_note"].is_null()) {
            item.persona_note = get_string(rec, "persona_note", src);
        }
        bank.poq_bank.push_back(std::move(item));
    });

    bank.intro_script = parse_intro(parse_document(data_dir, asset::intro));
    bank.persona_faq = parse_persona(parse_document(data_dir, asset::persona));
    bank.lexicon = parse_lexicon(parse_document(data_dir, asset::lexicon));
    return bank;
}

ContentBank load_assets(const std::filesystem::path& data_dir) {
    auto bank = parse_assets(data_dir);
    auto report = validate_bank(bank);
    if (!report.ok()) throw ValidationError(std::move(report.violations));
    return bank;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

ValidationReport validate_bank(const ContentBank& bank) {
    std::vector<Violation> out;
    auto add = [&](std::string id, std::string rule, std::string msg) {
        out.push_back({std::move(id), std::move(rule), std::move(msg)});
    };
    auto check_phrase = [&](const std::string& owner, const std::string& phrase) {
        if (has_uppercase(phrase)) add(owner, "phrase.lowercase", "phrase '" + phrase + "' contains uppercase");
        if (tokenize(phrase).empty()) add(owner, "phrase.empty", "phrase '" + phrase + "' has no tokens");
    };

    // Topics
    std::set<std::string> topic_ids;
    std::map<std::string, std::string> expression_owner;
    for (const auto& t : bank.registry.topics()) {
        if (!topic_ids.insert(t.id).second) add(t.id, "topic.duplicate_id", "duplicate topic id");
        if (t.display_name.empty()) add(t.id, "topic.empty_display_name", "display_name is empty");
        if (t.referential_expressions.empty()) {
            add(t.id, "topic.empty_expressions", "referential_expressions is empty");
        }
        for (const auto& expr : t.referential_expressions) {
            check_phrase(t.id, expr);
            auto key = join(tokenize(expr), " ");
            auto [it, inserted] = expression_owner.emplace(key, t.id);
            if (!inserted && it->second != t.id) {
                add(t.id, "topic.duplicate_expression",
                    "expression '" + expr + "' also maps to topic " + it->second);
            }
        }
        for (const auto& s : t.subdialogues) {
            if (s.empty()) add(t.id, "topic.empty_subdialogue", "empty subdialogue text");
        }
    }

    // Hobbies
    std::set<std::string> hobby_ids;
    std::map<std::string, std::string> paraphrase_owner;
    for (const auto& h : bank.gazetteer.entries()) {
        if (!hobby_ids.insert(h.id).second) add(h.id, "hobby.duplicate_id", "duplicate hobby id");
        if (h.paraphrases.empty()) add(h.id, "hobby.empty_paraphrases", "paraphrases is empty");
        for (const auto& p : h.paraphrases) {
            check_phrase(h.id, p);
            auto key = join(tokenize(p), " ");
            auto [it, inserted] = paraphrase_owner.emplace(key, h.id);
            if (!inserted && it->second != h.id) {
                add(h.id, "hobby.duplicate_paraphrase",
                    "paraphrase '" + p + "' also belongs to hobby " + it->second);
            }
        }
        for (const auto& t : h.linked_topics) {
            if (!bank.registry.find(t)) add(h.id, "hobby.unknown_topic", "linked topic '" + t + "' does not exist");
        }
    }

    // POQ items
    std::set<std::string> poq_ids;
    std::map<std::pair<std::string, PoqKind>, int> kid_coverage;
    for (const auto& item : bank.poq_bank) {
        if (!poq_ids.insert(item.id).second) add(item.id, "poq.duplicate_id", "duplicate poq id");
        const auto* topic = bank.registry.find(item.topic);
        if (!topic) {
            add(item.id, "poq.unknown_topic", "topic '" + item.topic + "' does not exist");
        } else if (!topic->has_poq) {
            add(item.id, "poq.topic_without_poq", "topic '" + item.topic + "' has has_poq = false");
        }
        if (item.kind == PoqKind::wyr && item.expected_answers.size() != 2) {
            add(item.id, "poq.wyr_option_count",
                "wyr requires exactly 2 options, found " + std::to_string(item.expected_answers.size()));
        }
        if (item.question_text.empty()) add(item.id, "poq.empty_text", "question_text is empty");
        if (item.generic_grounding.empty()) add(item.id, "poq.empty_text", "generic_grounding is empty");
        if (item.agent_opinion.empty()) add(item.id, "poq.empty_text", "agent_opinion is empty");
        for (const auto& opt : item.expected_answers) {
            if (opt.choice_phrases.empty()) add(item.id, "poq.empty_choice_phrases", "answer option has no choice_phrases");
            if (opt.grounding.empty()) add(item.id, "poq.empty_text", "answer option grounding is empty");
            for (const auto& p : opt.choice_phrases) check_phrase(item.id, p);
        }
        if (item.kid_friendly) ++kid_coverage[{item.topic, item.kind}];
    }
    for (const auto& t : bank.registry.topics()) {
        if (!t.has_poq) continue;
        for (auto kind : {PoqKind::wyr, PoqKind::hyp}) {
            if (kid_coverage[{t.id, kind}] == 0) {
                add(t.id, "bank.kid_friendly_coverage",
                    std::string("no kid_friendly ") + to_string(kind) + " item for topic");
            }
        }
    }

    // Intro script
    const auto& intro = bank.intro_script;
    static const std::vector<std::string> scripted = {"recent_activities", "work_school", "travel", "fun_hobbies"};
    if (intro.stages.size() != scripted.size()) {
        add("intro", "intro.stage_order", "expected stages recent_activities, work_school, travel, fun_hobbies");
    } else {
        for (std::size_t i = 0; i < scripted.size(); ++i) {
            if (intro.stages[i].id != scripted[i]) {
                add("intro", "intro.stage_order", "stage " + std::to_string(i) + " must be " + scripted[i]);
            }
            if (intro.stages[i].steps.empty()) add(scripted[i], "intro.empty_stage", "stage has no steps");
        }
    }
    if (intro.icebreakers.size() != 3) add("intro", "intro.icebreaker_count", "exactly three icebreakers required");
    for (const auto& q : intro.icebreakers) {
        if (q.text.empty()) add(q.id, "intro.empty_text", "icebreaker text is empty");
    }
    for (const auto* t : {&intro.greeting_new, &intro.greeting_returning, &intro.advice_preface, &intro.invite_question,
                          &intro.menu_prompt, &intro.closing}) {
        if (t->empty()) add("intro", "intro.empty_text", "required script text is empty");
    }

    // Persona
    for (std::size_t i = 0; i < bank.persona_faq.entries.size(); ++i) {
        const auto& e = bank.persona_faq.entries[i];
        auto id = "faq[" + std::to_string(i) + "]";
        if (e.question_phrases.empty()) add(id, "persona.empty_phrases", "question_phrases is empty");
        if (e.answer_text.empty()) add(id, "persona.empty_text", "answer_text is empty");
        for (const auto& p : e.question_phrases) check_phrase(id, p);
    }

    // Lexicon
    for (const auto& name : required_lexicon_lists()) {
        if (bank.lexicon.phrases(name).empty()) add("lexicon", "lexicon.missing_list", "phrase list '" + name + "' missing or empty");
    }
    for (const auto& name : required_lexicon_texts()) {
        if (bank.lexicon.texts(name).empty()) add("lexicon", "lexicon.missing_list", "text list '" + name + "' missing or empty");
    }
    for (const auto& [name, list] : bank.lexicon.raw_phrases) {
        for (const auto& p : list) check_phrase("lexicon." + name, p);
    }
    return ValidationReport{std::move(out)};
}

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("RAPPORT_DATA_DIR"); env && *env) return env;
    return RAPPORT_DEFAULT_DATA_DIR;
}

}  // namespace rapport
