#include <doctest.h>

#include <random>

#include "../support/paths.hpp"
#include "rapport/nlu.hpp"

using namespace rapport;
using namespace rapport::nlu;

namespace {

const ContentBank& bank() { return testing_support::shipped_bank(); }

std::vector<HobbyId> hobbies(const std::string& s) { return match_hobbies(normalize(s), bank().gazetteer); }

const PoqItem& item(const std::string& id) {
    const auto* p = bank().find_poq(id);
    REQUIRE(p != nullptr);
    return *p;
}

WyrMatch wyr(const std::string& s, const std::string& id) { return match_wyr_answer(normalize(s), item(id), bank().lexicon); }

HypClass hyp(const std::string& s, const std::string& id) {
    return classify_hyp_answer(normalize(s), item(id), bank().lexicon);
}

std::optional<TopicRequest> request(const std::string& s) {
    return resolve_topic_request(normalize(s), bank().registry, bank().lexicon);
}

Affirmation affirm(const std::string& s) { return detect_affirmation(normalize(s), bank().lexicon); }

std::optional<OpinionRecord> opinion(const std::string& s) {
    return detect_opinion(normalize(s), bank().registry, bank().gazetteer, bank().lexicon);
}

}  // namespace

TEST_CASE("hobby matching") {
    CHECK(hobbies("i like to paint") == std::vector<HobbyId>{"painting"});
    CHECK(hobbies("i like painting") == std::vector<HobbyId>{"painting"});
    CHECK(hobbies("i painted when i was young") == std::vector<HobbyId>{"painting"});
    CHECK(hobbies("swim") == std::vector<HobbyId>{"swimming"});
    CHECK(hobbies("i play chess") == std::vector<HobbyId>{"chess"});
    CHECK(hobbies("the weather is nice").empty());
    CHECK(hobbies("").empty());
}

TEST_CASE("hobby results are in utterance order and duplicate free") {
    auto got = hobbies("i play chess and swim and play chess again");
    CHECK(got == std::vector<HobbyId>{"chess", "swimming"});
}

TEST_CASE("hobby matching ignores surrounding whitespace and repeated normalization") {
    for (const auto& h : bank().gazetteer.entries()) {
        for (const auto& p : h.paraphrases) {
            auto plain = hobbies(p);
            CHECK(hobbies("   " + p + " \t") == plain);
            CHECK(match_hobbies(normalize(normalize(p).joined()), bank().gazetteer) == plain);
        }
    }
}

TEST_CASE("topic requests") {
    auto movies = request("let's talk about movies");
    REQUIRE(movies);
    CHECK(movies->topic == "movies");
    CHECK(movies->trigger == TopicTrigger::explicit_command);

    auto curry = request("stephen curry is amazing");
    REQUIRE(curry);
    CHECK(curry->topic == "sports");
    CHECK(curry->trigger == TopicTrigger::mention);

    CHECK_FALSE(request("tell me a joke"));

    auto can_we = request("can we talk about dinosaurs");
    REQUIRE(can_we);
    CHECK(can_we->trigger == TopicTrigger::explicit_command);
}

TEST_CASE("command takes precedence over an earlier mention") {
    auto r = request("i saw a movie but let's talk about music");
    REQUIRE(r);
    CHECK(r->topic == "music");
    CHECK(r->trigger == TopicTrigger::explicit_command);
}

TEST_CASE("menu choice") {
    const auto& reg = bank().registry;
    const auto& lex = bank().lexicon;
    std::vector<TopicId> three{"animals", "books", "music"};
    CHECK(resolve_menu_choice(normalize("let's talk about music"), three, reg, lex) == TopicId("music"));
    std::vector<TopicId> two{"animals", "books"};
    CHECK(resolve_menu_choice(normalize("the second one"), two, reg, lex) == TopicId("books"));
    CHECK(resolve_menu_choice(normalize("the first one"), two, reg, lex) == TopicId("animals"));
    CHECK_FALSE(resolve_menu_choice(normalize("neither"), {"animals"}, reg, lex));
    // Unoffered but recognisable topics are handed back to the caller.
    CHECK(resolve_menu_choice(normalize("dinosaurs please"), two, reg, lex) == TopicId("dinosaurs"));
}

TEST_CASE("WYR answers") {
    auto bronto = wyr("i have to say brontosaurus and i hate heights", "dino_wyr_1");
    CHECK(bronto.outcome == WyrMatch::Outcome::choice);
    CHECK(bronto.index == 1);
    CHECK(bronto.matched_phrase == std::string("brontosaurus"));

    auto strange = wyr("doctor strange", "comics_wyr_1");
    CHECK(strange.outcome == WyrMatch::Outcome::choice);
    CHECK(strange.index == 1);

    CHECK(wyr("i love both", "animals_wyr_1").outcome == WyrMatch::Outcome::both);
    CHECK(wyr("a lion or a gorilla", "animals_wyr_1").outcome == WyrMatch::Outcome::both);
    CHECK(wyr("neither", "animals_wyr_1").outcome == WyrMatch::Outcome::neither);
    CHECK(wyr("purple", "animals_wyr_1").outcome == WyrMatch::Outcome::no_match);
    CHECK(wyr("", "animals_wyr_1").outcome == WyrMatch::Outcome::no_match);
}

TEST_CASE("WYR never returns choice unless exactly one option matches") {
    // Generated two-option items and utterances built from their phrases plus filler.
    const std::vector<std::string> words{"red", "blue", "green", "cat", "dog", "fish", "the", "maybe", "sun", "moon"};
    std::mt19937 rng(11);
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    for (int trial = 0; trial < 400; ++trial) {
        PoqItem it;
        it.id = "gen";
        it.kind = PoqKind::wyr;
        std::string a = words[pick(rng)], b = words[pick(rng)];
        while (b == a) b = words[pick(rng)];
        it.expected_answers = {{{a}, "ga"}, {{b}, "gb"}};
        std::string utt;
        int len = std::uniform_int_distribution<int>(0, 5)(rng);
        for (int k = 0; k < len; ++k) utt += words[pick(rng)] + " ";
        auto toks = tokenize(utt);
        bool has_a = contains_phrase(toks, {a}), has_b = contains_phrase(toks, {b});
        auto m = match_wyr_answer(normalize(utt), it, bank().lexicon);
        if (m.outcome == WyrMatch::Outcome::choice) {
            CHECK(has_a != has_b);
            CHECK(m.index == (has_a ? 0 : 1));
            CHECK(m.matched_phrase.has_value());
        }
        if (has_a && has_b) CHECK(m.outcome == WyrMatch::Outcome::both);
        if (has_a != has_b) CHECK(m.outcome == WyrMatch::Outcome::choice);
    }
}

TEST_CASE("HYP answers") {
    CHECK(hyp("that's a hard question", "bg_hyp_1").kind == HypClass::Kind::struggle);
    CHECK(hyp("i'm not sure", "bg_hyp_1").kind == HypClass::Kind::struggle);
    CHECK(hyp("i would choose every game because it's always fun to play against other people", "bg_hyp_2").kind ==
          HypClass::Kind::substantive);
    CHECK(hyp("", "bg_hyp_1").kind == HypClass::Kind::no_match);
    CHECK(hyp("ok", "bg_hyp_1").kind == HypClass::Kind::no_match);
    auto chess = hyp("definitely chess", "bg_hyp_1");
    CHECK(chess.kind == HypClass::Kind::matched_option);
    CHECK(chess.index == 0);
}

TEST_CASE("HYP matched_option needs expected answers") {
    PoqItem open = item("bg_hyp_1");
    open.expected_answers.clear();
    CHECK(classify_hyp_answer(normalize("chess"), open, bank().lexicon).kind != HypClass::Kind::matched_option);
}

TEST_CASE("affirmation") {
    CHECK(affirm("yeah") == Affirmation::yes);
    CHECK(affirm("of course") == Affirmation::yes);
    CHECK(affirm("not really") == Affirmation::no);
    CHECK(affirm("nope") == Affirmation::no);
    CHECK(affirm("bananas") == Affirmation::unknown);
}

TEST_CASE("opinions") {
    auto dog = opinion("i love my dog");
    REQUIRE(dog);
    CHECK(dog->polarity == Polarity::positive);
    CHECK(dog->topic == TopicId("animals"));

    auto sports = opinion("i hate sports");
    REQUIRE(sports);
    CHECK(sports->polarity == Polarity::negative);
    CHECK(sports->topic == TopicId("sports"));

    CHECK_FALSE(opinion("the sky is blue"));

    auto loose = opinion("i really enjoy that");
    REQUIRE(loose);
    CHECK_FALSE(loose->topic);
}

TEST_CASE("intro extractors") {
    const auto& lex = bank().lexicon;
    CHECK(extract_name(normalize("my name is sam"), lex) == std::string("sam"));
    CHECK(extract_name(normalize("sam"), lex) == std::string("sam"));
    CHECK(detect_occupation(normalize("i don't work but i've been able to do school"), lex) == Occupation::student);
    CHECK(detect_occupation(normalize("i work at a bakery"), lex) == Occupation::worker);
    CHECK(detect_age_signal(normalize("i'm in fifth grade"), lex) == AgeGroup::child);
    CHECK_FALSE(detect_age_signal(normalize("i like pizza"), lex));
    CHECK(extract_travel_destination(normalize("hawaii"), lex) == std::string("hawaii"));
    CHECK(is_stop_request(normalize("goodbye"), lex));
    CHECK_FALSE(is_stop_request(normalize("tell me more"), lex));
}

TEST_CASE("persona questions") {
    auto idx = match_persona_question(normalize("how old are you"), bank().persona_faq);
    REQUIRE(idx);
    CHECK_FALSE(bank().persona_faq.entries[*idx].answer_text.empty());
    CHECK_FALSE(match_persona_question(normalize("zzz"), bank().persona_faq));
}

TEST_CASE("matchers are deterministic") {
    for (int i = 0; i < 3; ++i) {
        CHECK(hobbies("i play chess") == hobbies("i play chess"));
        CHECK(request("stephen curry is amazing") == request("stephen curry is amazing"));
    }
}
