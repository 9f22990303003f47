#include "rapport/text.hpp"

#include <algorithm>
#include <cctype>

namespace rapport {

namespace {

bool is_word_byte(unsigned char c) {
    return std::isalnum(c) || c >= 0x80;
}

void flush_token(std::string& cur, std::vector<std::string>& out) {
    std::size_t b = 0;
    std::size_t e = cur.size();
    while (b < e && cur[b] == '\'') ++b;
    while (e > b && cur[e - 1] == '\'') --e;
    if (e > b) out.emplace_back(cur.substr(b, e - b));
    cur.clear();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (std::size_t i = 0; i < text.size(); ++i) {
        auto c = static_cast<unsigned char>(text[i]);
        // U+2019 right single quotation mark, common in typed contractions.
        if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80 &&
            static_cast<unsigned char>(text[i + 2]) == 0x99) {
            cur.push_back('\'');
            i += 2;
            continue;
        }
        if (c == '\'') {
            cur.push_back('\'');
        } else if (is_word_byte(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush_token(cur, out);
        }
    }
    flush_token(cur, out);
    return out;
}

NormalizedUtterance normalize(std::string_view text) {
    return NormalizedUtterance{std::string(text), tokenize(text)};
}

std::string NormalizedUtterance::joined() const {
    return join(tokens, " ");
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

bool has_uppercase(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

std::size_t find_phrase(const std::vector<std::string>& tokens,
                        const std::vector<std::string>& phrase, std::size_t from) {
    if (phrase.empty() || phrase.size() > tokens.size()) return std::string::npos;
    for (std::size_t i = from; i + phrase.size() <= tokens.size(); ++i) {
        if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
            return i;
        }
    }
    return std::string::npos;
}

bool contains_phrase(const std::vector<std::string>& tokens,
                     const std::vector<std::string>& phrase) {
    return find_phrase(tokens, phrase) != std::string::npos;
}

void PhraseIndex::add(const std::vector<std::string>& phrase, std::size_t payload) {
    if (phrase.empty()) return;
    auto& bucket = by_first_[phrase.front()];
    bucket.push_back({phrase, payload});
    std::stable_sort(bucket.begin(), bucket.end(), [](const Entry& a, const Entry& b) {
        return a.phrase.size() > b.phrase.size();
    });
}

std::vector<PhraseIndex::Hit> PhraseIndex::scan(const std::vector<std::string>& tokens) const {
    std::vector<Hit> hits;
    std::size_t i = 0;
    while (i < tokens.size()) {
        const Entry* best = nullptr;
        auto it = by_first_.find(tokens[i]);
        if (it != by_first_.end()) {
            for (const auto& e : it->second) {
                if (i + e.phrase.size() <= tokens.size() &&
                    std::equal(e.phrase.begin(), e.phrase.end(),
                               tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
                    best = &e;
                    break;
                }
            }
        }
        if (!best) {
            ++i;
            continue;
        }
        // An overlapping phrase that starts inside this match but runs longer wins.
        std::size_t end = i + best->phrase.size();
        std::size_t start = i;
        for (std::size_t j = i + 1; j < end; ++j) {
            auto jt = by_first_.find(tokens[j]);
            if (jt == by_first_.end()) continue;
            for (const auto& e : jt->second) {
                if (j + e.phrase.size() <= tokens.size() && e.phrase.size() > best->phrase.size() &&
                    std::equal(e.phrase.begin(), e.phrase.end(),
                               tokens.begin() + static_cast<std::ptrdiff_t>(j))) {
                    best = &e;
                    start = j;
                    end = j + e.phrase.size();
                    break;
                }
            }
        }
        hits.push_back({best->payload, start, best->phrase.size()});
        i = start + best->phrase.size();
    }
    return hits;
}

int longest_contained(const std::vector<std::string>& tokens,
                      const std::vector<std::vector<std::string>>& phrases) {
    int best = -1;
    std::size_t best_len = 0;
    for (std::size_t k = 0; k < phrases.size(); ++k) {
        if (phrases[k].size() > best_len && contains_phrase(tokens, phrases[k])) {
            best = static_cast<int>(k);
            best_len = phrases[k].size();
        }
    }
    return best;
}

}  // namespace rapport
