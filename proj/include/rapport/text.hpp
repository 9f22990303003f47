#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rapport {

// Lowercased, punctuation-stripped token view of one user utterance.
// Apostrophes inside words are kept so "don't" and "i'm" stay single tokens.
struct NormalizedUtterance {
    std::string raw;
    std::vector<std::string> tokens;

    bool empty() const { return tokens.empty(); }
    std::string joined() const;
};

NormalizedUtterance normalize(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool has_uppercase(std::string_view s);

// True when `phrase` occurs as a contiguous token run in `tokens`.
bool contains_phrase(const std::vector<std::string>& tokens,
                     const std::vector<std::string>& phrase);
// Position of the first occurrence, or npos.
std::size_t find_phrase(const std::vector<std::string>& tokens,
                        const std::vector<std::string>& phrase, std::size_t from = 0);

// Longest-match-first dictionary over token sequences. Each phrase carries a
// payload index; scanning the utterance left to right, the longest phrase
// starting at a position wins and matched tokens are consumed.
class PhraseIndex {
public:
    struct Hit {
        std::size_t payload;
        std::size_t begin;
        std::size_t length;
    };

    void add(const std::vector<std::string>& phrase, std::size_t payload);
    std::vector<Hit> scan(const std::vector<std::string>& tokens) const;
    bool empty() const { return by_first_.empty(); }

private:
    struct Entry {
        std::vector<std::string> phrase;
        std::size_t payload;
    };
    // Entries for one first token, longest first.
    std::unordered_map<std::string, std::vector<Entry>> by_first_;
};

// Returns the longest phrase from `phrases` contained in tokens, or -1.
int longest_contained(const std::vector<std::string>& tokens,
                      const std::vector<std::vector<std::string>>& phrases);

}  // namespace rapport
