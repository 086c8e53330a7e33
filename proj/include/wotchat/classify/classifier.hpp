#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wotchat/labels.hpp"

namespace wotchat::store {
class Store;
}

namespace wotchat::classify {

class EmptyLexicon : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LexiconIOError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class LexiconMatch { substring, word_boundary };

struct Lexicon {
    std::string name;
    std::vector<std::string> entries;  // lowercase, sorted, unique
    LexiconMatch match = LexiconMatch::substring;
};

// Terms are lowercased, trimmed and deduplicated. Throws EmptyLexicon when
// nothing is left.
Lexicon make_lexicon(std::string name, const std::vector<std::string>& terms,
                     LexiconMatch match = LexiconMatch::substring);

// One term per line, '#' starts a comment line. The name defaults to the file stem.
Lexicon load_lexicon(const std::filesystem::path& path, LexiconMatch match = LexiconMatch::substring);

struct Lexicons {
    Lexicon noob;
    Lexicon bad_language;
    Lexicon racist;
    Lexicon positive;
    Lexicon negative;
};

// Reads noob.txt, bad_language.txt, racist.txt, positive.txt and negative.txt.
Lexicons load_lexicons(const std::filesystem::path& dir);

// substring: plain substring everywhere.
// boundary: terms of three characters or fewer must stand alone as words.
enum class MatchMode { substring, boundary };

std::string_view to_string(MatchMode m);
MatchMode match_mode_from_string(std::string_view s);  // throws std::invalid_argument

class Classifier {
public:
    Classifier(Lexicons lexicons, MatchMode mode = MatchMode::boundary);

    // Deterministic. is_abusive and specific_target stay unknown, every other
    // attribute is resolved.
    LabelSet classify(std::string_view text) const;

    bool hits(const Lexicon& lexicon, std::string_view lowered_text) const;

    const Lexicons& lexicons() const { return lexicons_; }
    MatchMode mode() const { return mode_; }

private:
    Lexicons lexicons_;
    MatchMode mode_;
};

// Two or more consecutive '*'.
bool has_star_mask(std::string_view text);

struct AttributeCounts {
    std::size_t messages = 0;
    std::array<std::size_t, kAttributeCount> true_counts{};

    std::size_t operator[](Attribute a) const { return true_counts[static_cast<std::size_t>(a)]; }
    bool operator==(const AttributeCounts&) const = default;
};

// Writes auto labels for every stored message and returns how often each
// attribute came out true.
AttributeCounts classify_corpus(store::Store& store, const Classifier& classifier);

}  // namespace wotchat::classify
