#include "wotchat/classify/classifier.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "wotchat/store/store.hpp"
#include "wotchat/text.hpp"

namespace wotchat::classify {

namespace {

bool is_word_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || u == '_';
}

bool contains_term(std::string_view text, std::string_view term, bool whole_word) {
    for (std::size_t pos = text.find(term); pos != std::string_view::npos; pos = text.find(term, pos + 1)) {
        if (!whole_word) return true;
        const std::size_t end = pos + term.size();
        bool left_ok = pos == 0 || !is_word_char(text[pos - 1]) || !is_word_char(term.front());
        bool right_ok = end == text.size() || !is_word_char(text[end]) || !is_word_char(term.back());
        if (left_ok && right_ok) return true;
    }
    return false;
}

}  // namespace

Lexicon make_lexicon(std::string name, const std::vector<std::string>& terms, LexiconMatch match) {
    Lexicon lex{std::move(name), {}, match};
    for (const auto& t : terms) {
        auto term = to_lower_ascii(trim(t));
        if (!term.empty()) lex.entries.push_back(std::move(term));
    }
    std::sort(lex.entries.begin(), lex.entries.end());
    lex.entries.erase(std::unique(lex.entries.begin(), lex.entries.end()), lex.entries.end());
    if (lex.entries.empty()) throw EmptyLexicon("lexicon '" + lex.name + "' has no terms");
    return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path, LexiconMatch match) {
    std::ifstream in(path);
    if (!in) throw LexiconIOError("cannot read lexicon " + path.string());
    std::vector<std::string> terms;
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        terms.emplace_back(t);
    }
    if (in.bad()) throw LexiconIOError("error reading lexicon " + path.string());
    return make_lexicon(path.stem().string(), terms, match);
}

Lexicons load_lexicons(const std::filesystem::path& dir) {
    return Lexicons{load_lexicon(dir / "noob.txt"), load_lexicon(dir / "bad_language.txt"),
                    load_lexicon(dir / "racist.txt"), load_lexicon(dir / "positive.txt"),
                    load_lexicon(dir / "negative.txt")};
}

std::string_view to_string(MatchMode m) { return m == MatchMode::substring ? "substring" : "boundary"; }

MatchMode match_mode_from_string(std::string_view s) {
    if (s == "substring") return MatchMode::substring;
    if (s == "boundary") return MatchMode::boundary;
    throw std::invalid_argument("unknown match mode '" + std::string(s) + "'");
}

Classifier::Classifier(Lexicons lexicons, MatchMode mode) : lexicons_(std::move(lexicons)), mode_(mode) {}

bool Classifier::hits(const Lexicon& lexicon, std::string_view lowered_text) const {
    for (const auto& term : lexicon.entries) {
        bool whole_word = lexicon.match == LexiconMatch::word_boundary ||
                          (mode_ == MatchMode::boundary && term.size() <= 3);
        if (contains_term(lowered_text, term, whole_word)) return true;
    }
    return false;
}

bool has_star_mask(std::string_view text) { return text.find("**") != std::string_view::npos; }

LabelSet Classifier::classify(std::string_view text) const {
    const std::string lowered = to_lower_ascii(text);
    LabelSet l;
    const bool noob = hits(lexicons_.noob, lowered);
    const bool bad = hits(lexicons_.bad_language, lowered);
    const bool racist = hits(lexicons_.racist, lowered);
    const bool filtered = has_star_mask(text);
    const bool negative = hits(lexicons_.negative, lowered) || noob || bad || racist || filtered;
    const bool positive = !negative && hits(lexicons_.positive, lowered);

    l[Attribute::noob_related] = noob;
    l[Attribute::has_bad_language] = bad;
    l[Attribute::is_racist] = racist;
    l[Attribute::filtered_text] = filtered;
    l[Attribute::is_negative] = negative;
    l[Attribute::is_positive] = positive;
    return l;
}

AttributeCounts classify_corpus(store::Store& store, const Classifier& classifier) {
    AttributeCounts counts;
    std::vector<std::pair<std::string, LabelSet>> updates;
    for (const auto& m : store.messages()) {
        auto labels = classifier.classify(m.text);
        for (auto a : kAllAttributes)
            if (labels.is(a)) ++counts.true_counts[static_cast<std::size_t>(a)];
        ++counts.messages;
        updates.emplace_back(m.message_id, labels);
    }
    store.set_auto_labels(updates);
    return counts;
}

}  // namespace wotchat::classify
