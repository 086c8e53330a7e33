#include "wotchat/score/score.hpp"

#include <algorithm>
#include <unordered_map>

#include "wotchat/store/store.hpp"

namespace wotchat::score {

int base_score(const LabelSet& l) {
    if (!l.exclusion_ok()) throw InvalidLabels({});
    const bool specific = l.is(Attribute::specific_target);
    if (l.is(Attribute::is_positive)) return -1 - (specific ? 3 : 0);
    if (!l.is(Attribute::is_negative)) return 0;
    int s = 1;
    if (l.is(Attribute::noob_related)) s += 1;
    if (l.is(Attribute::has_bad_language) || l.is(Attribute::filtered_text)) s += 2;
    if (l.is(Attribute::is_racist)) s += 2;
    if (specific) s += 3;
    return s;
}

int pcs(const LabelSet& l, int repetition_bonus) {
    int s = l.is(Attribute::is_negative) ? 1 : 0;
    if (l.is(Attribute::noob_related)) s += 1;
    if (l.is(Attribute::has_bad_language) || l.is(Attribute::filtered_text)) s += 2;
    if (l.is(Attribute::is_racist)) s += 2;
    return s + repetition_bonus;
}

std::vector<int> repetition_bonuses(std::span<const RepetitionInput> messages) {
    std::unordered_map<std::string, int> seen;
    std::vector<int> out;
    out.reserve(messages.size());
    for (const auto& m : messages) out.push_back(m.is_negative ? seen[m.author]++ : 0);
    return out;
}

std::vector<ScoredMessage> cs_for_match(std::vector<ScoreInput> messages) {
    std::stable_sort(messages.begin(), messages.end(), [](const ScoreInput& a, const ScoreInput& b) {
        if (a.clock != b.clock) return a.clock < b.clock;
        return a.seq < b.seq;
    });

    std::vector<RepetitionInput> manual, automatic;
    for (const auto& m : messages) {
        if (!m.labels.exclusion_ok()) throw InvalidLabels(m.message_id);
        manual.push_back({m.author, m.labels.is(Attribute::is_negative)});
        automatic.push_back({m.author, m.auto_labels.is(Attribute::is_negative)});
    }
    const auto cs_bonus = repetition_bonuses(manual);
    const auto pcs_bonus = repetition_bonuses(automatic);

    std::vector<ScoredMessage> out;
    out.reserve(messages.size());
    for (std::size_t i = 0; i < messages.size(); ++i) {
        ScoredMessage s;
        s.message_id = messages[i].message_id;
        s.base_score = base_score(messages[i].labels);
        s.repetition_bonus = cs_bonus[i];
        s.cs = s.base_score + s.repetition_bonus;
        s.pcs_repetition_bonus = pcs_bonus[i];
        s.pcs = pcs(messages[i].auto_labels, pcs_bonus[i]);
        out.push_back(std::move(s));
    }
    return out;
}

std::string_view to_string(LabelSource s) {
    switch (s) {
        case LabelSource::manual: return "manual";
        case LabelSource::automatic: return "auto";
        case LabelSource::merged: return "merged";
    }
    return "merged";
}

LabelSource label_source_from_string(std::string_view s) {
    if (s == "manual") return LabelSource::manual;
    if (s == "auto") return LabelSource::automatic;
    if (s == "merged") return LabelSource::merged;
    throw std::invalid_argument("unknown label source '" + std::string(s) + "'");
}

namespace {

void score_one(store::Store& st, const std::string& match_id, LabelSource source, ScoreSummary& summary,
               std::vector<store::ScoreUpdate>& updates) {
    std::vector<ScoreInput> inputs;
    for (auto& m : st.messages_for_match(match_id)) {
        LabelSet labels = source == LabelSource::manual      ? m.manual_labels
                          : source == LabelSource::automatic ? m.auto_labels
                                                             : merge_labels(m.manual_labels, m.auto_labels);
        inputs.push_back({m.message_id, m.player_guid, m.clock, m.seq, labels, m.auto_labels});
    }
    for (const auto& s : cs_for_match(std::move(inputs))) {
        updates.push_back({s.message_id, s.base_score, s.repetition_bonus, s.cs, s.pcs});
        summary.total_cs += s.cs;
        summary.total_pcs += s.pcs;
        ++summary.messages;
    }
    ++summary.matches;
}

}  // namespace

ScoreSummary score_store(store::Store& st, LabelSource source) {
    ScoreSummary summary;
    std::vector<store::ScoreUpdate> updates;
    for (const auto& match_id : st.match_ids()) score_one(st, match_id, source, summary, updates);
    st.set_scores(updates);
    return summary;
}

ScoreSummary score_match(store::Store& st, const std::string& match_id, LabelSource source) {
    ScoreSummary summary;
    std::vector<store::ScoreUpdate> updates;
    score_one(st, match_id, source, summary, updates);
    st.set_scores(updates);
    return summary;
}

}  // namespace wotchat::score
