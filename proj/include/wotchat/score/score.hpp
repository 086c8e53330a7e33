#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wotchat/labels.hpp"

namespace wotchat::store {
class Store;
}

namespace wotchat::score {

class InvalidLabels : public std::invalid_argument {
public:
    InvalidLabels(std::string message_id)
        : std::invalid_argument("message " + (message_id.empty() ? std::string("<unnamed>") : message_id) +
                                " is both positive and negative"),
          message_id_(std::move(message_id)) {}
    const std::string& message_id() const { return message_id_; }

private:
    std::string message_id_;
};

inline constexpr int kMinBaseScore = -4;
inline constexpr int kMaxBaseScore = 9;

// Unknown labels count as false. Throws InvalidLabels when both polarities are set.
int base_score(const LabelSet& labels);

// Proxy score from automatic labels. Never includes specific_target.
int pcs(const LabelSet& labels, int repetition_bonus);

struct RepetitionInput {
    std::string author;
    bool is_negative = false;
};

// Input must already be in clock order. The k-th negative message of an
// author (counting from 0) gets k, everything else 0.
std::vector<int> repetition_bonuses(std::span<const RepetitionInput> messages);

struct ScoreInput {
    std::string message_id;
    std::string author;
    double clock = 0.0;
    std::int64_t seq = 0;
    LabelSet labels;       // labels used for CS
    LabelSet auto_labels;  // labels used for PCS
};

struct ScoredMessage {
    std::string message_id;
    int base_score = 0;
    int repetition_bonus = 0;
    int cs = 0;
    int pcs_repetition_bonus = 0;
    int pcs = 0;
};

// Scores one match. Output follows clock order, ties by seq.
std::vector<ScoredMessage> cs_for_match(std::vector<ScoreInput> messages);

enum class LabelSource { manual, automatic, merged };

std::string_view to_string(LabelSource s);
LabelSource label_source_from_string(std::string_view s);  // manual|auto|merged

struct ScoreSummary {
    std::size_t matches = 0;
    std::size_t messages = 0;
    std::int64_t total_cs = 0;
    std::int64_t total_pcs = 0;
};

// Scores every match and writes the results back.
ScoreSummary score_store(store::Store& store, LabelSource source = LabelSource::merged);

// Same for a single match.
ScoreSummary score_match(store::Store& store, const std::string& match_id, LabelSource source = LabelSource::merged);

}  // namespace wotchat::score
