#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wotchat/labels.hpp"
#include "wotchat/store/store.hpp"

namespace wotchat::service {

struct MatchFilter {
    bool only_unclassified = false;
};

struct PageRequest {
    std::size_t offset = 0;
    std::size_t limit = 50;
};

struct MatchPage {
    std::vector<store::MatchSummary> items;  // ingestion order
    std::size_t total = 0;                   // matches passing the filter
    std::size_t offset = 0;
    std::size_t limit = 0;
};

struct AnnotationPatch {
    std::string message_id;
    LabelSet labels;  // replaces all eight manual labels
    std::string annotator_id;
    std::optional<std::int64_t> expected_version;  // stale -> store::VersionConflict
};

// The operations behind the labelling client. Errors: store::NotFound,
// score::InvalidLabels, store::VersionConflict.
class AnnotationService {
public:
    explicit AnnotationService(store::Store& store) : store_(store) {}

    MatchPage list_matches(MatchFilter filter, PageRequest page) const;
    // Clock order. Unknown match id throws NotFound; a match without chat is empty.
    std::vector<store::MessageRecord> get_match_chat(const std::string& match_id) const;
    // Persists and rescores the message's match in one transaction.
    store::MessageRecord put_labels(const AnnotationPatch& patch);
    // Starts from what the client shows (manual labels, automatic ones where
    // manual is unknown) and turns every remaining unknown into false.
    store::MessageRecord clear_unknowns(const std::string& message_id, const std::string& annotator_id = {},
                                        std::optional<std::int64_t> expected_version = std::nullopt);

private:
    store::MessageRecord save(const std::string& message_id, const LabelSet& labels, const std::string& annotator_id,
                              std::optional<std::int64_t> expected_version);

    store::Store& store_;
};

// {"is_abusive": true|false|null, ...} with all eight keys.
nlohmann::json labels_to_json(const LabelSet& labels);
// Missing keys read as null. Unknown keys or non-boolean values throw std::invalid_argument.
LabelSet labels_from_json(const nlohmann::json& j);
nlohmann::json message_to_json(const store::MessageRecord& m);
nlohmann::json summary_to_json(const store::MatchSummary& s);

}  // namespace wotchat::service
