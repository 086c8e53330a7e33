#include "wotchat/service/annotation.hpp"

#include "wotchat/score/score.hpp"

namespace wotchat::service {

using nlohmann::json;

MatchPage AnnotationService::list_matches(MatchFilter filter, PageRequest page) const {
    MatchPage out;
    out.offset = page.offset;
    out.limit = page.limit;
    for (auto& s : store_.match_summaries()) {
        if (filter.only_unclassified && s.classified()) continue;
        if (out.total >= page.offset && out.items.size() < page.limit) out.items.push_back(std::move(s));
        ++out.total;
    }
    return out;
}

std::vector<store::MessageRecord> AnnotationService::get_match_chat(const std::string& match_id) const {
    if (!store_.has_replay(match_id)) throw store::NotFound("no match " + match_id);
    return store_.messages_for_match(match_id);
}

store::MessageRecord AnnotationService::save(const std::string& message_id, const LabelSet& labels,
                                             const std::string& annotator_id,
                                             std::optional<std::int64_t> expected_version) {
    if (!labels.exclusion_ok()) throw score::InvalidLabels(message_id);
    store::MessageRecord saved;
    store_.transaction([&] {
        saved = store_.set_manual_labels(message_id, labels, annotator_id, expected_version);
        score::score_match(store_, saved.match_id);
    });
    return *store_.message(message_id);
}

store::MessageRecord AnnotationService::put_labels(const AnnotationPatch& patch) {
    return save(patch.message_id, patch.labels, patch.annotator_id, patch.expected_version);
}

store::MessageRecord AnnotationService::clear_unknowns(const std::string& message_id, const std::string& annotator_id,
                                                       std::optional<std::int64_t> expected_version) {
    auto current = store_.message(message_id);
    if (!current) throw store::NotFound("no message " + message_id);
    LabelSet labels = merge_labels(current->manual_labels, current->auto_labels);
    for (auto a : kAllAttributes)
        if (!labels[a]) labels[a] = false;
    return save(message_id, labels, annotator_id, expected_version);
}

json labels_to_json(const LabelSet& labels) {
    json j = json::object();
    for (auto a : kAllAttributes) {
        const Tri& v = labels[a];
        j[std::string(attribute_name(a))] = v ? json(*v) : json(nullptr);
    }
    return j;
}

LabelSet labels_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("labels must be a JSON object");
    LabelSet out;
    for (const auto& [key, value] : j.items()) {
        auto a = attribute_from_name(key);
        if (!a) throw std::invalid_argument("unknown label '" + key + "'");
        if (value.is_null()) continue;
        if (!value.is_boolean()) throw std::invalid_argument("label '" + key + "' must be true, false or null");
        out[*a] = value.get<bool>();
    }
    return out;
}

json message_to_json(const store::MessageRecord& m) {
    auto opt = [](const std::optional<std::int64_t>& v) { return v ? json(*v) : json(nullptr); };
    return json{{"message_id", m.message_id},
                {"match_id", m.match_id},
                {"player_guid", m.player_guid},
                {"clock", m.clock},
                {"text", m.text},
                {"auto_labels", labels_to_json(m.auto_labels)},
                {"labels", labels_to_json(m.manual_labels)},
                {"version", m.version},
                {"cs", opt(m.cs)},
                {"pcs", opt(m.pcs)}};
}

json summary_to_json(const store::MatchSummary& s) {
    return json{{"match_id", s.match_id},
                {"messages", s.message_count},
                {"classified_messages", s.classified_count},
                {"classified", s.classified()}};
}

}  // namespace wotchat::service
