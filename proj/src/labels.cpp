#include "wotchat/labels.hpp"

#include <algorithm>

namespace wotchat {

namespace {
constexpr std::array<std::string_view, kAttributeCount> kNames = {
    "is_abusive", "is_positive",  "is_negative",     "has_bad_language",
    "is_racist",  "noob_related", "specific_target", "filtered_text",
};
}  // namespace

std::string_view attribute_name(Attribute a) { return kNames[static_cast<std::size_t>(a)]; }

std::optional<Attribute> attribute_from_name(std::string_view name) {
    for (auto a : kAllAttributes)
        if (kNames[static_cast<std::size_t>(a)] == name) return a;
    return std::nullopt;
}

bool LabelSet::fully_resolved() const {
    return std::all_of(values.begin(), values.end(), [](const Tri& t) { return t.has_value(); });
}

bool LabelSet::any_resolved() const {
    return std::any_of(values.begin(), values.end(), [](const Tri& t) { return t.has_value(); });
}

LabelSet merge_labels(const LabelSet& manual, const LabelSet& fallback) {
    LabelSet out;
    for (auto a : kAllAttributes) out[a] = manual[a].has_value() ? manual[a] : fallback[a];

    if (out.is(Attribute::is_positive) && out.is(Attribute::is_negative)) {
        if (manual.is(Attribute::is_positive))
            out[Attribute::is_negative] = false;
        else if (manual.is(Attribute::is_negative))
            out[Attribute::is_positive] = false;
    }
    return out;
}

}  // namespace wotchat
