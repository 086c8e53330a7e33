#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace wotchat {

// Eight message attributes. Order is the export/column order everywhere.
enum class Attribute : std::size_t {
    is_abusive,
    is_positive,
    is_negative,
    has_bad_language,
    is_racist,
    noob_related,
    specific_target,
    filtered_text,
};

inline constexpr std::size_t kAttributeCount = 8;

inline constexpr std::array<Attribute, kAttributeCount> kAllAttributes = {
    Attribute::is_abusive,       Attribute::is_positive, Attribute::is_negative,
    Attribute::has_bad_language, Attribute::is_racist,   Attribute::noob_related,
    Attribute::specific_target,  Attribute::filtered_text,
};

std::string_view attribute_name(Attribute a);
std::optional<Attribute> attribute_from_name(std::string_view name);

// true / false / unknown
using Tri = std::optional<bool>;

struct LabelSet {
    std::array<Tri, kAttributeCount> values{};

    Tri& operator[](Attribute a) { return values[static_cast<std::size_t>(a)]; }
    const Tri& operator[](Attribute a) const { return values[static_cast<std::size_t>(a)]; }

    // Unknown reads as false.
    bool is(Attribute a) const { return (*this)[a].value_or(false); }

    bool fully_resolved() const;
    bool any_resolved() const;

    // is_positive and is_negative may not both be true.
    bool exclusion_ok() const { return !(is(Attribute::is_positive) && is(Attribute::is_negative)); }

    bool operator==(const LabelSet&) const = default;
};

// Manual labels take precedence; auto labels fill in where manual is unknown.
// A manually resolved polarity (positive or negative) overrides the other
// side of the pair so the result always satisfies exclusion_ok().
LabelSet merge_labels(const LabelSet& manual, const LabelSet& fallback);

}  // namespace wotchat
