#include <algorithm>
#include <array>
#include <ostream>

#include "json.hpp"

#include "wotchat/store/store.hpp"
#include "wotchat/text.hpp"

namespace wotchat::store {

namespace {

constexpr std::string_view kMask = "<@>";

// Replaces every occurrence of a display name (ASCII case-insensitive) or a
// decimal account id. Longest match wins at each position.
class IdentityMask {
public:
    explicit IdentityMask(const std::vector<PlayerRecord>& players) {
        for (const auto& p : players) {
            add(std::to_string(p.account_id));
            if (!p.display_name.empty()) add(to_lower_ascii(p.display_name));
        }
        for (auto& bucket : by_first_)
            std::sort(bucket.begin(), bucket.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
    }

    std::string apply(std::string_view text) const {
        const std::string lower = to_lower_ascii(text);
        std::string out;
        out.reserve(text.size());
        std::size_t i = 0;
        while (i < text.size()) {
            const auto& bucket = by_first_[static_cast<unsigned char>(lower[i])];
            std::size_t hit = 0;
            for (const auto& pattern : bucket) {
                if (lower.compare(i, pattern.size(), pattern) == 0) {
                    hit = pattern.size();
                    break;
                }
            }
            if (hit) {
                out += kMask;
                i += hit;
            } else {
                out.push_back(text[i++]);
            }
        }
        return out;
    }

private:
    void add(std::string pattern) {
        auto& bucket = by_first_[static_cast<unsigned char>(pattern[0])];
        if (std::find(bucket.begin(), bucket.end(), pattern) == bucket.end()) bucket.push_back(std::move(pattern));
    }

    std::array<std::vector<std::string>, 256> by_first_;
};

std::string csv_label(const Tri& t) {
    if (!t) return {};
    return *t ? "1" : "0";
}

std::string csv_int(const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : std::string{}; }

}  // namespace

void Store::anonymized_export(ExportFormat format, std::ostream& out) const {
    std::lock_guard lock(mutex_);
    const IdentityMask mask(players());
    const auto rows = messages();

    if (format == ExportFormat::csv) {
        out << "match_id,player_guid,clock,text";
        for (auto a : kAllAttributes) out << ',' << attribute_name(a);
        out << ",cs,pcs\r\n";
    }

    for (const auto& m : rows) {
        const std::string text = mask.apply(m.text);
        const std::string clock = format_number(static_cast<float>(m.clock));
        if (format == ExportFormat::csv) {
            out << m.match_id << ',' << m.player_guid << ',' << clock << ',' << csv_field(text);
            for (auto a : kAllAttributes) out << ',' << csv_label(m.manual_labels[a]);
            out << ',' << csv_int(m.cs) << ',' << csv_int(m.pcs) << "\r\n";
        } else {
            nlohmann::ordered_json row;
            row["match_id"] = m.match_id;
            row["player_guid"] = m.player_guid;
            row["clock"] = std::stod(clock);
            row["text"] = text;
            for (auto a : kAllAttributes) {
                const auto& v = m.manual_labels[a];
                row[std::string(attribute_name(a))] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
            }
            row["cs"] = m.cs ? nlohmann::ordered_json(*m.cs) : nlohmann::ordered_json(nullptr);
            row["pcs"] = m.pcs ? nlohmann::ordered_json(*m.pcs) : nlohmann::ordered_json(nullptr);
            out << row.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
        }
        if (!out) throw ExportIO("write failed during export");
    }
    out.flush();
    if (!out) throw ExportIO("write failed during export");
}

}  // namespace wotchat::store
