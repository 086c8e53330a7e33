#include "wotchat/analytics/analytics.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include "wotchat/labels.hpp"
#include "wotchat/store/store.hpp"
#include "wotchat/text.hpp"

namespace wotchat::analytics {

namespace {

using MatchPlayer = std::pair<std::string, std::string>;

// Messages whose merged is_abusive label is true.
std::vector<store::MessageRecord> abusive_messages(const store::Store& st) {
    std::vector<store::MessageRecord> out;
    bool any_resolved = false;
    for (auto& m : st.messages()) {
        const auto merged = merge_labels(m.manual_labels, m.auto_labels);
        if (!merged[Attribute::is_abusive]) continue;
        any_resolved = true;
        if (*merged[Attribute::is_abusive]) out.push_back(std::move(m));
    }
    if (!any_resolved) throw NoLabeledData("no message has an is_abusive label");
    return out;
}

}  // namespace

DeathDeltaHistogram death_delta(const store::Store& st, double bin_width) {
    if (!(bin_width > 0)) throw std::invalid_argument("bin width must be positive");
    const auto abusive = abusive_messages(st);

    std::map<MatchPlayer, double> first_death;
    for (const auto& d : st.deaths()) {
        auto [it, inserted] = first_death.try_emplace({d.match_id, d.victim_guid}, d.clock);
        if (!inserted) it->second = std::min(it->second, d.clock);
    }

    DeathDeltaHistogram h;
    h.bin_width = bin_width;
    std::map<long long, std::size_t> counts;
    for (const auto& m : abusive) {
        auto it = first_death.find({m.match_id, m.player_guid});
        if (it == first_death.end()) {
            ++h.no_death;
            continue;
        }
        const double delta = m.clock - it->second;
        ++h.n_messages;
        if (delta > 0) ++h.after_death;
        ++counts[static_cast<long long>(std::floor(delta / bin_width))];
    }
    if (!counts.empty())
        for (long long b = counts.begin()->first; b <= counts.rbegin()->first; ++b) {
            auto it = counts.find(b);
            h.bins.emplace_back(static_cast<double>(b) * bin_width, it == counts.end() ? 0 : it->second);
        }
    h.pct_after_death = h.n_messages ? static_cast<double>(h.after_death) / static_cast<double>(h.n_messages) : 0.0;
    return h;
}

ExperienceRateTable experience_rates(const store::Store& st, std::uint64_t bucket_width) {
    if (bucket_width == 0) throw std::invalid_argument("bucket width must be positive");
    const auto abusive = abusive_messages(st);

    // Later snapshots for the same match and player replace earlier ones.
    std::map<MatchPlayer, std::uint64_t> xp;
    for (const auto& s : st.snapshots()) xp[{s.match_id, s.player_guid}] = s.experience_total;

    std::map<std::uint64_t, std::set<std::string>> players;
    for (const auto& [key, total] : xp) players[total / bucket_width * bucket_width].insert(key.second);

    ExperienceRateTable t;
    t.bucket_width = bucket_width;
    std::map<std::uint64_t, std::size_t> counts;
    for (const auto& m : abusive) {
        auto it = xp.find({m.match_id, m.player_guid});
        if (it == xp.end()) {
            ++t.unmatched;
            continue;
        }
        ++counts[it->second / bucket_width * bucket_width];
    }
    for (const auto& [low, who] : players) {
        ExperienceRow row;
        row.bucket_low = low;
        row.players = who.size();
        auto c = counts.find(low);
        row.abusive = c == counts.end() ? 0 : c->second;
        row.rate = static_cast<double>(row.abusive) / static_cast<double>(row.players);
        t.rows.push_back(row);
    }
    return t;
}

void write_death_delta_csv(const DeathDeltaHistogram& h, std::ostream& out) {
    out << "bin_low_s,count\r\n";
    for (const auto& [low, count] : h.bins) out << format_number(low) << ',' << count << "\r\n";
}

void write_experience_csv(const ExperienceRateTable& t, std::ostream& out) {
    out << "bucket_low_xp,abusive,players,rate\r\n";
    for (const auto& r : t.rows)
        out << r.bucket_low << ',' << r.abusive << ',' << r.players << ',' << format_number(r.rate) << "\r\n";
}

}  // namespace wotchat::analytics
