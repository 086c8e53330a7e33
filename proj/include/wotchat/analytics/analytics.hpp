#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wotchat::store {
class Store;
}

namespace wotchat::analytics {

class NoLabeledData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DeathDeltaHistogram {
    double bin_width = 30.0;
    std::vector<std::pair<double, std::size_t>> bins;  // (lower bound in seconds, count), contiguous
    double pct_after_death = 0.0;                      // fraction, delta strictly > 0
    std::size_t n_messages = 0;                        // abusive messages whose author died in that match
    std::size_t after_death = 0;
    std::size_t no_death = 0;  // abusive messages from authors who never died
};

// Abusive = is_abusive after merging manual over automatic labels. The delta
// is measured from the author's first death in the match. Throws
// NoLabeledData when no message has is_abusive resolved.
DeathDeltaHistogram death_delta(const store::Store& store, double bin_width = 30.0);

struct ExperienceRow {
    std::uint64_t bucket_low = 0;
    std::size_t abusive = 0;
    std::size_t players = 0;
    double rate = 0.0;
};

struct ExperienceRateTable {
    std::uint64_t bucket_width = 500000;
    std::vector<ExperienceRow> rows;  // only buckets with players, ascending
    std::size_t unmatched = 0;        // abusive messages without a snapshot for their match
};

// Each message uses the snapshot taken with its own replay (the latest one
// if there are several).
ExperienceRateTable experience_rates(const store::Store& store, std::uint64_t bucket_width = 500000);

void write_death_delta_csv(const DeathDeltaHistogram& h, std::ostream& out);
void write_experience_csv(const ExperienceRateTable& t, std::ostream& out);

}  // namespace wotchat::analytics
