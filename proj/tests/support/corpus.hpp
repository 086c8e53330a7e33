#pragma once

// Golden corpus loader and a helper that turns plain texts into one stored match.

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wotchat/codec/fixture.hpp"
#include "wotchat/labels.hpp"
#include "wotchat/store/store.hpp"

namespace wotchat::testing {

struct GoldenRow {
    std::string text;
    LabelSet expected;
};

// Columns: text, positive, negative, bad_language, racist, noob, filtered.
inline std::vector<GoldenRow> load_golden_corpus(
    const std::filesystem::path& path = std::filesystem::path(WOTCHAT_TEST_DATA_DIR) / "golden_corpus.tsv") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing " + path.string());
    const Attribute cols[] = {Attribute::is_positive, Attribute::is_negative, Attribute::has_bad_language,
                              Attribute::is_racist,   Attribute::noob_related, Attribute::filtered_text};
    std::vector<GoldenRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        GoldenRow row;
        auto tab = line.find('\t');
        row.text = line.substr(0, tab);
        std::size_t pos = tab + 1;
        for (auto a : cols) {
            row.expected[a] = line.at(pos) == '1';
            pos += 2;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// One match, five players taking turns, one message per second.
inline store::IngestResult ingest_plain_texts(store::Store& s, const std::vector<std::string>& texts,
                                              const std::string& url = "fixture://texts") {
    codec::FixtureSpec spec;
    for (std::uint64_t id = 1; id <= 5; ++id)
        spec.players.push_back({500100000 + id, "golden" + std::to_string(id), "T-34", id % 2 ? 1 : 2});
    for (std::size_t i = 0; i < texts.size(); ++i)
        spec.events.push_back(codec::FixtureChat{500100001 + i % 5, static_cast<float>(i + 1), texts[i]});
    auto bytes = codec::encode_fixture(spec);
    return store::ingest_replay_bytes(s, bytes, codec::default_test_key(), codec::default_schema(), url);
}

inline store::IngestResult ingest_texts(store::Store& s, const std::vector<GoldenRow>& rows) {
    std::vector<std::string> texts;
    for (const auto& r : rows) texts.push_back(r.text);
    return ingest_plain_texts(s, texts, "fixture://golden");
}

}  // namespace wotchat::testing
