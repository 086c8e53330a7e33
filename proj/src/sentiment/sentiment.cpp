#include "wotchat/sentiment/sentiment.hpp"

#include <cmath>

#include "json.hpp"

namespace wotchat::sentiment {

using nlohmann::json;

std::string_view to_string(Polarity p) {
    switch (p) {
        case Polarity::positive: return "positive";
        case Polarity::negative: return "negative";
        case Polarity::neutral: return "neutral";
    }
    return "neutral";
}

std::string_view to_string(Scale s) { return s == Scale::azure ? "azure" : "twinword"; }

int SentimentResult::percent() const { return static_cast<int>(std::lround((normalized + 1.0) / 2.0 * 100.0)); }

double normalize(Scale scale, double raw) { return scale == Scale::azure ? 2.0 * raw - 1.0 : raw; }

Polarity polarity_for(Scale scale, double raw, double azure_cut) {
    if (scale == Scale::azure) {
        if (raw < azure_cut) return Polarity::negative;
        if (raw > azure_cut) return Polarity::positive;
        return Polarity::neutral;
    }
    if (raw < -kTwinwordThreshold) return Polarity::negative;
    if (raw > kTwinwordThreshold) return Polarity::positive;
    return Polarity::neutral;
}

namespace {

json parse_body(std::string_view body) {
    auto j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw MalformedResponse("response is not a JSON object");
    return j;
}

SentimentResult make_result(std::string backend, Scale scale, double raw, double cut) {
    SentimentResult r;
    r.backend = std::move(backend);
    r.scale = scale;
    r.raw_score = raw;
    r.normalized = normalize(scale, raw);
    r.polarity = polarity_for(scale, raw, cut);
    return r;
}

}  // namespace

SentimentResult parse_twinword(std::string_view body, std::string backend) {
    auto j = parse_body(body);
    if (j.contains("result_code") && j["result_code"].is_string() && j["result_code"] != "200")
        throw MalformedResponse("service reported " + j["result_code"].get<std::string>());
    if (!j.contains("score") || !j["score"].is_number()) throw MalformedResponse("missing numeric score");
    double raw = j["score"].get<double>();
    if (!std::isfinite(raw) || raw < -1.0 || raw > 1.0) throw MalformedResponse("score outside [-1, 1]");
    auto r = make_result(std::move(backend), Scale::twinword, raw, kAzureCut);
    if (j.contains("keywords")) {
        if (!j["keywords"].is_array()) throw MalformedResponse("keywords is not a list");
        for (const auto& k : j["keywords"]) {
            if (!k.is_object() || !k.contains("word") || !k["word"].is_string() || !k.contains("score") ||
                !k["score"].is_number())
                throw MalformedResponse("bad keyword entry");
            r.keywords.push_back({k["word"].get<std::string>(), k["score"].get<double>()});
        }
    }
    return r;
}

SentimentResult parse_azure(std::string_view body, std::string backend, double cut) {
    auto j = parse_body(body);
    const json& container = j.contains("sentiment") ? j["sentiment"] : j;
    if (!container.is_object() || !container.contains("documents") || !container["documents"].is_array())
        throw MalformedResponse("missing documents");
    // The score may sit in the same document object as the id or in a
    // separate entry after it.
    for (const auto& doc : container["documents"]) {
        if (!doc.is_object() || !doc.contains("score")) continue;
        if (!doc["score"].is_number()) throw MalformedResponse("score is not a number");
        double raw = doc["score"].get<double>();
        if (!std::isfinite(raw) || raw < 0.0 || raw > 1.0) throw MalformedResponse("score outside [0, 1]");
        return make_result(std::move(backend), Scale::azure, raw, cut);
    }
    std::string detail;
    if (container.contains("errors") && container["errors"].is_array() && !container["errors"].empty())
        detail = ": " + container["errors"][0].dump();
    throw MalformedResponse("no document score" + detail);
}

std::string result_to_json(const SentimentResult& r) {
    json j;
    j["backend"] = r.backend;
    j["scale"] = std::string(to_string(r.scale));
    j["raw"] = r.raw_score;
    j["normalized"] = r.normalized;
    j["polarity"] = std::string(to_string(r.polarity));
    j["keywords"] = json::array();
    for (const auto& k : r.keywords) j["keywords"].push_back({{"word", k.term}, {"score", k.score}});
    return j.dump();
}

SentimentResult result_from_json(std::string_view text) {
    auto j = parse_body(text);
    try {
        SentimentResult r;
        r.backend = j.at("backend").get<std::string>();
        r.scale = j.at("scale") == "azure" ? Scale::azure : Scale::twinword;
        r.raw_score = j.at("raw").get<double>();
        r.normalized = j.at("normalized").get<double>();
        auto p = j.at("polarity").get<std::string>();
        r.polarity = p == "positive" ? Polarity::positive : p == "negative" ? Polarity::negative : Polarity::neutral;
        for (const auto& k : j.at("keywords")) r.keywords.push_back({k.at("word"), k.at("score")});
        return r;
    } catch (const json::exception& e) {
        throw MalformedResponse(std::string("cached result: ") + e.what());
    }
}

}  // namespace wotchat::sentiment
