#include <doctest.h>

#include <atomic>
#include <random>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "support/corpus.hpp"
#include "wotchat/sentiment/sentiment.hpp"
#include "wotchat/store/store.hpp"

using namespace wotchat;
using namespace wotchat::sentiment;

namespace {

std::filesystem::path mock_table() { return std::filesystem::path(WOTCHAT_DATA_DIR) / "sentiment" / "mock.json"; }

// Builds a store where `abusive_negative` abusive messages read "bad" and so on.
void seed_cells(store::Store& s, std::size_t tp, std::size_t tn, std::size_t fn, std::size_t fp,
                const std::string& negative_text, const std::string& positive_text) {
    std::vector<std::string> texts;
    std::vector<bool> abusive;
    auto add = [&](std::size_t n, const std::string& text, bool a) {
        for (std::size_t i = 0; i < n; ++i) {
            texts.push_back(text);
            abusive.push_back(a);
        }
    };
    add(tp, negative_text, true);
    add(fn, positive_text, true);
    add(fp, negative_text, false);
    add(tn, positive_text, false);
    add(7, "unlabelled chatter", false);
    testing::ingest_plain_texts(s, texts);
    auto msgs = s.messages();
    REQUIRE(msgs.size() == texts.size());
    s.transaction([&] {
        for (std::size_t i = 0; i + 7 < msgs.size(); ++i) {
            LabelSet l;
            l[Attribute::is_abusive] = static_cast<bool>(abusive[i]);
            s.set_manual_labels(msgs[i].message_id, l, "ann", std::nullopt);
        }
    });
}

struct FakeService {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> hits{0};
    std::string last_key;
    std::mutex m;

    FakeService() {
        server.Post("/analyze/", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            {
                std::lock_guard lock(m);
                last_key = req.get_header_value("X-RapidAPI-Key");
            }
            if (req.get_header_value("X-RapidAPI-Key") != "secret") {
                res.status = 401;
                return;
            }
            auto text = req.get_param_value("text");
            if (text == "down") {
                res.status = 503;
                return;
            }
            if (text == "garbage") {
                res.set_content("<html>", "text/html");
                return;
            }
            res.set_content(R"({"type":"negative","score":-0.383199971,"keywords":[{"word":"hate","score":-0.918459669}],"result_code":"200"})",
                            "application/json");
        });
        server.Post("/text/analytics/v2.0/sentiment", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            if (req.get_header_value("Ocp-Apim-Subscription-Key") != "secret") {
                res.status = 403;
                return;
            }
            auto body = nlohmann::json::parse(req.body);
            auto text = body["documents"][0]["text"].get<std::string>();
            double score = text.find("love") != std::string::npos ? 0.877212041746438 : 0.0478871469511812;
            nlohmann::json out = {{"documents", {{{"id", "1"}}, {{"score", score}}}}, {"errors", nlohmann::json::array()}};
            res.set_content(out.dump(), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~FakeService() {
        server.stop();
        thread.join();
    }
    std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port) + path; }
};

}  // namespace

TEST_CASE("Twinword-style examples through the mock") {
    auto mock = load_mock(mock_table(), Scale::twinword);
    auto love = mock->analyze("I love ice cream!");
    CHECK(love.raw_score == doctest::Approx(0.917220858));
    CHECK(love.polarity == Polarity::positive);
    REQUIRE(love.keywords.size() == 1);
    CHECK(love.keywords[0].term == "love");

    auto hate = mock->analyze("I hate the whole team");
    CHECK(hate.raw_score == doctest::Approx(-0.383199971));
    CHECK(hate.polarity == Polarity::negative);
    CHECK(hate.keywords == std::vector<Keyword>{{"whole", 0.152059727}, {"hate", -0.918459669}});

    // Same sentence without the fixed answer: the keyword mean gives the same score.
    auto derived = mock->analyze("i HATE the whole team.");
    CHECK(derived.raw_score == doctest::Approx(-0.383199971));
}

TEST_CASE("Azure-style examples through the mock") {
    auto mock = load_mock(mock_table(), Scale::azure);
    auto love = mock->analyze("I love ice cream");
    CHECK(love.raw_score == doctest::Approx(0.877212041746438));
    CHECK(love.percent() == 88);
    CHECK(love.polarity == Polarity::positive);
    CHECK(love.normalized == doctest::Approx(0.754424083492876));
    auto hate = mock->analyze("I hate the whole team");
    CHECK(hate.percent() == 5);
    CHECK(hate.polarity == Polarity::negative);
}

TEST_CASE("polarity thresholds are strict") {
    CHECK(polarity_for(Scale::twinword, -0.05) == Polarity::neutral);
    CHECK(polarity_for(Scale::twinword, 0.05) == Polarity::neutral);
    CHECK(polarity_for(Scale::twinword, -0.0500001) == Polarity::negative);
    CHECK(polarity_for(Scale::twinword, 0.0500001) == Polarity::positive);
    CHECK(polarity_for(Scale::twinword, 0.0) == Polarity::neutral);
    CHECK(polarity_for(Scale::azure, 0.5) == Polarity::neutral);
    CHECK(polarity_for(Scale::azure, 0.4999) == Polarity::negative);
    CHECK(polarity_for(Scale::azure, 0.5001) == Polarity::positive);
    CHECK(polarity_for(Scale::azure, 0.6, 0.7) == Polarity::negative);
}

TEST_CASE("normalization is monotone and polarity agrees with it") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> tw(-1, 1), az(0, 1);
    for (int i = 0; i < 5000; ++i) {
        double a = tw(rng), b = tw(rng);
        if (a < b) CHECK(normalize(Scale::twinword, a) < normalize(Scale::twinword, b));
        double c = az(rng), d = az(rng);
        if (c < d) CHECK(normalize(Scale::azure, c) < normalize(Scale::azure, d));
        double n = normalize(Scale::azure, c);
        CHECK(n >= -1.0);
        CHECK(n <= 1.0);
        CHECK((polarity_for(Scale::azure, c) == Polarity::negative) == (n < 0));
    }
}

TEST_CASE("any well-formed response maps to exactly one polarity") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> tw(-1, 1), az(0, 1);
    for (int i = 0; i < 1000; ++i) {
        double raw = tw(rng);
        nlohmann::json body = {{"type", "x"}, {"score", raw}, {"keywords", nlohmann::json::array()}};
        auto r = parse_twinword(body.dump());
        CHECK(r.polarity == polarity_for(Scale::twinword, raw));
        double a = az(rng);
        nlohmann::json combined = {{"documents", {{{"id", "1"}, {"score", a}}}}};
        CHECK(parse_azure(combined.dump()).polarity == polarity_for(Scale::azure, a));
        nlohmann::json split = {{"sentiment", {{"documents", {{{"id", "1"}}, {{"score", a}}}}, {"errors", nlohmann::json::array()}}}};
        CHECK(parse_azure(split.dump()).raw_score == a);
    }
}

TEST_CASE("malformed responses") {
    CHECK_THROWS_AS(parse_twinword("not json"), MalformedResponse);
    CHECK_THROWS_AS(parse_twinword(R"({"type":"positive"})"), MalformedResponse);
    CHECK_THROWS_AS(parse_twinword(R"({"score":1.5})"), MalformedResponse);
    CHECK_THROWS_AS(parse_twinword(R"({"score":0.2,"result_code":"500"})"), MalformedResponse);
    CHECK_THROWS_AS(parse_twinword(R"({"score":0.2,"keywords":[{"word":1}]})"), MalformedResponse);
    CHECK_THROWS_AS(parse_azure(R"({"documents":[{"id":"1"}],"errors":[{"id":"1","message":"bad"}]})"), MalformedResponse);
    CHECK_THROWS_AS(parse_azure(R"({"documents":[{"score":-0.1}]})"), MalformedResponse);
    CHECK_THROWS_AS(parse_azure(R"([])"), MalformedResponse);
    try {
        parse_twinword("{");
    } catch (const BackendError& e) {
        CHECK(e.retryable());
    }
}

TEST_CASE("result JSON round trip") {
    auto mock = load_mock(mock_table(), Scale::twinword);
    auto r = mock->analyze("I hate the whole team");
    auto back = result_from_json(result_to_json(r));
    CHECK(back.raw_score == r.raw_score);
    CHECK(back.polarity == r.polarity);
    CHECK(back.keywords == r.keywords);
    CHECK(back.backend == r.backend);
}

TEST_CASE("second analyze of the same text makes no backend call") {
    store::Store s(":memory:");
    auto mock = load_mock(mock_table(), Scale::twinword);
    {
        SentimentService svc(*mock, &s, 0);
        svc.analyze("useless noob");
        svc.analyze("useless noob");
        CHECK(svc.backend_calls() == 1);
    }
    CHECK(mock->calls() == 1);
    SentimentService fresh(*mock, &s, 0);
    auto r = fresh.analyze("useless noob");
    CHECK(fresh.backend_calls() == 0);
    CHECK(mock->calls() == 1);
    CHECK(r.polarity == Polarity::negative);
}

TEST_CASE("token bucket limits request rate") {
    RateLimiter limiter(20, 1);
    auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < 11; ++i) limiter.acquire();
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(elapsed >= 0.45);
    CHECK(elapsed < 2.0);
}

TEST_CASE("HTTP backends against a local stand-in service") {
    FakeService fake;
    SUBCASE("twinword wire format") {
        TwinwordBackend tw("tw", fake.url("/analyze/"), "secret");
        auto r = tw.analyze("I hate the whole team");
        CHECK(r.raw_score == doctest::Approx(-0.383199971));
        CHECK(r.polarity == Polarity::negative);
        CHECK(fake.last_key == "secret");
        CHECK_THROWS_AS(tw.analyze("garbage"), MalformedResponse);
        CHECK_THROWS_AS(tw.analyze("down"), BackendUnavailable);
    }
    SUBCASE("bad key") {
        TwinwordBackend tw("tw", fake.url("/analyze/"), "wrong");
        CHECK_THROWS_AS(tw.analyze("x"), AuthError);
        AzureBackend az("az", fake.url("/text/analytics/v2.0/sentiment"), "wrong");
        CHECK_THROWS_AS(az.analyze("x"), AuthError);
    }
    SUBCASE("azure wire format") {
        AzureBackend az("az", fake.url("/text/analytics/v2.0/sentiment"), "secret");
        CHECK(az.analyze("I love ice cream").percent() == 88);
        CHECK(az.analyze("I hate the whole team").percent() == 5);
    }
    SUBCASE("retryable errors are retried, auth errors are not") {
        TwinwordBackend down("tw", fake.url("/analyze/"), "secret");
        SentimentService svc(down, nullptr, 0, 3);
        int before = fake.hits;
        CHECK_THROWS_AS(svc.analyze("down"), BackendUnavailable);
        CHECK(fake.hits - before == 3);

        TwinwordBackend denied("tw", fake.url("/analyze/"), "wrong");
        SentimentService svc2(denied, nullptr, 0, 3);
        before = fake.hits;
        CHECK_THROWS_AS(svc2.analyze("x"), AuthError);
        CHECK(fake.hits - before == 1);
    }
    SUBCASE("unreachable host") {
        TwinwordBackend tw("tw", "http://127.0.0.1:1/analyze/", "secret");
        CHECK_THROWS_AS(tw.analyze("x"), BackendUnavailable);
    }
}

TEST_CASE("backend config") {
    auto c = parse_backend_config("# x\nname = tw\nkind = twinword-style\nendpoint = https://h/analyze/\nkey_env = K\nrate = 2\n");
    CHECK(c.name == "tw");
    CHECK(c.rate == 2.0);
    CHECK_THROWS_AS(parse_backend_config("kind = other\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_backend_config("kind = azure-style\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_backend_config("kind = mock\ncolour = red\n"), std::invalid_argument);

    auto mock = make_backend(parse_backend_config("kind = mock\nscale = azure\n"), WOTCHAT_DATA_DIR);
    CHECK(mock->scale() == Scale::azure);
    auto missing = parse_backend_config("kind = azure-style\nendpoint = https://h/x\nkey_env = WOTCHAT_SURELY_UNSET_KEY\n");
    CHECK_THROWS_AS(make_backend(missing, WOTCHAT_DATA_DIR), AuthError);

    auto split = split_url("https://example.org:8443/a/b?c=1");
    CHECK(split.base_url == "https://example.org:8443");
    CHECK(split.path == "/a/b?c=1");
}

TEST_CASE("evaluation against manual abusive labels") {
    SUBCASE("Twinword-scale cells") {
        store::Store s(":memory:");
        seed_cells(s, 309, 1592, 127, 1279, "bad", "good");
        auto mock = load_mock(mock_table(), Scale::twinword);
        SentimentService svc(*mock, &s, 0);
        auto eval = evaluate_sentiment(s, svc);
        CHECK(eval.matrix.tp == 309);
        CHECK(eval.matrix.tn == 1592);
        CHECK(eval.matrix.fn == 127);
        CHECK(eval.matrix.fp == 1279);
        CHECK(eval.unlabeled == 7);
        CHECK(metrics::dor(eval.matrix) == doctest::Approx(3.03).epsilon(0.005));
        CHECK(svc.backend_calls() == 2);
    }
    SUBCASE("Azure-scale cells with neutral messages excluded") {
        store::Store s(":memory:");
        seed_cells(s, 156, 204, 33, 145, "bad", "good");
        testing::ingest_plain_texts(s, {"tank tank"}, "fixture://neutral");
        auto neutral_id = s.messages().back().message_id;
        LabelSet l;
        l[Attribute::is_abusive] = true;
        s.set_manual_labels(neutral_id, l, "ann", std::nullopt);

        auto mock = load_mock(mock_table(), Scale::azure);
        SentimentService svc(*mock, nullptr, 0);
        auto eval = evaluate_sentiment(s, svc);
        CHECK(eval.neutral == 1);
        CHECK(metrics::dor(eval.matrix) == doctest::Approx(6.65).epsilon(0.005));
    }
    SUBCASE("all-neutral backend") {
        store::Store s(":memory:");
        seed_cells(s, 3, 3, 3, 3, "tank", "arty");
        auto mock = load_mock(mock_table(), Scale::twinword);
        SentimentService svc(*mock, nullptr, 0);
        CHECK_THROWS_AS(evaluate_sentiment(s, svc), metrics::NoOverlap);
    }
}
