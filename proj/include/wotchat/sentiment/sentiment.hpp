#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wotchat/metrics/metrics.hpp"

namespace wotchat::store {
class Store;
}

namespace wotchat::sentiment {

enum class Polarity { positive, negative, neutral };
std::string_view to_string(Polarity p);

// Native score scale of a backend.
enum class Scale {
    twinword,  // [-1, 1]
    azure,     // [0, 1]
};
std::string_view to_string(Scale s);

struct Keyword {
    std::string term;
    double score = 0.0;
    bool operator==(const Keyword&) const = default;
};

struct SentimentResult {
    std::string backend;
    Scale scale = Scale::twinword;
    double raw_score = 0.0;
    double normalized = 0.0;  // [-1, 1]
    Polarity polarity = Polarity::neutral;
    std::vector<Keyword> keywords;

    // Azure-style display value, 0..100.
    int percent() const;
};

class BackendError : public std::runtime_error {
public:
    BackendError(const std::string& what, bool retryable) : std::runtime_error(what), retryable_(retryable) {}
    bool retryable() const { return retryable_; }

private:
    bool retryable_;
};

class BackendUnavailable : public BackendError {
public:
    explicit BackendUnavailable(const std::string& what) : BackendError(what, true) {}
};

class AuthError : public BackendError {
public:
    explicit AuthError(const std::string& what) : BackendError(what, false) {}
};

class MalformedResponse : public BackendError {
public:
    explicit MalformedResponse(const std::string& what) : BackendError(what, true) {}
};

inline constexpr double kTwinwordThreshold = 0.05;
inline constexpr double kAzureCut = 0.5;

double normalize(Scale scale, double raw);
// Twinword: negative below -0.05, positive above 0.05. Azure: split at `cut`,
// exactly `cut` is neutral.
Polarity polarity_for(Scale scale, double raw, double azure_cut = kAzureCut);

// Parse the services' response bodies. Throw MalformedResponse.
SentimentResult parse_twinword(std::string_view body, std::string backend = "twinword");
SentimentResult parse_azure(std::string_view body, std::string backend = "azure", double cut = kAzureCut);

std::string result_to_json(const SentimentResult& r);
SentimentResult result_from_json(std::string_view json);

class Backend {
public:
    virtual ~Backend() = default;
    virtual const std::string& name() const = 0;
    virtual Scale scale() const = 0;
    virtual SentimentResult analyze(std::string_view text) = 0;
};

struct FixedAnswer {
    double raw = 0.0;
    std::vector<Keyword> keywords;
};

// Keyword-valence scorer with fixed answers for a few sentences. Builds a
// response body in the matching wire format and parses it back.
class MockBackend : public Backend {
public:
    MockBackend(std::string name, Scale scale, std::map<std::string, double> valence,
                std::map<std::string, FixedAnswer> fixed = {});
    const std::string& name() const override { return name_; }
    Scale scale() const override { return scale_; }
    SentimentResult analyze(std::string_view text) override;

    std::string response_body(std::string_view text) const;
    std::size_t calls() const { return calls_; }

private:
    std::string name_;
    Scale scale_;
    std::map<std::string, double> valence_;
    std::map<std::string, FixedAnswer> fixed_;
    std::size_t calls_ = 0;
};

// Loads data/sentiment/mock.json: {"valence": {...}, "fixed": {"twinword": {...}, "azure": {...}}}.
std::unique_ptr<MockBackend> load_mock(const std::filesystem::path& path, Scale scale, std::string name = "mock");

struct HttpEndpoint {
    std::string base_url;  // scheme://host[:port]
    std::string path;
};
HttpEndpoint split_url(std::string_view url);

class TwinwordBackend : public Backend {
public:
    TwinwordBackend(std::string name, std::string url, std::string key);
    const std::string& name() const override { return name_; }
    Scale scale() const override { return Scale::twinword; }
    SentimentResult analyze(std::string_view text) override;

private:
    std::string name_;
    HttpEndpoint endpoint_;
    std::string key_;
};

class AzureBackend : public Backend {
public:
    AzureBackend(std::string name, std::string url, std::string key, double cut = kAzureCut);
    const std::string& name() const override { return name_; }
    Scale scale() const override { return Scale::azure; }
    SentimentResult analyze(std::string_view text) override;

private:
    std::string name_;
    HttpEndpoint endpoint_;
    std::string key_;
    double cut_;
};

struct BackendConfig {
    std::string name;
    std::string kind;  // twinword-style | azure-style | mock
    std::string endpoint;
    std::string key_env;
    std::string scale = "twinword";  // mock only
    std::string table;               // mock only
    double rate = 5.0;               // requests per second
    double azure_cut = kAzureCut;
};

BackendConfig parse_backend_config(std::string_view text);
BackendConfig load_backend_config(const std::filesystem::path& path);
std::unique_ptr<Backend> make_backend(const BackendConfig& config, const std::filesystem::path& data_dir);

class RateLimiter {
public:
    using Clock = std::chrono::steady_clock;
    explicit RateLimiter(double per_second, double burst = 0);
    // Blocks until a token is available.
    void acquire();

private:
    std::mutex mutex_;
    double rate_;
    double capacity_;
    double tokens_;
    Clock::time_point last_;
};

// Cached, rate-limited access to one backend. The cache is keyed by backend
// name and SHA-256 of the text and also persisted in the store when given.
class SentimentService {
public:
    SentimentService(Backend& backend, store::Store* store = nullptr, double rate = 5.0, int max_attempts = 3);
    SentimentResult analyze(std::string_view text);
    std::size_t backend_calls() const { return backend_calls_; }

private:
    Backend& backend_;
    store::Store* store_;
    RateLimiter limiter_;
    int max_attempts_;
    std::mutex mutex_;
    std::unordered_map<std::string, SentimentResult> cache_;
    std::size_t backend_calls_ = 0;
};

struct SentimentEvaluation {
    metrics::ConfusionMatrix matrix;
    std::uint64_t neutral = 0;      // excluded: no polarity
    std::uint64_t unlabeled = 0;    // excluded: is_abusive unknown
};

// Manual is_abusive against "sentiment is negative". Throws metrics::NoOverlap.
SentimentEvaluation evaluate_sentiment(const store::Store& store, SentimentService& service);

}  // namespace wotchat::sentiment
