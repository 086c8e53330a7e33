#include "wotchat/service/http_api.hpp"

#include <iostream>

#include "httplib.h"
#include "wotchat/score/score.hpp"

namespace wotchat::service {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
    send_json(res, status, json{{"error", code}, {"message", message}});
}

std::size_t size_param(const httplib::Request& req, const char* name, std::size_t fallback, std::size_t max) {
    if (!req.has_param(name)) return fallback;
    const auto& v = req.get_param_value(name);
    std::size_t pos = 0;
    unsigned long long n = 0;
    try {
        n = std::stoull(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != v.size()) throw std::invalid_argument(std::string(name) + " must be a non-negative integer");
    return std::min<std::size_t>(n, max);
}

bool bool_param(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return false;
    const auto& v = req.get_param_value(name);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0" || v.empty()) return false;
    throw std::invalid_argument(std::string(name) + " must be true or false");
}

json parse_body(const httplib::Request& req, bool allow_empty) {
    if (req.body.empty() && allow_empty) return json::object();
    auto j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw std::invalid_argument("request body must be a JSON object");
    return j;
}

std::optional<std::int64_t> version_field(const json& body) {
    auto it = body.find("version");
    if (it == body.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) throw std::invalid_argument("version must be an integer");
    return it->get<std::int64_t>();
}

std::string annotator_field(const json& body) {
    auto it = body.find("annotator_id");
    if (it == body.end() || it->is_null()) return "anonymous";
    if (!it->is_string()) throw std::invalid_argument("annotator_id must be a string");
    return it->get<std::string>();
}

// Maps library errors onto HTTP statuses.
template <typename Fn>
auto guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const store::VersionConflict& e) {
            send_json(res, 409, json{{"error", "conflict"},
                                     {"message", "message was changed by someone else"},
                                     {"current_version", e.current_version()}});
        } catch (const store::NotFound& e) {
            send_error(res, 404, "not_found", e.what());
        } catch (const score::InvalidLabels& e) {
            send_error(res, 400, "invalid_labels", e.what());
        } catch (const std::invalid_argument& e) {
            send_error(res, 400, "bad_request", e.what());
        } catch (const std::exception& e) {
            std::clog << "api: " << req.method << ' ' << req.path << ": " << e.what() << '\n';
            send_error(res, 500, "internal", e.what());
        }
    };
}

}  // namespace

ApiServer::ApiServer(AnnotationService& service, ServerOptions options)
    : service_(service), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
    auto& srv = *server_;

    srv.Get("/api/matches", guarded([this](const httplib::Request& req, httplib::Response& res) {
        MatchFilter filter{bool_param(req, "only_unclassified")};
        PageRequest page{size_param(req, "offset", 0, SIZE_MAX), size_param(req, "limit", 50, 500)};
        auto result = service_.list_matches(filter, page);
        json items = json::array();
        for (const auto& s : result.items) items.push_back(summary_to_json(s));
        send_json(res, 200, json{{"items", items}, {"total", result.total}, {"offset", result.offset}, {"limit", result.limit}});
    }));

    srv.Get(R"(/api/matches/([^/]+)/messages)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const std::string match_id = req.matches[1];
        json messages = json::array();
        for (const auto& m : service_.get_match_chat(match_id)) messages.push_back(message_to_json(m));
        send_json(res, 200, json{{"match_id", match_id}, {"messages", messages}});
    }));

    srv.Put(R"(/api/messages/([^/]+)/labels)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req, false);
        if (!body.contains("labels")) throw std::invalid_argument("body needs a \"labels\" object");
        AnnotationPatch patch{req.matches[1], labels_from_json(body["labels"]), annotator_field(body), version_field(body)};
        send_json(res, 200, message_to_json(service_.put_labels(patch)));
    }));

    srv.Post(R"(/api/messages/([^/]+)/clear-unknowns)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req, true);
        send_json(res, 200, message_to_json(service_.clear_unknowns(req.matches[1], annotator_field(body), version_field(body))));
    }));

    srv.Get("/api/health", [](const httplib::Request&, httplib::Response& res) { send_json(res, 200, json{{"status", "ok"}}); });

    if (!options_.static_dir.empty() && std::filesystem::is_directory(options_.static_dir))
        srv.set_mount_point("/", options_.static_dir.string());
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start(const std::string& host, int port) {
    const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return bound;
}

bool ApiServer::listen(const std::string& host, int port) { return server_->listen(host, port); }

void ApiServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

std::pair<std::string, int> parse_bind_addr(const std::string& addr) {
    auto colon = addr.rfind(':');
    if (colon == std::string::npos || colon == 0) throw std::invalid_argument("bind address must be host:port, got " + addr);
    int port = 0;
    try {
        std::size_t pos = 0;
        port = std::stoi(addr.substr(colon + 1), &pos);
        if (pos != addr.size() - colon - 1) port = -1;
    } catch (const std::exception&) {
        port = -1;
    }
    if (port < 0 || port > 65535) throw std::invalid_argument("bad port in bind address " + addr);
    return {addr.substr(0, colon), port};
}

}  // namespace wotchat::service
