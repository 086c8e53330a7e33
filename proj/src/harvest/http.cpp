#include <thread>

#include "httplib.h"
#include "wotchat/harvest/harvest.hpp"
#include "wotchat/text.hpp"

namespace wotchat::harvest {

Url parse_url(std::string_view url) {
    auto scheme = url.find("://");
    if (scheme == std::string_view::npos) throw std::invalid_argument("not an absolute URL: " + std::string(url));
    const auto s = to_lower_ascii(url.substr(0, scheme));
    if (s != "http" && s != "https") throw std::invalid_argument("unsupported URL scheme: " + std::string(url));
    auto rest = url.find_first_of("/?", scheme + 3);
    if (scheme + 3 == url.size() || rest == scheme + 3) throw std::invalid_argument("URL without host: " + std::string(url));
    Url u;
    u.origin = s + std::string(url.substr(scheme, (rest == std::string_view::npos ? url.size() : rest) - scheme));
    u.target = rest == std::string_view::npos ? "/" : std::string(url.substr(rest));
    if (u.target[0] == '?') u.target.insert(0, "/");
    return u;
}

std::string resolve_href(std::string_view page_url, std::string_view href) {
    href = trim(href);
    if (auto hash = href.find('#'); hash != std::string_view::npos) href = href.substr(0, hash);
    if (href.find("://") != std::string_view::npos) return std::string(href);
    const Url page = parse_url(page_url);
    if (href.starts_with("//")) return page.origin.substr(0, page.origin.find("://") + 1) + std::string(href);
    if (href.starts_with("/")) return page.origin + std::string(href);
    std::string dir = page.target.substr(0, page.target.find('?'));
    dir = dir.substr(0, dir.rfind('/') + 1);
    if (href.starts_with("?")) return page.origin + page.target.substr(0, page.target.find('?')) + std::string(href);
    return page.origin + dir + std::string(href);
}

PoliteClient::PoliteClient(std::chrono::milliseconds request_delay, std::chrono::seconds timeout)
    : delay_(request_delay), timeout_(timeout) {}

std::size_t PoliteClient::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

// Reserves the next free slot for the host, then sleeps until it arrives.
void PoliteClient::wait_turn(const std::string& origin) {
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(mutex_);
        auto now = std::chrono::steady_clock::now();
        auto& next = next_slot_[origin];
        slot = std::max(now, next);
        next = slot + delay_;
        ++requests_;
    }
    std::this_thread::sleep_until(slot);
}

HttpResponse PoliteClient::get(const std::string& url) {
    const Url u = parse_url(url);
    wait_turn(u.origin);
    httplib::Client cli(u.origin);
    cli.set_connection_timeout(timeout_);
    cli.set_read_timeout(timeout_);
    cli.set_follow_location(true);
    auto res = cli.Get(u.target, {{"User-Agent", "wotchat-harvest/1.0"}});
    if (!res) throw FetchError(url + ": " + httplib::to_string(res.error()));
    HttpResponse out;
    out.status = res->status;
    out.body = std::move(res->body);
    for (const auto& [k, v] : res->headers) out.headers[to_lower_ascii(k)] = v;
    return out;
}

}  // namespace wotchat::harvest
