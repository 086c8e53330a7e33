#include <iostream>
#include <set>

#include "wotchat/harvest/harvest.hpp"
#include "wotchat/store/store.hpp"
#include "wotchat/text.hpp"

namespace wotchat::harvest {

namespace {

std::string listing_url(const std::string& base, const std::string& path, std::uint32_t page) {
    std::string p = path;
    if (auto at = p.find("{page}"); at != std::string::npos) p.replace(at, 6, std::to_string(page));
    std::string b = base;
    while (!b.empty() && b.back() == '/') b.pop_back();
    if (!p.empty() && p.front() != '/') p.insert(0, "/");
    return b + p;
}

bool looks_like_html(std::string_view body) {
    const auto head = to_lower_ascii(body.substr(0, 4096));
    return head.find("<html") != std::string::npos || head.find("<!doctype html") != std::string::npos ||
           head.find("<a ") != std::string::npos;
}

}  // namespace

std::vector<std::string> extract_links(std::string_view html, std::string_view page_url, const std::regex& pattern) {
    static const std::regex anchor(R"re(<a\s[^>]*?href\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s>]+)))re", std::regex::icase);
    std::vector<std::string> out;
    const std::string text(html);
    for (auto it = std::sregex_iterator(text.begin(), text.end(), anchor); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        std::string href = m[1].matched ? m[1].str() : m[2].matched ? m[2].str() : m[3].str();
        // &amp; is the only entity that matters inside hrefs
        for (auto at = href.find("&amp;"); at != std::string::npos; at = href.find("&amp;", at + 1))
            href.replace(at, 5, "&");
        if (href.empty()) continue;
        std::string url;
        try {
            url = resolve_href(page_url, href);
        } catch (const std::invalid_argument&) {
            continue;  // mailto:, javascript: and friends
        }
        if (std::regex_search(url, pattern)) out.push_back(std::move(url));
    }
    return out;
}

CrawlResult crawl_listing(PoliteClient& client, const std::string& base_url, std::uint32_t first,
                          std::uint32_t last, store::Store* store, const CrawlOptions& options) {
    CrawlResult result;
    if (first > last) return result;
    const std::regex pattern(options.link_pattern, std::regex::icase);
    std::unordered_set<std::string> settled;
    if (store) settled = store->settled_links();
    std::set<std::string> seen;

    for (std::uint32_t page = first;; ++page) {
        const auto url = listing_url(base_url, options.listing_path, page);
        try {
            auto res = client.get(url);
            if (res.status != 200) throw FetchError(url + ": HTTP " + std::to_string(res.status), res.status);
            if (!looks_like_html(res.body)) throw ParseError(url + ": page is not HTML");
            for (auto& link : extract_links(res.body, url, pattern)) {
                if (!seen.insert(link).second) continue;
                if (settled.count(link)) {
                    ++result.excluded;
                    continue;
                }
                if (store) store->record_link(link, page);
                result.links.push_back({std::move(link), page, utc_now_iso8601()});
            }
        } catch (const FetchError& e) {
            std::clog << "crawl: " << e.what() << '\n';
            result.errors.push_back(e.what());
        }
        if (page == last) break;
    }
    return result;
}

}  // namespace wotchat::harvest
