// wotchat: command-line entry point for the whole pipeline.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "wotchat/analytics/analytics.hpp"
#include "wotchat/classify/classifier.hpp"
#include "wotchat/codec/replay.hpp"
#include "wotchat/harvest/fixture_site.hpp"
#include "wotchat/harvest/harvest.hpp"
#include "wotchat/metrics/metrics.hpp"
#include "wotchat/score/score.hpp"
#include "wotchat/sentiment/sentiment.hpp"
#include "wotchat/service/http_api.hpp"
#include "wotchat/store/store.hpp"
#include "wotchat/text.hpp"

#ifndef WOTCHAT_DATA_DIR
#define WOTCHAT_DATA_DIR "data"
#endif

using namespace wotchat;
using nlohmann::json;

namespace {

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

struct Globals {
    std::string db = env_or("DB_PATH", "wotchat.db");
    std::string data_dir = env_or("WOTCHAT_DATA_DIR", WOTCHAT_DATA_DIR);
    std::string schema;
    bool json_out = false;
};

codec::PacketSchema schema_for(const Globals& g) {
    return g.schema.empty() ? codec::default_schema() : codec::load_schema(g.schema);
}

// Opens the output file, or stdout for "-".
class Output {
public:
    explicit Output(const std::string& path) : path_(path) {
        if (path != "-") {
            file_.open(path, std::ios::binary);
            if (!file_) throw std::runtime_error("cannot write " + path);
        }
    }
    std::ostream& stream() { return path_ == "-" ? std::cout : file_; }
    void close() {
        if (path_ == "-") return std::cout.flush(), void();
        file_.close();
        if (!file_) throw std::runtime_error("write failed: " + path_);
    }

private:
    std::string path_;
    std::ofstream file_;
};

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::pair<std::uint32_t, std::uint32_t> parse_pages(const std::string& s) {
    auto dots = s.find("..");
    try {
        if (dots == std::string::npos) {
            auto p = static_cast<std::uint32_t>(std::stoul(s));
            return {p, p};
        }
        return {static_cast<std::uint32_t>(std::stoul(s.substr(0, dots))),
                static_cast<std::uint32_t>(std::stoul(s.substr(dots + 2)))};
    } catch (const std::exception&) {
        throw std::invalid_argument("--pages must look like A..B, got " + s);
    }
}

json counts_json(const classify::AttributeCounts& c) {
    json j = {{"messages", c.messages}};
    for (auto a : kAllAttributes) j["true"][std::string(attribute_name(a))] = c[a];
    return j;
}

json matrix_json(const metrics::ConfusionMatrix& m) {
    return {{"tp", m.tp}, {"tn", m.tn}, {"fn", m.fn}, {"fp", m.fp}, {"excluded", m.excluded}};
}

json row_json(const metrics::ReportRow& r) {
    json j = {{"name", r.name}};
    if (r.matrix) j["matrix"] = matrix_json(*r.matrix);
    j["dor"] = r.dor ? json(*r.dor) : json(nullptr);
    j["f_score"] = r.f_score ? json(*r.f_score) : json(nullptr);
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

void write_report_file(const std::string& out, const std::function<void(std::ostream&, bool)>& writer) {
    if (out.empty()) return;
    Output o(out);
    writer(o.stream(), out.size() > 4 && out.substr(out.size() - 4) == ".csv");
    o.close();
}

service::ApiServer* g_server = nullptr;
harvest::FixtureSite* g_site = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
    if (g_site) g_site->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Replay chat pipeline: harvest, decode, classify, score, evaluate, analyze, annotate."};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--db", g.db, "SQLite store (env DB_PATH)");
    app.add_option("--data-dir", g.data_dir, "directory with lexicons/ and sentiment/");
    app.add_option("--schema", g.schema, "packet schema file (key = value)");
    app.add_flag("--json", g.json_out, "machine-readable JSON on stdout");

    json result = json::object();
    std::function<void()> action;

    // fixture-serve
    auto* fixture = app.add_subcommand("fixture-serve", "serve the local listing site and stats API");
    std::string manifest_path, fixture_bind = "127.0.0.1:8000";
    fixture->add_option("--manifest", manifest_path, "JSON manifest (defaults used when omitted)");
    fixture->add_option("--bind", fixture_bind, "host:port");
    fixture->callback([&] {
        action = [&] {
            auto manifest = manifest_path.empty() ? harvest::FixtureManifest{} : harvest::load_manifest(manifest_path);
            auto [host, port] = service::parse_bind_addr(fixture_bind);
            harvest::FixtureSite site(manifest, codec::key_from_environment());
            g_site = &site;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::clog << "fixture site on http://" << host << ':' << port << " (" << manifest.replays << " replays, "
                      << harvest::listing_pages(manifest) << " pages)\n";
            if (!site.serve(host, port)) throw std::runtime_error("cannot bind " + fixture_bind);
            g_site = nullptr;
            result = {{"served", true}};
        };
    });

    // harvest
    auto* harvest_cmd = app.add_subcommand("harvest", "crawl, download, decode and store replays");
    std::string base_url, pages = "1..1", api_base;
    std::size_t limit = 1000, parallel = 2;
    long delay_ms = 1000;
    harvest_cmd->add_option("--base-url", base_url, "listing site root")->required();
    harvest_cmd->add_option("--pages", pages, "page range A..B");
    harvest_cmd->add_option("--limit", limit, "max files per run")->check(CLI::PositiveNumber);
    harvest_cmd->add_option("--delay-ms", delay_ms, "minimum gap between requests to one host")->check(CLI::NonNegativeNumber);
    harvest_cmd->add_option("--parallel", parallel, "parallel downloads")->check(CLI::PositiveNumber);
    harvest_cmd->add_option("--api-base", api_base, "stats API root (defaults to --base-url)");
    harvest_cmd->callback([&] {
        action = [&] {
            store::Store st(g.db);
            harvest::BatchSource src;
            src.base_url = base_url;
            std::tie(src.first_page, src.last_page) = parse_pages(pages);
            src.api_base = api_base.empty() ? base_url : api_base;
            src.app_id = env_or("WG_APP_ID", "");
            if (src.app_id.empty()) {
                std::clog << "harvest: WG_APP_ID not set, skipping player snapshots\n";
                src.api_base.clear();
            }
            src.key = codec::key_from_environment();
            src.schema = schema_for(g);
            harvest::BatchPolicy policy;
            policy.max_files_per_run = limit;
            policy.request_delay = std::chrono::milliseconds(delay_ms);
            policy.max_parallel_downloads = parallel;
            auto r = harvest::run_batch(st, src, policy);
            result = {{"links_seen", r.links_seen}, {"downloaded", r.downloaded}, {"decoded", r.decoded},
                      {"failed", r.failed},         {"skipped", r.skipped},       {"snapshots", r.snapshots},
                      {"snapshot_misses", r.snapshot_misses}, {"snapshot_errors", r.snapshot_errors},
                      {"aborted", r.aborted}};
            if (!g.json_out)
                std::cout << "links " << r.links_seen << ", downloaded " << r.downloaded << ", decoded " << r.decoded
                          << ", failed " << r.failed << ", skipped " << r.skipped << ", snapshots " << r.snapshots
                          << (r.aborted ? " (aborted: failure budget exceeded)" : "") << '\n';
        };
    });

    // ingest
    auto* ingest = app.add_subcommand("ingest", "store local replay files");
    std::vector<std::string> ingest_files;
    ingest->add_option("files", ingest_files, "replay files")->required()->check(CLI::ExistingFile);
    ingest->callback([&] {
        action = [&] {
            store::Store st(g.db);
            const auto key = codec::key_from_environment();
            const auto schema = schema_for(g);
            json files = json::array();
            for (const auto& f : ingest_files) {
                auto bytes = read_file(f);
                auto r = store::ingest_replay_bytes(st, bytes, key, schema, "file://" + f);
                files.push_back({{"file", f}, {"match_id", r.match_id}, {"inserted", r.inserted}, {"messages", r.messages}, {"deaths", r.deaths}});
                if (!g.json_out)
                    std::cout << f << ": " << (r.inserted ? "stored " : "already stored ") << r.match_id << " ("
                              << r.messages << " messages, " << r.deaths << " deaths)\n";
            }
            result = {{"files", files}};
        };
    });

    // decode
    auto* decode = app.add_subcommand("decode", "decode one replay file and print its chat and deaths");
    std::string decode_file;
    decode->add_option("file", decode_file, "replay file")->required()->check(CLI::ExistingFile);
    decode->callback([&] {
        action = [&] {
            auto bytes = read_file(decode_file);
            const auto schema = schema_for(g);
            auto doc = codec::decode_replay(bytes, codec::key_from_environment(), schema, sha256_hex(bytes));
            json chat = json::array(), deaths = json::array();
            for (const auto& c : codec::extract_chat(doc, schema))
                chat.push_back({{"message_id", c.message_id}, {"author", c.author_account_id}, {"clock", c.clock}, {"text", c.text}, {"unresolved", c.unresolved}});
            for (const auto& d : codec::extract_deaths(doc, schema))
                deaths.push_back({{"victim", d.victim_account_id}, {"killer", d.killer_account_id}, {"clock", d.clock}});
            result = {{"match_id", doc.source_id}, {"realm", doc.realm}, {"players", doc.players.size()},
                      {"packets", doc.packets.size()}, {"warnings", doc.warnings}, {"chat", chat}, {"deaths", deaths}};
            if (!g.json_out) {
                std::cout << doc.source_id << ": " << doc.players.size() << " players, " << doc.packets.size() << " packets\n";
                for (const auto& c : chat) std::cout << "  [" << c["clock"] << "] " << c["author"] << ": " << c["text"].get<std::string>() << '\n';
                for (const auto& w : doc.warnings) std::cout << "  warning: " << w << '\n';
            }
        };
    });

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "run the keyword classifier over stored messages");
    std::string lexicon_dir, mode = "boundary";
    classify_cmd->add_option("--lexicon-dir", lexicon_dir, "directory of *.txt lexicons (default <data-dir>/lexicons)");
    classify_cmd->add_option("--mode", mode, "boundary | substring");
    classify_cmd->callback([&] {
        action = [&] {
            store::Store st(g.db);
            auto dir = lexicon_dir.empty() ? std::filesystem::path(g.data_dir) / "lexicons" : std::filesystem::path(lexicon_dir);
            classify::Classifier c(classify::load_lexicons(dir), classify::match_mode_from_string(mode));
            auto counts = classify::classify_corpus(st, c);
            result = counts_json(counts);
            result["mode"] = std::string(classify::to_string(c.mode()));
            if (!g.json_out) {
                std::cout << counts.messages << " messages classified (" << classify::to_string(c.mode()) << ")\n";
                for (auto a : kAllAttributes) std::cout << "  " << attribute_name(a) << ": " << counts[a] << '\n';
            }
        };
    });

    // score
    auto* score_cmd = app.add_subcommand("score", "compute CS and PCS for every stored message");
    std::string labels = "merged";
    score_cmd->add_option("--labels", labels, "manual | auto | merged");
    score_cmd->callback([&] {
        action = [&] {
            store::Store st(g.db);
            auto s = score::score_store(st, score::label_source_from_string(labels));
            result = {{"matches", s.matches}, {"messages", s.messages}, {"total_cs", s.total_cs}, {"total_pcs", s.total_pcs}, {"labels", labels}};
            if (!g.json_out)
                std::cout << s.messages << " messages in " << s.matches << " matches scored; total CS " << s.total_cs
                          << ", total PCS " << s.total_pcs << '\n';
        };
    });

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "compare a classifier against manual labels");
    std::string against = "manual", candidate = "sac", backend_conf, eval_out, correction = "none";
    eval->add_option("--against", against, "reference labels")->check(CLI::IsMember({"manual"}));
    eval->add_option("--candidate", candidate, "sac | sentiment")->check(CLI::IsMember({"sac", "sentiment"}));
    eval->add_option("--backend", backend_conf, "sentiment backend config (default <data-dir>/sentiment/mock-twinword.conf)");
    eval->add_option("--correction", correction, "none | haldane")->check(CLI::IsMember({"none", "haldane"}));
    eval->add_option("--out", eval_out, "report file (.json or .csv, - for stdout)");
    eval->callback([&] {
        action = [&] {
            store::Store st(g.db);
            const auto corr = correction == "haldane" ? metrics::Correction::haldane : metrics::Correction::none;
            if (candidate == "sac") {
                auto report = metrics::evaluation_report(st, corr);
                json rows = json::array();
                for (const auto& r : report.attributes) rows.push_back(row_json(r));
                result = {{"reference", report.reference}, {"candidate", report.candidate}, {"attributes", rows}};
                if (report.cs_vs_pcs) result["cs_vs_pcs"] = row_json(*report.cs_vs_pcs);
                write_report_file(eval_out, [&](std::ostream& o, bool csv) {
                    csv ? metrics::write_report_csv(report, o) : metrics::write_report_json(report, o);
                });
                if (!g.json_out)
                    for (const auto& r : report.attributes)
                        std::cout << r.name << ": DOR " << (r.dor ? format_number(*r.dor) : "n/a") << ", F "
                                  << (r.f_score ? format_number(*r.f_score) : "n/a") << (r.error.empty() ? "" : " (" + r.error + ")") << '\n';
                return;
            }
            auto conf = sentiment::load_backend_config(
                backend_conf.empty() ? std::filesystem::path(g.data_dir) / "sentiment" / "mock-twinword.conf" : std::filesystem::path(backend_conf));
            auto backend = sentiment::make_backend(conf, g.data_dir);
            sentiment::SentimentService service(*backend, &st, conf.rate);
            auto ev = sentiment::evaluate_sentiment(st, service);
            auto row = metrics::make_row("sentiment:" + backend->name(), ev.matrix, corr);
            result = row_json(row);
            result["neutral"] = ev.neutral;
            result["unlabeled"] = ev.unlabeled;
            result["backend_calls"] = service.backend_calls();
            write_report_file(eval_out, [&](std::ostream& o, bool csv) {
                if (!csv) return void(o << result.dump(2) << '\n');
                o << "name,tp,tn,fn,fp,neutral,unlabeled,dor,f_score\r\n" << csv_field(row.name) << ',' << ev.matrix.tp << ','
                  << ev.matrix.tn << ',' << ev.matrix.fn << ',' << ev.matrix.fp << ',' << ev.neutral << ',' << ev.unlabeled
                  << ',' << (row.dor ? format_number(*row.dor) : "") << ',' << (row.f_score ? format_number(*row.f_score) : "") << "\r\n";
            });
            if (!g.json_out)
                std::cout << row.name << ": tp " << ev.matrix.tp << " tn " << ev.matrix.tn << " fn " << ev.matrix.fn << " fp "
                          << ev.matrix.fp << ", DOR " << (row.dor ? format_number(*row.dor) : "n/a") << ", neutral " << ev.neutral
                          << ", unlabeled " << ev.unlabeled << '\n';
        };
    });

    // analyze
    auto* analyze = app.add_subcommand("analyze", "timing and experience reports");
    analyze->require_subcommand(1);
    auto* dd = analyze->add_subcommand("death-delta", "abusive messages against time since the author's first death");
    double bin_s = 30;
    std::string dd_out = "-";
    dd->add_option("--bin-s", bin_s, "bin width in seconds")->check(CLI::PositiveNumber);
    dd->add_option("--out", dd_out, "CSV file");
    dd->callback([&] {
        action = [&] {
            store::Store st(g.db);
            auto h = analytics::death_delta(st, bin_s);
            if (!(g.json_out && dd_out == "-")) {
                Output o(dd_out);
                analytics::write_death_delta_csv(h, o.stream());
                o.close();
            }
            result = {{"bin_width", h.bin_width}, {"n_messages", h.n_messages}, {"after_death", h.after_death},
                      {"no_death", h.no_death}, {"pct_after_death", h.pct_after_death}, {"bins", h.bins.size()}};
            if (!g.json_out && dd_out != "-")
                std::cout << h.after_death << " of " << h.n_messages << " abusive messages after death ("
                          << format_number(100 * h.pct_after_death) << "%), " << h.no_death << " from authors who never died\n";
        };
    });
    auto* xp = analyze->add_subcommand("xp-rate", "abusive messages per player by experience bucket");
    std::uint64_t bucket = 500000;
    std::string xp_out = "-";
    xp->add_option("--bucket", bucket, "bucket width in XP")->check(CLI::PositiveNumber);
    xp->add_option("--out", xp_out, "CSV file");
    xp->callback([&] {
        action = [&] {
            store::Store st(g.db);
            auto t = analytics::experience_rates(st, bucket);
            if (!(g.json_out && xp_out == "-")) {
                Output o(xp_out);
                analytics::write_experience_csv(t, o.stream());
                o.close();
            }
            json rows = json::array();
            for (const auto& r : t.rows) rows.push_back({{"bucket_low", r.bucket_low}, {"abusive", r.abusive}, {"players", r.players}, {"rate", r.rate}});
            result = {{"bucket_width", t.bucket_width}, {"rows", rows}, {"unmatched", t.unmatched}};
            if (!g.json_out && xp_out != "-") std::cout << t.rows.size() << " buckets, " << t.unmatched << " abusive messages without a snapshot\n";
        };
    });

    // export
    auto* exp = app.add_subcommand("export", "anonymized export of messages, labels and scores");
    std::string format = "csv", export_out = "-";
    exp->add_option("--format", format, "csv | jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    exp->add_option("--out", export_out, "output file");
    exp->callback([&] {
        action = [&] {
            store::Store st(g.db);
            Output o(export_out);
            st.anonymized_export(format == "csv" ? store::ExportFormat::csv : store::ExportFormat::jsonl, o.stream());
            o.close();
            result = {{"format", format}, {"out", export_out}, {"messages", st.message_count()}};
            if (g.json_out && export_out == "-") result = json::object();  // stdout already holds the export
        };
    });

    // serve
    auto* serve = app.add_subcommand("serve", "annotation API and UI");
    std::string bind = env_or("BIND_ADDR", "127.0.0.1:8080"), static_dir;
    serve->add_option("--bind", bind, "host:port (env BIND_ADDR)");
    serve->add_option("--static-dir", static_dir, "built UI bundle to serve at /");
    serve->callback([&] {
        action = [&] {
            store::Store st(g.db);
            service::AnnotationService svc(st);
            service::ApiServer server(svc, {static_dir});
            auto [host, port] = service::parse_bind_addr(bind);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::clog << "annotation API on http://" << host << ':' << port << "/api/matches\n";
            if (!server.listen(host, port)) throw std::runtime_error("cannot bind " + bind);
            g_server = nullptr;
            result = {{"served", true}};
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code != 0 && g.json_out) std::cout << json{{"ok", false}, {"error", e.what()}}.dump() << '\n';
        return code;
    }

    try {
        if (action) action();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (g.json_out) std::cout << json{{"ok", false}, {"error", e.what()}}.dump() << '\n';
        return 1;
    }
    if (g.json_out && !result.empty()) {
        result["ok"] = true;
        std::cout << result.dump(2) << '\n';
    }
    return 0;
}
