#include <cmath>
#include <ostream>

#include "json.hpp"
#include "wotchat/metrics/metrics.hpp"
#include "wotchat/store/store.hpp"
#include "wotchat/text.hpp"

namespace wotchat::metrics {

ReportRow make_row(std::string name, const ConfusionMatrix& m, Correction correction) {
    ReportRow row;
    row.name = std::move(name);
    row.matrix = m;
    try {
        row.dor = dor(m, correction);
    } catch (const ZeroDenominator&) {
        row.error = "ZeroDenominator";
    }
    try {
        row.f_score = f_score(m);
    } catch (const UndefinedScore&) {
        if (row.error.empty()) row.error = "UndefinedScore";
    }
    return row;
}

EvaluationReport evaluation_report(const store::Store& st, Correction correction) {
    EvaluationReport report;
    report.candidate = "sac";
    const auto msgs = st.messages();

    for (auto a : kAllAttributes) {
        std::vector<Tri> ref, cand;
        ref.reserve(msgs.size());
        cand.reserve(msgs.size());
        for (const auto& m : msgs) {
            ref.push_back(m.manual_labels[a]);
            cand.push_back(m.auto_labels[a]);
        }
        const std::string name(attribute_name(a));
        try {
            auto matrix = confusion(ref, cand, name);
            matrix.candidate = "sac";
            report.attributes.push_back(make_row(name, matrix, correction));
        } catch (const NoOverlap&) {
            ReportRow row;
            row.name = name;
            row.error = "NoOverlap";
            report.attributes.push_back(std::move(row));
        }
    }

    std::vector<Tri> cs_pos, pcs_pos;
    for (const auto& m : msgs) {
        if (!m.cs || !m.pcs) continue;
        cs_pos.push_back(*m.cs > 0);
        pcs_pos.push_back(*m.pcs > 0);
    }
    if (cs_pos.empty()) {
        ReportRow row;
        row.name = "cs_vs_pcs";
        row.error = "NoOverlap";
        report.cs_vs_pcs = row;
    } else {
        auto matrix = confusion(cs_pos, pcs_pos, "cs_positive");
        matrix.reference = "cs";
        matrix.candidate = "pcs";
        report.cs_vs_pcs = make_row("cs_vs_pcs", matrix, correction);
    }
    report.published = published_comparisons();
    return report;
}

std::vector<ReportRow> published_comparisons() {
    struct Entry {
        const char* name;
        const char* reference;
        const char* candidate;
        std::uint64_t tp, tn, fn, fp;
        double printed;
        int decimals;
        const char* extra;
    };
    static const Entry entries[] = {
        {"is_racist", "manual", "sac", 18, 5021, 20, 2, 2259, 0, ""},
        {"has_bad_language", "manual", "sac", 342, 4557, 150, 11, 946, 0, ""},
        {"is_negative", "manual", "sac", 389, 4132, 494, 2, 1627, 0,
         "the printed working uses fp = 48; the ratio only follows from fp = 2"},
        {"noob_related", "manual", "sac", 46, 5011, 5, 1, 46101, 0, ""},
        {"cs_vs_pcs", "cs", "pcs", 654, 3987, 23, 399, 284, 0, ""},
        {"is_abusive", "manual", "twinword", 309, 1592, 127, 1279, 3, 0, ""},
        {"is_abusive", "manual", "azure", 156, 204, 33, 145, 6.6, 1, ""},
    };
    std::vector<ReportRow> rows;
    for (const auto& e : entries) {
        auto m = cells(e.tp, e.tn, e.fn, e.fp);
        m.attribute = e.name;
        m.reference = e.reference;
        m.candidate = e.candidate;
        auto row = make_row(std::string(e.candidate) + ":" + e.name, m);
        row.reference_dor = e.printed;
        const double scale = std::pow(10.0, e.decimals);
        // A printed ratio may be rounded or truncated.
        const double rounded = std::round(*row.dor * scale) / scale;
        const double truncated = std::trunc(*row.dor * scale) / scale;
        std::string note = e.extra;
        if (std::abs(rounded - e.printed) > 1e-9 && std::abs(truncated - e.printed) > 1e-9) {
            if (!note.empty()) note += "; ";
            note += "recomputed " + format_number(std::round(*row.dor * 100) / 100) + " differs from reference " +
                    format_number(e.printed);
        }
        row.note = note;
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

nlohmann::ordered_json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json row_json(const ReportRow& r) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    if (r.matrix) {
        j["reference"] = r.matrix->reference;
        j["candidate"] = r.matrix->candidate;
        j["tp"] = r.matrix->tp;
        j["tn"] = r.matrix->tn;
        j["fn"] = r.matrix->fn;
        j["fp"] = r.matrix->fp;
        j["excluded"] = r.matrix->excluded;
    }
    j["dor"] = optional_number(r.dor);
    j["f_score"] = optional_number(r.f_score);
    j["error"] = r.error.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.error);
    if (r.reference_dor) j["reference_dor"] = *r.reference_dor;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string{}; }

void csv_row(std::ostream& out, std::string_view section, const ReportRow& r) {
    out << section << ',' << csv_field(r.name) << ',';
    if (r.matrix)
        out << r.matrix->tp << ',' << r.matrix->tn << ',' << r.matrix->fn << ',' << r.matrix->fp << ','
            << r.matrix->excluded;
    else
        out << ",,,,";
    out << ',' << cell(r.dor) << ',' << cell(r.f_score) << ',' << r.error << ',' << cell(r.reference_dor) << ','
        << csv_field(r.note) << "\r\n";
}

}  // namespace

void write_report_json(const EvaluationReport& report, std::ostream& out) {
    nlohmann::ordered_json j;
    j["reference"] = report.reference;
    j["candidate"] = report.candidate;
    j["attributes"] = nlohmann::ordered_json::array();
    for (const auto& r : report.attributes) j["attributes"].push_back(row_json(r));
    j["cs_vs_pcs"] = report.cs_vs_pcs ? row_json(*report.cs_vs_pcs) : nlohmann::ordered_json(nullptr);
    j["published"] = nlohmann::ordered_json::array();
    for (const auto& r : report.published) j["published"].push_back(row_json(r));
    out << j.dump(2) << '\n';
}

void write_report_csv(const EvaluationReport& report, std::ostream& out) {
    out << "section,name,tp,tn,fn,fp,excluded,dor,f_score,error,reference_dor,note\r\n";
    for (const auto& r : report.attributes) csv_row(out, "attribute", r);
    if (report.cs_vs_pcs) csv_row(out, "score", *report.cs_vs_pcs);
    for (const auto& r : report.published) csv_row(out, "published", r);
}

}  // namespace wotchat::metrics
