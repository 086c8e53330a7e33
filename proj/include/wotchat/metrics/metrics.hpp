#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wotchat/labels.hpp"

namespace wotchat::store {
class Store;
}

namespace wotchat::metrics {

class NoOverlap : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ZeroDenominator : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class UndefinedScore : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct ConfusionMatrix {
    std::string attribute;
    std::string reference = "manual";
    std::string candidate;
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;
    std::uint64_t fp = 0;
    std::uint64_t excluded = 0;  // pairs where either side is unknown

    std::uint64_t compared() const { return tp + tn + fn + fp; }
};

ConfusionMatrix cells(std::uint64_t tp, std::uint64_t tn, std::uint64_t fn, std::uint64_t fp);

// Pairs with an unknown on either side are skipped and counted in `excluded`.
// Throws NoOverlap when nothing is comparable.
ConfusionMatrix confusion(std::span<const Tri> reference, std::span<const Tri> candidate, std::string attribute = {});

enum class Correction { none, haldane };

// (tp * tn) / (fn * fp). Haldane adds 0.5 to every cell first.
double dor(const ConfusionMatrix& m, Correction correction = Correction::none);

// 2tp / (2tp + fp + fn)
double f_score(const ConfusionMatrix& m);

struct ReportRow {
    std::string name;
    std::optional<ConfusionMatrix> matrix;
    std::optional<double> dor;
    std::optional<double> f_score;
    std::string error;  // NoOverlap, ZeroDenominator, ...
    std::optional<double> reference_dor;
    std::string note;
};

// Fills dor/f_score/error for a matrix.
ReportRow make_row(std::string name, const ConfusionMatrix& m, Correction correction = Correction::none);

struct EvaluationReport {
    std::string reference = "manual";
    std::string candidate;
    std::vector<ReportRow> attributes;
    std::optional<ReportRow> cs_vs_pcs;  // CS > 0 against PCS > 0
    std::vector<ReportRow> published;
};

// Manual labels against automatic labels for all eight attributes, plus the
// binary CS/PCS comparison over scored messages.
EvaluationReport evaluation_report(const store::Store& store, Correction correction = Correction::none);

// Cell counts of the reference comparisons with their printed ratios.
std::vector<ReportRow> published_comparisons();

void write_report_json(const EvaluationReport& report, std::ostream& out);
void write_report_csv(const EvaluationReport& report, std::ostream& out);

}  // namespace wotchat::metrics
