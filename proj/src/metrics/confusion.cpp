#include "wotchat/metrics/metrics.hpp"

namespace wotchat::metrics {

ConfusionMatrix cells(std::uint64_t tp, std::uint64_t tn, std::uint64_t fn, std::uint64_t fp) {
    ConfusionMatrix m;
    m.tp = tp;
    m.tn = tn;
    m.fn = fn;
    m.fp = fp;
    return m;
}

ConfusionMatrix confusion(std::span<const Tri> reference, std::span<const Tri> candidate, std::string attribute) {
    if (reference.size() != candidate.size()) throw std::invalid_argument("label lists differ in length");
    ConfusionMatrix m;
    m.attribute = std::move(attribute);
    for (std::size_t i = 0; i < reference.size(); ++i) {
        if (!reference[i] || !candidate[i]) {
            ++m.excluded;
            continue;
        }
        const bool r = *reference[i], c = *candidate[i];
        if (r && c) ++m.tp;
        else if (!r && !c) ++m.tn;
        else if (r) ++m.fn;
        else ++m.fp;
    }
    if (m.compared() == 0)
        throw NoOverlap("no comparable labels" + (m.attribute.empty() ? std::string{} : " for " + m.attribute));
    return m;
}

double dor(const ConfusionMatrix& m, Correction correction) {
    double tp = static_cast<double>(m.tp), tn = static_cast<double>(m.tn);
    double fn = static_cast<double>(m.fn), fp = static_cast<double>(m.fp);
    if (correction == Correction::haldane) {
        tp += 0.5;
        tn += 0.5;
        fn += 0.5;
        fp += 0.5;
    } else if (m.fn == 0 || m.fp == 0) {
        throw ZeroDenominator("diagnostic odds ratio undefined: fn * fp = 0");
    }
    return (tp * tn) / (fn * fp);
}

double f_score(const ConfusionMatrix& m) {
    const std::uint64_t denom = 2 * m.tp + m.fp + m.fn;
    if (denom == 0) throw UndefinedScore("F-score undefined: no positives on either side");
    return 2.0 * static_cast<double>(m.tp) / static_cast<double>(denom);
}

}  // namespace wotchat::metrics
