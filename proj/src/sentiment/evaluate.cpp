#include "wotchat/sentiment/sentiment.hpp"
#include "wotchat/store/store.hpp"

namespace wotchat::sentiment {

SentimentEvaluation evaluate_sentiment(const store::Store& st, SentimentService& service) {
    SentimentEvaluation eval;
    std::vector<Tri> reference, candidate;
    for (const auto& m : st.messages()) {
        const Tri abusive = m.manual_labels[Attribute::is_abusive];
        if (!abusive) {
            ++eval.unlabeled;
            continue;
        }
        auto r = service.analyze(m.text);
        if (r.polarity == Polarity::neutral) {
            ++eval.neutral;
            continue;
        }
        reference.push_back(abusive);
        candidate.push_back(r.polarity == Polarity::negative);
    }
    eval.matrix = metrics::confusion(reference, candidate, "is_abusive");
    eval.matrix.candidate = "sentiment";
    return eval;
}

}  // namespace wotchat::sentiment
