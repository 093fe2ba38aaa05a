#include "saad/metrics.hpp"

#include <string>

#include "saad/errors.hpp"

namespace saad {

ConfusionMatrix confusion(std::span<const int> pred, std::span<const int> truth) {
    if (pred.size() != truth.size())
        throw ValidationError("confusion: predictions (" + std::to_string(pred.size()) +
                              ") and truth (" + std::to_string(truth.size()) +
                              ") differ in length");
    if (pred.empty()) throw ValidationError("confusion: empty input");

    ConfusionMatrix cm;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == 1)
            truth[i] == 1 ? ++cm.tp : ++cm.fp;
        else
            truth[i] == 1 ? ++cm.fn : ++cm.tn;
    }
    return cm;
}

std::optional<double> f_beta(const ConfusionMatrix& cm, double beta) {
    if (!(beta > 0.0)) throw ValidationError("f_beta: beta must be positive");
    if (cm.tp + cm.fp == 0 || cm.tp + cm.fn == 0) return std::nullopt;

    const double p = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    const double r = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    const double b2 = beta * beta;
    if (b2 * p + r == 0.0) return std::nullopt;
    return (1.0 + b2) * p * r / (b2 * p + r);
}

MetricsReport report(std::span<const int> pred, std::span<const int> truth) {
    MetricsReport rep;
    rep.counts = confusion(pred, truth);
    rep.accuracy = static_cast<double>(rep.counts.tp + rep.counts.tn) /
                   static_cast<double>(rep.counts.total());
    if (rep.counts.tp + rep.counts.fp > 0)
        rep.precision = static_cast<double>(rep.counts.tp) /
                        static_cast<double>(rep.counts.tp + rep.counts.fp);
    if (rep.counts.tp + rep.counts.fn > 0)
        rep.recall = static_cast<double>(rep.counts.tp) /
                     static_cast<double>(rep.counts.tp + rep.counts.fn);
    rep.f1 = f_beta(rep.counts, 1.0);
    return rep;
}

} // namespace saad
