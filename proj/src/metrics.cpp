#include "sd/metrics.hpp"

#include <cmath>
#include <numeric>

#include "sd/error.hpp"

namespace sd {

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

ConfusionMatrix ConfusionMatrix::transposed() const {
    ConfusionMatrix t(c_);
    for (std::size_t i = 0; i < c_; ++i)
        for (std::size_t j = 0; j < c_; ++j) t.at(j, i) = at(i, j);
    return t;
}

void ConfusionMatrix::merge(const ConfusionMatrix& o) {
    if (o.c_ != c_) throw ShapeError("cannot merge confusion matrices of different class counts");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
}

ConfusionMatrix::Marginals ConfusionMatrix::marginals(std::size_t k) const {
    std::uint64_t row = 0, col = 0;
    for (std::size_t j = 0; j < c_; ++j) {
        row += at(k, j);
        col += at(j, k);
    }
    const std::uint64_t tp = at(k, k);
    const std::uint64_t fn = row - tp;
    const std::uint64_t fp = col - tp;
    const std::uint64_t tn = total() - tp - fn - fp;
    return {static_cast<double>(tp), static_cast<double>(fp), static_cast<double>(fn), static_cast<double>(tn)};
}

ConfusionMatrix confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> ref, std::size_t classes,
                          std::span<const std::uint8_t> valid) {
    if (pred.size() != ref.size()) throw ShapeError("prediction and reference sizes differ");
    if (!valid.empty() && valid.size() != ref.size()) throw ShapeError("valid mask size differs from masks");
    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (!valid.empty() && !valid[i]) continue;
        if (ref[i] >= classes || pred[i] >= classes)
            throw DomainError("class code " + std::to_string(std::max(ref[i], pred[i])) + " out of range");
        ++cm.at(ref[i], pred[i]);
    }
    return cm;
}

ConfusionMatrix confusion(const GeoGrid& pred, const GeoGrid& ref, std::size_t classes,
                          const std::vector<std::uint8_t>* valid) {
    if (pred.channels() != 1 || ref.channels() != 1) throw ShapeError("class masks must have one channel");
    if (pred.width() != ref.width() || pred.height() != ref.height()) throw ShapeError("mask shapes differ");
    const std::size_t n = ref.spec().pixel_count();
    std::vector<std::uint8_t> p(n), r(n), v;
    for (std::size_t i = 0; i < n; ++i) {
        const float pv = pred.values()[i], rv = ref.values()[i];
        if (!(pv >= 0.0f && pv < 256.0f) || !(rv >= 0.0f && rv < 256.0f))
            throw DomainError("class code outside the byte range");
        p[i] = static_cast<std::uint8_t>(pv);
        r[i] = static_cast<std::uint8_t>(rv);
    }
    if (valid) {
        if (valid->size() != n) throw ShapeError("valid mask size differs from masks");
        v = *valid;
    } else if (pred.has_nodata() || ref.has_nodata()) {
        v.assign(n, 1);
    }
    if (!v.empty()) {
        for (std::uint32_t row = 0; row < ref.height(); ++row)
            for (std::uint32_t col = 0; col < ref.width(); ++col)
                if (pred.is_nodata(row, col) || ref.is_nodata(row, col)) v[static_cast<std::size_t>(row) * ref.width() + col] = 0;
    }
    return confusion(p, r, classes, v);
}

namespace {

void require_nonempty(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw UndefinedMetricError("metric undefined for an empty confusion matrix");
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double class_mcc(const ConfusionMatrix::Marginals& m) {
    const double den = (m.tp + m.fp) * (m.tp + m.fn) * (m.tn + m.fp) * (m.tn + m.fn);
    if (den <= 0.0) return 0.0;
    return (m.tp * m.tn - m.fp * m.fn) / std::sqrt(den);
}

ClassScores class_scores(const ConfusionMatrix::Marginals& m) {
    ClassScores s;
    s.mcc = class_mcc(m);
    s.iou = ratio(m.tp, m.tp + m.fp + m.fn);
    s.f1 = ratio(2.0 * m.tp, 2.0 * m.tp + m.fp + m.fn);
    s.ua = ratio(m.tp, m.tp + m.fp);
    s.pa = ratio(m.tp, m.tp + m.fn);
    return s;
}

} // namespace

double overall_accuracy(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    std::uint64_t trace = 0;
    for (std::size_t k = 0; k < cm.classes(); ++k) trace += cm.at(k, k);
    return static_cast<double>(trace) / static_cast<double>(cm.total());
}

double macro_mcc(const ConfusionMatrix& cm) {
    require_nonempty(cm);
    double sum = 0.0;
    for (std::size_t k = 0; k < cm.classes(); ++k) sum += class_mcc(cm.marginals(k));
    return sum / static_cast<double>(cm.classes());
}

double macro_metric(const ConfusionMatrix& cm, MacroMetric which) {
    require_nonempty(cm);
    double sum = 0.0;
    for (std::size_t k = 0; k < cm.classes(); ++k) {
        const ClassScores s = class_scores(cm.marginals(k));
        switch (which) {
        case MacroMetric::IoU: sum += s.iou; break;
        case MacroMetric::F1: sum += s.f1; break;
        case MacroMetric::UA: sum += s.ua; break;
        case MacroMetric::PA: sum += s.pa; break;
        }
    }
    return sum / static_cast<double>(cm.classes());
}

MetricReport make_report(const ConfusionMatrix& cm, std::string reference, std::string prediction) {
    MetricReport r;
    r.cm = cm;
    r.reference = std::move(reference);
    r.prediction = std::move(prediction);
    r.oa = overall_accuracy(cm);
    r.mmcc = macro_mcc(cm);
    r.miou = macro_metric(cm, MacroMetric::IoU);
    r.mf1 = macro_metric(cm, MacroMetric::F1);
    r.mua = macro_metric(cm, MacroMetric::UA);
    r.mpa = macro_metric(cm, MacroMetric::PA);
    for (std::size_t k = 0; k < cm.classes(); ++k) r.per_class.push_back(class_scores(cm.marginals(k)));
    return r;
}

MetricReport average_reports(const std::vector<MetricReport>& reports, std::string reference, std::string prediction) {
    if (reports.empty()) throw ArgumentError("no reports to average");
    const std::size_t c = reports.front().cm.classes();
    MetricReport r;
    r.cm = ConfusionMatrix(c);
    r.reference = std::move(reference);
    r.prediction = std::move(prediction);
    r.per_class.assign(c, ClassScores{});
    for (const MetricReport& x : reports) {
        if (x.cm.classes() != c || x.per_class.size() != c) throw ArgumentError("reports differ in class count");
        r.cm.merge(x.cm);
        r.oa += x.oa;
        r.mmcc += x.mmcc;
        r.miou += x.miou;
        r.mf1 += x.mf1;
        r.mua += x.mua;
        r.mpa += x.mpa;
        for (std::size_t k = 0; k < c; ++k) {
            r.per_class[k].mcc += x.per_class[k].mcc;
            r.per_class[k].iou += x.per_class[k].iou;
            r.per_class[k].f1 += x.per_class[k].f1;
            r.per_class[k].ua += x.per_class[k].ua;
            r.per_class[k].pa += x.per_class[k].pa;
        }
    }
    const double n = static_cast<double>(reports.size());
    for (double* v : {&r.oa, &r.mmcc, &r.miou, &r.mf1, &r.mua, &r.mpa}) *v /= n;
    for (auto& k : r.per_class)
        for (double* v : {&k.mcc, &k.iou, &k.f1, &k.ua, &k.pa}) *v /= n;
    return r;
}

MetricReport agreement(const GeoGrid& pred_a, const GeoGrid& pred_b, const std::vector<std::uint8_t>* valid,
                       std::string name_a, std::string name_b, std::size_t classes) {
    return make_report(confusion(pred_b, pred_a, classes, valid), std::move(name_a), std::move(name_b));
}

} // namespace sd
