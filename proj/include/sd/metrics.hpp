#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sd/grid.hpp"

namespace sd {

/// counts[ref][pred] over evaluated pixels.
class ConfusionMatrix {
  public:
    explicit ConfusionMatrix(std::size_t classes = 5) : c_(classes), counts_(classes * classes, 0) {}

    std::size_t classes() const { return c_; }
    std::uint64_t at(std::size_t ref, std::size_t pred) const { return counts_[ref * c_ + pred]; }
    std::uint64_t& at(std::size_t ref, std::size_t pred) { return counts_[ref * c_ + pred]; }
    std::uint64_t total() const;
    ConfusionMatrix transposed() const;
    void merge(const ConfusionMatrix& o);

    /// One-vs-rest marginals for class k.
    struct Marginals {
        double tp, fp, fn, tn;
    };
    Marginals marginals(std::size_t k) const;

    bool operator==(const ConfusionMatrix&) const = default;

  private:
    std::size_t c_;
    std::vector<std::uint64_t> counts_;
};

/// Optional `valid` selects evaluated pixels (non-zero = evaluated).
ConfusionMatrix confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> ref, std::size_t classes,
                          std::span<const std::uint8_t> valid = {});
ConfusionMatrix confusion(const GeoGrid& pred, const GeoGrid& ref, std::size_t classes,
                          const std::vector<std::uint8_t>* valid = nullptr);

double overall_accuracy(const ConfusionMatrix& cm);
double macro_mcc(const ConfusionMatrix& cm);

enum class MacroMetric { IoU, F1, UA, PA };
double macro_metric(const ConfusionMatrix& cm, MacroMetric which);

struct ClassScores {
    double mcc = 0, iou = 0, f1 = 0, ua = 0, pa = 0;
};

struct MetricReport {
    double oa = 0, mmcc = 0, miou = 0, mf1 = 0, mua = 0, mpa = 0;
    std::vector<ClassScores> per_class;
    std::string reference;
    std::string prediction;
    ConfusionMatrix cm;
};

MetricReport make_report(const ConfusionMatrix& cm, std::string reference = "reference",
                         std::string prediction = "prediction");

/// Unweighted mean of the scalar and per-class metrics of several reports
/// (per-tile averaging); the confusion matrix is the pooled sum.
MetricReport average_reports(const std::vector<MetricReport>& reports, std::string reference = "reference",
                             std::string prediction = "prediction");

/// Metrics of pred_b evaluated against pred_a as the reference.
MetricReport agreement(const GeoGrid& pred_a, const GeoGrid& pred_b, const std::vector<std::uint8_t>* valid = nullptr,
                       std::string name_a = "a", std::string name_b = "b", std::size_t classes = 5);

} // namespace sd
