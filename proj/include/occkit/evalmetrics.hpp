#pragma once

#include "occkit/grid.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>

namespace occkit {

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SemanticIou {
    double iou = 0.0;                       // occupied vs occupied
    std::map<SemanticId, double> per_class;  // classes present in pred or gt
    double miou = 0.0;                      // mean over classes present in gt
};

namespace detail {

inline void require_same_spec(const PanopticGrid& pred, const PanopticGrid& gt) {
    if (!pred.spec().compatible(gt.spec())) throw EvalError("prediction and ground truth grids differ in spec");
}

}  // namespace detail

// Free space is not a category and never enters any count. An empty pair of
// grids scores 1.0 (nothing to get wrong).
inline SemanticIou semantic_iou(const PanopticGrid& pred, const PanopticGrid& gt) {
    detail::require_same_spec(pred, gt);
    std::uint64_t inter = 0, uni = 0;
    struct Counts { std::uint64_t tp = 0, pred = 0, gt = 0; };
    std::map<SemanticId, Counts> classes;
    for (LinearIndex i = 0; i < gt.size(); ++i) {
        const SemanticId p = pred[i].semantic, g = gt[i].semantic;
        const bool po = p != kFreeSpace, go = g != kFreeSpace;
        inter += po && go;
        uni += po || go;
        if (po) ++classes[p].pred;
        if (go) ++classes[g].gt;
        if (go && p == g) ++classes[g].tp;
    }
    SemanticIou out;
    out.iou = uni == 0 ? 1.0 : double(inter) / double(uni);
    double sum = 0.0;
    std::size_t gt_classes = 0;
    for (const auto& [c, n] : classes) {
        const double v = double(n.tp) / double(n.pred + n.gt - n.tp);
        out.per_class[c] = v;
        if (n.gt > 0) {
            sum += v;
            ++gt_classes;
        }
    }
    if (gt_classes > 0)
        out.miou = sum / double(gt_classes);
    else
        out.miou = classes.empty() ? 1.0 : 0.0;
    return out;
}

struct PanopticClassStats {
    std::uint64_t tp = 0, fp = 0, fn = 0;
    double iou_sum = 0.0;
    double pq = 0.0, sq = 0.0, rq = 0.0;
};

struct EvalReport {
    double iou = 0.0;
    double miou = 0.0;
    double pq = 0.0, sq = 0.0, rq = 0.0;  // means over evaluated classes
    std::map<SemanticId, double> class_iou;
    std::map<SemanticId, PanopticClassStats> classes;
};

// Segment key: (semantic, instance); instance 0 is the class's stuff
// segment. Segments of the same class match when IoU > 0.5, which makes the
// matching unique without an assignment search.
inline EvalReport panoptic_quality(const PanopticGrid& pred, const PanopticGrid& gt) {
    detail::require_same_spec(pred, gt);
    using Key = std::pair<SemanticId, InstanceId>;
    std::map<Key, std::uint64_t> pred_area, gt_area;
    std::map<std::pair<Key, Key>, std::uint64_t> overlap;
    for (LinearIndex i = 0; i < gt.size(); ++i) {
        const PanopticLabel p = pred[i], g = gt[i];
        const Key pk{p.semantic, p.instance}, gk{g.semantic, g.instance};
        if (!p.free()) ++pred_area[pk];
        if (!g.free()) ++gt_area[gk];
        if (!p.free() && !g.free() && p.semantic == g.semantic) ++overlap[{pk, gk}];
    }

    EvalReport report;
    std::map<Key, bool> pred_matched, gt_matched;
    for (const auto& [pair, inter] : overlap) {
        const auto& [pk, gk] = pair;
        const double iou = double(inter) / double(pred_area[pk] + gt_area[gk] - inter);
        if (iou <= 0.5) continue;
        auto& stats = report.classes[gk.first];
        ++stats.tp;
        stats.iou_sum += iou;
        pred_matched[pk] = true;
        gt_matched[gk] = true;
    }
    for (const auto& [k, area] : pred_area)
        if (!pred_matched.count(k)) ++report.classes[k.first].fp;
    for (const auto& [k, area] : gt_area)
        if (!gt_matched.count(k)) ++report.classes[k.first].fn;

    double pq = 0.0, sq = 0.0, rq = 0.0;
    for (auto& [c, s] : report.classes) {
        if (s.tp > 0) {
            s.sq = s.iou_sum / double(s.tp);
            s.rq = double(s.tp) / (double(s.tp) + 0.5 * double(s.fp) + 0.5 * double(s.fn));
            s.pq = s.sq * s.rq;
        }
        pq += s.pq;
        sq += s.sq;
        rq += s.rq;
    }
    if (!report.classes.empty()) {
        const double n = double(report.classes.size());
        report.pq = pq / n;
        report.sq = sq / n;
        report.rq = rq / n;
    } else {
        report.pq = report.sq = report.rq = 1.0;
    }

    const SemanticIou sem = semantic_iou(pred, gt);
    report.iou = sem.iou;
    report.miou = sem.miou;
    report.class_iou = sem.per_class;
    return report;
}

}  // namespace occkit
