#include "dskde/eval.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

namespace dskde {

std::string_view to_string(Label l)
{
  switch (l) {
    case Label::vacant:
      return "vacant";
    case Label::safe:
      return "safe";
    case Label::unsafe:
      return "unsafe";
  }
  return "?";
}

Label parse_label(std::string_view s)
{
  if (s == "vacant")
    return Label::vacant;
  if (s == "safe")
    return Label::safe;
  if (s == "unsafe")
    return Label::unsafe;
  throw std::invalid_argument("unknown label '" + std::string(s) + "'");
}

void Annotation::validate() const
{
  if ((label == Label::vacant) == box.has_value())
    throw std::invalid_argument("annotation '" + frame_id + "': a box is required iff the label is not vacant");
  if (box && !box->valid())
    throw std::invalid_argument("annotation '" + frame_id + "': empty box");
}

double iou(const BBox& a, const BBox& b)
{
  const std::size_t r0 = std::max(a.r0, b.r0);
  const std::size_t r1 = std::min(a.r1, b.r1);
  const std::size_t c0 = std::max(a.c0, b.c0);
  const std::size_t c1 = std::min(a.c1, b.c1);
  const std::size_t inter = (r0 < r1 && c0 < c1) ? (r1 - r0) * (c1 - c0) : 0;
  const std::size_t uni = a.area() + b.area() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

struct Pair
{
  const Detection* det;
  const Annotation* ann;
};

std::vector<Pair> align(std::span<const Detection> detections, std::span<const Annotation> annotations)
{
  std::map<std::string_view, const Annotation*> by_id;
  for (const auto& a : annotations) {
    a.validate();
    if (!by_id.emplace(a.frame_id, &a).second)
      throw std::invalid_argument("duplicate annotation for frame '" + a.frame_id + "'");
  }
  if (detections.size() != annotations.size())
    throw std::invalid_argument("mismatched frame ids: " + std::to_string(detections.size()) +
                                " detections vs " + std::to_string(annotations.size()) + " annotations");
  std::vector<Pair> pairs;
  std::map<std::string_view, bool> seen;
  for (const auto& d : detections) {
    auto it = by_id.find(d.frame_id);
    if (it == by_id.end())
      throw std::invalid_argument("mismatched frame ids: no annotation for '" + d.frame_id + "'");
    if (seen[d.frame_id])
      throw std::invalid_argument("duplicate detection for frame '" + d.frame_id + "'");
    seen[d.frame_id] = true;
    pairs.push_back({ &d, it->second });
  }
  return pairs;
}

} // namespace

EvalReport evaluate(std::span<const Detection> detections, std::span<const Annotation> annotations)
{
  if (detections.empty() && annotations.empty())
    throw std::invalid_argument("evaluate: empty evaluation set");
  const auto pairs = align(detections, annotations);

  EvalReport rep;
  std::vector<double> ious;
  double seconds = 0.0;
  for (const auto& [det, ann] : pairs) {
    seconds += det->seconds;
    const bool predicted = det->box.has_value();
    const bool actual = ann->box.has_value();
    if (predicted && actual) {
      ++rep.tp;
      ious.push_back(iou(*det->box, *ann->box));
    } else if (predicted) {
      ++rep.fp;
    } else if (actual) {
      ++rep.fn;
    } else {
      ++rep.tn;
    }
  }
  const std::size_t denom = 2 * rep.tp + rep.fp + rep.fn;
  rep.f1 = denom == 0 ? 0.0 : 2.0 * static_cast<double>(rep.tp) / static_cast<double>(denom);
  rep.mean_seconds = seconds / static_cast<double>(pairs.size());
  rep.iou_frames = ious.size();
  if (!ious.empty()) {
    double s = 0.0;
    for (double v : ious)
      s += v;
    rep.mean_iou = s / static_cast<double>(ious.size());
    std::sort(ious.begin(), ious.end());
    const std::size_t k = ious.size() / 2;
    rep.median_iou = ious.size() % 2 ? ious[k] : 0.5 * (ious[k - 1] + ious[k]);
  }
  return rep;
}

double f1(std::span<const Detection> detections, std::span<const Annotation> annotations)
{
  return evaluate(detections, annotations).f1;
}

} // namespace dskde
