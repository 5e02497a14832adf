#pragma once

#include "dskde/extract.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace dskde {

enum class Label
{
  vacant,
  safe,
  unsafe
};

std::string_view to_string(Label l);
Label parse_label(std::string_view s);

//! Ground truth for one frame. A box is present iff the label is not vacant.
struct Annotation
{
  std::string frame_id;
  Label label = Label::vacant;
  std::optional<BBox> box;

  void validate() const;
};

struct Detection
{
  std::string frame_id;
  std::optional<BBox> box;
  double seconds = 0.0;
};

//! Pixel-count intersection over union of two half-open boxes.
double iou(const BBox& a, const BBox& b);

//! Frame-level F1 = 2 TP / (2 TP + FP + FN). A frame is positive when a box
//! is detected. Frames are matched by id; the id sets must agree. Returns 0
//! when there are no positives at all.
double f1(std::span<const Detection> detections, std::span<const Annotation> annotations);

struct EvalReport
{
  double f1 = 0.0;
  //! IoU statistics over frames where both a detection and a ground-truth
  //! box exist; 0 when there are none.
  double mean_iou = 0.0;
  double median_iou = 0.0;
  double mean_seconds = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  std::size_t iou_frames = 0;
};

EvalReport evaluate(std::span<const Detection> detections, std::span<const Annotation> annotations);

} // namespace dskde
