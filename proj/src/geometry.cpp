#include "similo/geometry.hpp"

#include <algorithm>
#include <string>

#include "similo/error.hpp"

namespace similo {

Rect make_rect(std::int64_t x, std::int64_t y, std::int64_t width, std::int64_t height) {
  if (width < 0 || height < 0) {
    throw Error(ErrorCode::kMalformedValue,
                "negative rect size " + std::to_string(width) + "x" + std::to_string(height));
  }
  return Rect{x, y, width, height};
}

std::int64_t intersection_area(const Rect& a, const Rect& b) {
  const std::int64_t left = std::max(a.x, b.x);
  const std::int64_t top = std::max(a.y, b.y);
  const std::int64_t right = std::min(a.x + a.width, b.x + b.width);
  const std::int64_t bottom = std::min(a.y + a.height, b.y + b.height);
  if (right <= left || bottom <= top) return 0;
  return (right - left) * (bottom - top);
}

std::int64_t union_area(const Rect& a, const Rect& b) {
  return a.area() + b.area() - intersection_area(a, b);
}

double overlap_ratio(const Rect& a, const Rect& b) {
  const std::int64_t total = union_area(a, b);
  if (total == 0) return 0.0;
  return static_cast<double>(intersection_area(a, b)) / static_cast<double>(total);
}

bool center_contained(const Rect& outer, const Rect& inner) {
  const double cx = inner.center_x();
  const double cy = inner.center_y();
  return cx >= static_cast<double>(outer.x) && cx <= static_cast<double>(outer.x + outer.width) &&
         cy >= static_cast<double>(outer.y) && cy <= static_cast<double>(outer.y + outer.height);
}

}  // namespace similo
