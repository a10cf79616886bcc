#pragma once

#include <cstdint>

namespace similo {

// Axis-aligned element rectangle in CSS pixels. The covered pixel set is
// [x, x + width) x [y, y + height).
struct Rect {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t width = 0;
  std::int64_t height = 0;

  std::int64_t area() const { return width * height; }
  double center_x() const { return static_cast<double>(x) + static_cast<double>(width) / 2.0; }
  double center_y() const { return static_cast<double>(y) + static_cast<double>(height) / 2.0; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

// Throws Error(kMalformedValue) on negative width/height.
Rect make_rect(std::int64_t x, std::int64_t y, std::int64_t width, std::int64_t height);

std::int64_t intersection_area(const Rect& a, const Rect& b);
std::int64_t union_area(const Rect& a, const Rect& b);

// Intersection over union. 0 when the union is empty.
double overlap_ratio(const Rect& a, const Rect& b);

// True iff the center of `inner` lies inside `outer`, edges inclusive.
bool center_contained(const Rect& outer, const Rect& inner);

}  // namespace similo
