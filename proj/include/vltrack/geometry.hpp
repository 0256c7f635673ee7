#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace vltrack {

// Slack on the x+w <= 1 / y+h <= 1 invariants so boxes survive
// float round trips through text.
inline constexpr double kEdgeTolerance = 1e-6;

// Axis-aligned box in normalized image coordinates: (x, y) is the top-left
// corner, (w, h) the size, all as fractions of the image dimensions.
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const { return w * h; }
    double right() const { return x + w; }
    double bottom() const { return y + h; }

    friend bool operator==(const BBox&, const BBox&) = default;
};

// Construction point for BBox: clamps a raw normalized box to the unit
// square. Boxes that end up empty (fully outside the frame or with
// non-positive size) yield nullopt.
inline std::optional<BBox> make_bbox(double x, double y, double w, double h) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(w) || !std::isfinite(h)) {
        return std::nullopt;
    }
    // Intersect with the unit square, touching w/h only when clipping
    // actually happens so in-frame boxes round-trip bit-exactly.
    if (x < 0.0) {
        w += x;
        x = 0.0;
    }
    if (y < 0.0) {
        h += y;
        y = 0.0;
    }
    if (x >= 1.0 || y >= 1.0) return std::nullopt;
    if (x + w > 1.0) w = 1.0 - x;
    if (y + h > 1.0) h = 1.0 - y;
    if (w <= 0.0 || h <= 0.0) return std::nullopt;
    return BBox{x, y, w, h};
}

struct PixelBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
};

struct ImageSize {
    int width = 0;
    int height = 0;

    friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

// Pixel -> normalized conversion. Rejects non-positive box or image sizes;
// boxes sticking out of the frame are clamped by make_bbox.
inline std::optional<BBox> normalize_bbox(const PixelBox& px, const ImageSize& size) {
    if (size.width <= 0 || size.height <= 0) return std::nullopt;
    if (!(px.w > 0.0) || !(px.h > 0.0)) return std::nullopt;
    return make_bbox(px.x / size.width, px.y / size.height,
                     px.w / size.width, px.h / size.height);
}

inline PixelBox denormalize_bbox(const BBox& b, const ImageSize& size) {
    return PixelBox{b.x * size.width, b.y * size.height,
                    b.w * size.width, b.h * size.height};
}

// Intersection-over-union. Total on valid boxes, symmetric, 0 for
// disjoint pairs.
inline double iou(const BBox& a, const BBox& b) {
    const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
    const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    // float noise can push inter past uni for identical boxes
    return std::clamp(inter / uni, 0.0, 1.0);
}

struct Detection {
    int frame_index = 0;
    std::optional<int> track_id;
    BBox bbox;
    std::string class_label = "pedestrian";
    std::optional<double> visibility;
};

}  // namespace vltrack
