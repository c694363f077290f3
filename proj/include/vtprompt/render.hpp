// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "vtprompt/detection.hpp"
#include "vtprompt/image.hpp"

namespace vtp {

/// Which marker kinds to composite. Presets a-e cover the supported
/// ablation grid; type_e is the box+mask combination rendered with half
/// the mask opacity.
struct VPromptStyle {
    bool number = false;
    bool box = false;
    bool mask = false;
    double mask_alpha_scale = 1.0;
    std::string name = "custom";

    static VPromptStyle type_a();  // number + box
    static VPromptStyle type_b();  // box + mask
    static VPromptStyle type_c();  // number + box + mask
    static VPromptStyle type_d();  // mask only
    static VPromptStyle type_e();  // box + faint mask
    static VPromptStyle from_name(std::string_view name);
};

struct RenderConfig {
    std::vector<Rgb> palette;           // >= 8 entries
    double stroke_coeff = 0.004;        // stroke = max(min_stroke, round(coeff * max(w,h)))
    int min_stroke = 2;
    double mask_alpha = 0.4;
    double label_height_frac = 0.02;    // digit height as a fraction of image height

    static RenderConfig defaults();
    int stroke_for(int width, int height) const;
    int label_scale_for(int height) const;
    std::string content_hash() const;
};

struct AnnotatedImage {
    std::string image_id;
    Image pixels;
    VPromptStyle style;
    std::string detections_hash;  // provenance, recomputable from inputs
    std::string config_hash;
};

enum class RenderExecution { Serial, Parallel };

/// Composite markers onto a copy of the source image. Pure: identical
/// inputs give bit-identical pixels, and Serial and Parallel execution
/// produce the same bytes (integer arithmetic only; each row is
/// independent). Draw order per pixel: masks, then boxes, then numbers,
/// each pass in detection order.
AnnotatedImage render_vprompt(const Image& source, const DetectionSet& detections,
                              const VPromptStyle& style, const RenderConfig& cfg,
                              RenderExecution exec = RenderExecution::Parallel);

/// Intersect a box with the image rectangle. Empty intersection raises
/// DegenerateBox.
Box clamp_box(const Box& box, int width, int height);

/// color_i = palette[i mod palette.size()]
std::vector<Rgb> assign_colors(size_t n, const std::vector<Rgb>& palette);

/// Conservative cover of every pixel a render may touch, as pixel rects
/// (x0,y0)..(x1,y1) exclusive. Exposed for no-spill verification.
struct PixelRect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};
std::vector<PixelRect> marker_coverage(const Image& source, const DetectionSet& detections,
                                       const VPromptStyle& style, const RenderConfig& cfg);

} // namespace vtp
