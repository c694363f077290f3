// SPDX-License-Identifier: Apache-2.0
//
// Marker compositing. The plan below is evaluated row by row with integer
// arithmetic only, so the serial path and the OpenMP path are bit-exact
// equals; tests hold them to that.

#include "vtprompt/render.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "vtprompt/error.hpp"
#include "vtprompt/font5x7.hpp"
#include "vtprompt/hash.hpp"

namespace vtp {

VPromptStyle VPromptStyle::type_a() { return {true, true, false, 1.0, "type_a"}; }
VPromptStyle VPromptStyle::type_b() { return {false, true, true, 1.0, "type_b"}; }
VPromptStyle VPromptStyle::type_c() { return {true, true, true, 1.0, "type_c"}; }
VPromptStyle VPromptStyle::type_d() { return {false, false, true, 1.0, "type_d"}; }
VPromptStyle VPromptStyle::type_e() { return {false, true, true, 0.5, "type_e"}; }

VPromptStyle VPromptStyle::from_name(std::string_view name) {
    if (name == "type_a") return type_a();
    if (name == "type_b") return type_b();
    if (name == "type_c") return type_c();
    if (name == "type_d") return type_d();
    if (name == "type_e") return type_e();
    fail(Errc::ConfigInvalid, "unknown visual prompt style '" + std::string(name) + "'");
}

RenderConfig RenderConfig::defaults() {
    RenderConfig cfg;
    cfg.palette = {
        {230, 57, 70},    // red
        {42, 157, 143},   // teal
        {69, 123, 157},   // steel blue
        {244, 162, 97},   // orange
        {147, 87, 159},   // purple
        {233, 196, 106},  // amber
        {46, 196, 182},   // turquoise
        {231, 111, 81},   // coral
        {87, 117, 144},   // slate
        {128, 185, 24},   // green
    };
    return cfg;
}

int RenderConfig::stroke_for(int width, int height) const {
    int by_size = int(std::lround(stroke_coeff * std::max(width, height)));
    return std::max(min_stroke, by_size);
}

int RenderConfig::label_scale_for(int height) const {
    int scale = int(std::lround(label_height_frac * height / double(kGlyphHeight)));
    return std::max(1, scale);
}

std::string RenderConfig::content_hash() const {
    nlohmann::json j{{"stroke_coeff", stroke_coeff},
                     {"min_stroke", min_stroke},
                     {"mask_alpha", mask_alpha},
                     {"label_height_frac", label_height_frac}};
    nlohmann::json pal = nlohmann::json::array();
    for (const auto& c : palette) pal.push_back({c.r, c.g, c.b});
    j["palette"] = std::move(pal);
    return sha256_hex(j.dump());
}

Box clamp_box(const Box& box, int width, int height) {
    Box out;
    out.x_min = std::clamp(box.x_min, 0.0, double(width));
    out.x_max = std::clamp(box.x_max, 0.0, double(width));
    out.y_min = std::clamp(box.y_min, 0.0, double(height));
    out.y_max = std::clamp(box.y_max, 0.0, double(height));
    if (out.x_min >= out.x_max || out.y_min >= out.y_max)
        fail(Errc::DegenerateBox, "box does not intersect the image");
    return out;
}

std::vector<Rgb> assign_colors(size_t n, const std::vector<Rgb>& palette) {
    std::vector<Rgb> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) out.push_back(palette[i % palette.size()]);
    return out;
}

namespace {

struct IntRect {
    int x0, y0, x1, y1;  // half-open
    bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
    bool empty() const { return x0 >= x1 || y0 >= y1; }
};

IntRect to_int_rect(const Box& b, int w, int h) {
    IntRect r{int(std::floor(b.x_min)), int(std::floor(b.y_min)), int(std::ceil(b.x_max)),
              int(std::ceil(b.y_max))};
    r.x0 = std::clamp(r.x0, 0, w);
    r.x1 = std::clamp(r.x1, 0, w);
    r.y0 = std::clamp(r.y0, 0, h);
    r.y1 = std::clamp(r.y1, 0, h);
    return r;
}

struct MaskOp {
    std::vector<uint8_t> bitmap;  // image-sized, 0/1
    Rgb color;
    uint8_t alpha;
};

struct StrokeOp {
    IntRect outer;
    IntRect inner;  // band = outer minus inner
    Rgb color;
};

struct LabelOp {
    IntRect chip;
    Rgb chip_color;
    std::string digits;
    int scale;
    int pad;
};

struct RenderPlan {
    int width = 0, height = 0;
    std::vector<MaskOp> masks;
    std::vector<StrokeOp> strokes;
    std::vector<LabelOp> labels;
};

inline void blend_pixel(uint8_t* px, Rgb color, uint8_t alpha) {
    unsigned a = alpha, ia = 255 - a;
    px[0] = uint8_t((px[0] * ia + color.r * a + 127) / 255);
    px[1] = uint8_t((px[1] * ia + color.g * a + 127) / 255);
    px[2] = uint8_t((px[2] * ia + color.b * a + 127) / 255);
}

inline void set_pixel(uint8_t* px, Rgb color) {
    px[0] = color.r;
    px[1] = color.g;
    px[2] = color.b;
    px[3] = 255;
}

// Every op applied to one row, in plan order. Row independence is what
// makes the parallel path exact.
void apply_row(Image& img, const RenderPlan& plan, int y) {
    const int w = plan.width;
    for (const auto& op : plan.masks) {
        const uint8_t* mrow = op.bitmap.data() + size_t(y) * w;
        uint8_t* prow = img.pixels.data() + size_t(y) * w * 4;
        for (int x = 0; x < w; ++x)
            if (mrow[x]) blend_pixel(prow + 4 * x, op.color, op.alpha);
    }
    for (const auto& op : plan.strokes) {
        if (y < op.outer.y0 || y >= op.outer.y1) continue;
        for (int x = op.outer.x0; x < op.outer.x1; ++x)
            if (!op.inner.contains(x, y)) set_pixel(img.at(x, y), op.color);
    }
    for (const auto& op : plan.labels) {
        if (y < op.chip.y0 || y >= op.chip.y1) continue;
        for (int x = op.chip.x0; x < op.chip.x1; ++x) set_pixel(img.at(x, y), op.chip_color);
        // digits in white over the chip
        int local_y = y - op.chip.y0 - op.pad;
        if (local_y < 0 || local_y >= kGlyphHeight * op.scale) continue;
        int row = local_y / op.scale;
        for (size_t i = 0; i < op.digits.size(); ++i) {
            int digit = op.digits[i] - '0';
            int gx0 = op.chip.x0 + op.pad + int(i) * kGlyphAdvance * op.scale;
            for (int col = 0; col < kGlyphWidth; ++col) {
                if (!digit_pixel(digit, col, row)) continue;
                for (int sx = 0; sx < op.scale; ++sx) {
                    int x = gx0 + col * op.scale + sx;
                    if (x >= op.chip.x0 && x < op.chip.x1)
                        set_pixel(img.at(x, y), Rgb{255, 255, 255});
                }
            }
        }
    }
}

LabelOp make_label(const IntRect& box, int index1, int scale, Rgb color, int w, int h) {
    LabelOp op;
    op.digits = std::to_string(index1);
    op.scale = scale;
    op.pad = scale;
    int chip_w = scale * (kGlyphAdvance * int(op.digits.size()) + 1);
    int chip_h = scale * (kGlyphHeight + 2);
    // top-left corner of the box, nudged fully inside the image
    int x = std::clamp(box.x0, 0, std::max(0, w - chip_w));
    int y = std::clamp(box.y0, 0, std::max(0, h - chip_h));
    op.chip = IntRect{x, y, std::min(x + chip_w, w), std::min(y + chip_h, h)};
    op.chip_color = color;
    return op;
}

RenderPlan build_plan(const Image& source, const DetectionSet& detections,
                      const VPromptStyle& style, const RenderConfig& cfg) {
    if (!style.number && !style.box && !style.mask)
        fail(Errc::Precondition, "style enables no marker kind");
    if (cfg.palette.size() < 8) fail(Errc::Precondition, "palette needs at least 8 colors");
    if (source.width <= 0 || source.height <= 0 ||
        source.pixels.size() != size_t(source.width) * source.height * 4)
        fail(Errc::UndecodableImage, "source image buffer is invalid");

    if (style.mask && !detections.detections.empty()) {
        bool any_mask = std::any_of(detections.detections.begin(), detections.detections.end(),
                                    [](const Detection& d) { return d.mask.has_value(); });
        if (!any_mask) fail(Errc::MaskStyleWithoutMasks, "style needs masks but none present");
    }

    RenderPlan plan;
    plan.width = source.width;
    plan.height = source.height;
    const auto colors = assign_colors(detections.detections.size(), cfg.palette);
    const int stroke = cfg.stroke_for(source.width, source.height);
    const int scale = cfg.label_scale_for(source.height);
    const uint8_t alpha =
        uint8_t(std::clamp(std::lround(255.0 * cfg.mask_alpha * style.mask_alpha_scale), 0l, 255l));

    for (size_t i = 0; i < detections.detections.size(); ++i) {
        const Detection& det = detections.detections[i];
        const Box box = clamp_box(det.box, source.width, source.height);
        const IntRect rect = to_int_rect(box, source.width, source.height);

        if (style.mask && det.mask) {
            MaskOp op;
            op.bitmap = det.mask->to_bitmap();
            op.color = colors[i];
            op.alpha = alpha;
            plan.masks.push_back(std::move(op));
        }
        if (style.box) {
            StrokeOp op;
            op.outer = rect;
            op.inner = IntRect{rect.x0 + stroke, rect.y0 + stroke, rect.x1 - stroke,
                               rect.y1 - stroke};
            if (op.inner.empty()) op.inner = IntRect{0, 0, 0, 0};
            op.color = colors[i];
            plan.strokes.push_back(op);
        }
        if (style.number) {
            plan.labels.push_back(
                make_label(rect, int(i) + 1, scale, colors[i], source.width, source.height));
        }
    }
    return plan;
}

} // namespace

AnnotatedImage render_vprompt(const Image& source, const DetectionSet& detections,
                              const VPromptStyle& style, const RenderConfig& cfg,
                              RenderExecution exec) {
    RenderPlan plan = build_plan(source, detections, style, cfg);

    AnnotatedImage out;
    out.image_id = detections.image_id;
    out.pixels = source;
    out.style = style;
    out.detections_hash = detections.content_hash();
    out.config_hash = cfg.content_hash();

    const int h = source.height;
    if (exec == RenderExecution::Parallel) {
#pragma omp parallel for schedule(static)
        for (int y = 0; y < h; ++y) apply_row(out.pixels, plan, y);
    } else {
        for (int y = 0; y < h; ++y) apply_row(out.pixels, plan, y);
    }
    return out;
}

std::vector<PixelRect> marker_coverage(const Image& source, const DetectionSet& detections,
                                       const VPromptStyle& style, const RenderConfig& cfg) {
    std::vector<PixelRect> rects;
    const int w = source.width, h = source.height;
    const int stroke = cfg.stroke_for(w, h);
    const int scale = cfg.label_scale_for(h);

    for (const auto& det : detections.detections) {
        Box box;
        try {
            box = clamp_box(det.box, w, h);
        } catch (const Error&) {
            continue;
        }
        IntRect rect = to_int_rect(box, w, h);
        if (style.box || style.number) {
            // box band plus the worst-case label chip around the corner
            int chip_w = scale * (kGlyphAdvance * 2 + 1);
            int chip_h = scale * (kGlyphHeight + 2);
            int pad = std::max(stroke, std::max(chip_w, chip_h));
            rects.push_back(PixelRect{std::max(0, rect.x0 - pad), std::max(0, rect.y0 - pad),
                                      std::min(w, rect.x1 + pad), std::min(h, rect.y1 + pad)});
        }
        if (style.mask && det.mask) {
            if (auto tight = det.mask->tight_box()) {
                IntRect mr = to_int_rect(*tight, w, h);
                rects.push_back(PixelRect{mr.x0, mr.y0, mr.x1, mr.y1});
            }
        }
    }
    return rects;
}

} // namespace vtp
