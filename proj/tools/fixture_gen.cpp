// SPDX-License-Identifier: Apache-2.0
//
// Regenerates the committed test fixtures: the 2-detection render fixture
// and the 5-instance replay bundle (images + manifest + cassettes).
// Deterministic output; run it, review the diff, commit. Golden pixel
// hashes are printed so tests can pin them.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vtprompt/base64.hpp"
#include "vtprompt/cassette.hpp"
#include "vtprompt/chat_client.hpp"
#include "vtprompt/concepts.hpp"
#include "vtprompt/detection.hpp"
#include "vtprompt/detector_client.hpp"
#include "vtprompt/hash.hpp"
#include "vtprompt/image.hpp"
#include "vtprompt/render.hpp"
#include "vtprompt/tprompt.hpp"
#include "vtprompt/util.hpp"

using namespace vtp;
namespace fs = std::filesystem;

namespace {

Image gradient_image(int w, int h, int variant) {
    Image img = Image::filled(w, h, Rgb{0, 0, 0});
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            uint8_t* px = img.at(x, y);
            px[0] = uint8_t((x * (13 + variant * 7)) % 256);
            px[1] = uint8_t((y * (17 + variant * 5)) % 256);
            px[2] = uint8_t(((x + y) * (19 + variant * 3)) % 256);
        }
    }
    // blocky "objects" so the pictures are not pure gradients
    for (int y = h / 5; y < 2 * h / 5; ++y)
        for (int x = w / 6; x < w / 3; ++x) {
            uint8_t* px = img.at(x, y);
            px[0] = uint8_t(200 + variant * 10);
            px[1] = 80;
            px[2] = 60;
        }
    for (int y = h / 2; y < 4 * h / 5; ++y)
        for (int x = w / 2; x < 5 * w / 6; ++x) {
            uint8_t* px = img.at(x, y);
            px[0] = 50;
            px[1] = uint8_t(160 + variant * 8);
            px[2] = 90;
        }
    return img;
}

RleMask disc_mask(int w, int h, int cx, int cy, int r) {
    std::vector<uint8_t> bits(size_t(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) bits[size_t(y) * w + x] = 1;
    return RleMask::from_bitmap(w, h, bits);
}

void write_render_fixture(const fs::path& dir) {
    fs::create_directories(dir);
    Image base = gradient_image(96, 64, 0);
    save_image(dir / "base.png", base);

    DetectionSet dets;
    dets.image_id = "render_fixture";
    dets.backend = DetectorBackend::ConditionalSegment;

    Detection person;
    person.label = "person";
    person.box = Box{12, 10, 40, 52};
    person.score = 0.95;
    person.mask = disc_mask(96, 64, 26, 30, 14);
    dets.detections.push_back(person);

    Detection dog;
    dog.label = "dog";
    dog.box = Box{55, 28, 86, 58};
    dog.score = 0.80;
    dog.mask = disc_mask(96, 64, 70, 43, 11);
    dets.detections.push_back(dog);

    dets.sort_canonical();
    write_file_atomic(dir / "detections.json", dets.to_json().dump(2));

    std::printf("render fixture golden pixel hashes:\n");
    for (const auto& style : {VPromptStyle::type_a(), VPromptStyle::type_b(),
                              VPromptStyle::type_c(), VPromptStyle::type_d(),
                              VPromptStyle::type_e()}) {
        auto out = render_vprompt(base, dets, style, RenderConfig::defaults(),
                                  RenderExecution::Serial);
        std::printf("  %s %s\n", style.name.c_str(), out.pixels.content_hash().c_str());
    }
}

struct FixtureInstance {
    std::string id;
    std::string image_file;
    std::string question;
    nlohmann::json options;
    std::string ground_truth;
    nlohmann::json task;
    std::string group;
    std::string concepts_response;  // text LLM reply
    std::string answer_response;    // vision LLM reply
    std::vector<std::string> labels;
};

void write_run_fixture(const fs::path& dir) {
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "cassettes");

    // Correctness pattern, hand-scored in the acceptance suite:
    //   mme existence g1: q1 right, q2 wrong -> Acc 50, Acc+ 0, 50 points
    //   mmb localization: one right, one unparsable -> 50.00
    //   pope random: right -> acc/p/r/f1 all 100.0
    std::vector<FixtureInstance> instances = {
        {"mme_g1_q1", "img0.png", "Is there a red block in the image?", nlohmann::json::array(),
         "yes", {{"bench", "mme"}, {"name", "existence"}}, "g1",
         "objects: [\"red block\"]\nmode: direct", "Yes, a red block sits near the top left.",
         {"red block"}},
        {"mme_g1_q2", "img0.png", "Is there a blue sphere in the image?", nlohmann::json::array(),
         "no", {{"bench", "mme"}, {"name", "existence"}}, "g1",
         "objects: [\"blue sphere\"]\nmode: direct", "Yes, I can see a blue sphere.",
         {"blue sphere"}},
        {"mmb_loc_1", "img1.png", "Where is the green panel?",
         nlohmann::json::array({{"A", "upper left"}, {"B", "lower right"}}), "B",
         {{"bench", "mmb"}, {"name", "object_localization"}}, "mmb_loc_1",
         "objects: [\"green panel\"]\nmode: direct", "B. The green panel is in the lower right.",
         {"green panel"}},
        {"mmb_loc_2", "img2.png", "Where is the red block?",
         nlohmann::json::array({{"A", "top area"}, {"B", "bottom area"}}), "A",
         {{"bench", "mmb"}, {"name", "object_localization"}}, "mmb_loc_2",
         "objects: [\"red block\"]\nmode: direct", "I cannot tell from this image.",
         {"red block"}},
        {"pope_r_1", "img3.png", "Is there a green panel in the image?", nlohmann::json::array(),
         "yes", {{"bench", "pope"}, {"setting", "random"}}, "pope_r_1",
         "objects: [\"green panel\"]\nmode: direct", "Yes, there is a green panel.",
         {"green panel"}},
    };

    // images (img0 shared by the MME pair)
    for (int i = 0; i < 4; ++i)
        save_image(dir / "images" / ("img" + std::to_string(i) + ".png"),
                   gradient_image(64, 48, i));

    // manifest
    std::string manifest;
    for (const auto& inst : instances) {
        nlohmann::json j{{"id", inst.id},
                         {"image_path", "images/" + inst.image_file},
                         {"question", inst.question},
                         {"options", inst.options},
                         {"ground_truth", inst.ground_truth},
                         {"task", inst.task},
                         {"image_group_id", inst.group}};
        manifest += j.dump() + "\n";
    }
    write_file_atomic(dir / "manifest.jsonl", manifest);

    // cassettes; fingerprints must match what the pipeline will compute
    CassetteStore text_store(dir / "cassettes", "textllm");
    CassetteStore vision_store(dir / "cassettes", "vision");
    CassetteStore detector_store(dir / "cassettes", "detector");

    for (const auto& inst : instances) {
        Image source = load_image(dir / "images" / inst.image_file);

        // text LLM: concept extraction
        ChatRequest text_req;
        text_req.prompt = build_extraction_prompt(inst.question).text;
        text_req.model_id = "fixture-text";
        text_store.put(text_req.fingerprint(),
                       {200, make_chat_response_body(inst.concepts_response)});

        // detector: one grounded box per label, deterministic placement
        auto det_req = DetectorWireRequest::boxes_for(source, inst.labels);
        nlohmann::json dets = nlohmann::json::array();
        for (size_t i = 0; i < inst.labels.size(); ++i) {
            double x0 = 8 + double(i) * 6, y0 = 6 + double(i) * 4;
            dets.push_back({{"label", inst.labels[i]},
                            {"box", {x0, y0, x0 + 22, y0 + 18}},
                            {"score", 0.9 - 0.05 * double(i)}});
        }
        detector_store.put(det_req.fingerprint("detector", "v1"),
                           {200, nlohmann::json{{"detections", dets}}.dump()});

        // vision LLM: answer over the annotated image; recompute the exact
        // annotated bytes the pipeline will produce
        DetectionSet sanitized;
        sanitized.image_id = inst.id;
        sanitized.backend = DetectorBackend::GroundingBox;
        for (const auto& jd : dets) {
            auto d = sanitize_wire_detection(jd, source.width, source.height);
            if (d) sanitized.detections.push_back(std::move(*d));
        }
        sanitized.sort_canonical();
        auto annotated = render_vprompt(source, sanitized, VPromptStyle::type_a(),
                                        RenderConfig::defaults(), RenderExecution::Serial);

        Options options;
        for (const auto& o : inst.options)
            options.emplace_back(o.at(0).get<std::string>(), o.at(1).get<std::string>());
        ChatRequest vision_req;
        vision_req.prompt =
            build_answer_prompt(inst.question, options, PromptStrategy::TPrompt).text;
        vision_req.model_id = "fixture-vision";
        vision_req.image = ImagePayload{encode_png(annotated.pixels), "image/png"};
        vision_store.put(vision_req.fingerprint(),
                         {200, make_chat_response_body(inst.answer_response)});

        // baseline mode sends the original file bytes, no markers
        ChatRequest baseline_req = vision_req;
        baseline_req.image = ImagePayload{read_file_bytes(dir / "images" / inst.image_file),
                                          "image/png"};
        vision_store.put(baseline_req.fingerprint(),
                         {200, make_chat_response_body(inst.answer_response)});
    }

    // run config for the bundle
    std::string cfg;
    cfg += "manifest = \"manifest.jsonl\"\n";
    cfg += "cassette_dir = \"cassettes\"\n";
    cfg += "cassette_mode = \"replay\"\n";
    cfg += "detector_kind = \"grounding_box\"\n";
    cfg += "style = \"type_a\"\n";
    cfg += "strategy = \"tprompt\"\n";
    cfg += "max_concurrency = 4\n";
    cfg += "\n[text_backend]\nid = \"textllm\"\nmodel = \"fixture-text\"\n";
    cfg += "\n[vision_backend]\nid = \"vision\"\nmodel = \"fixture-vision\"\n";
    cfg += "\n[detector_backend]\nid = \"detector\"\nversion = \"v1\"\n";
    write_file_atomic(dir / "fixture.toml", cfg);

    std::printf("run fixture written to %s\n", dir.string().c_str());
}

} // namespace

int main(int argc, char** argv) {
    fs::path root = argc > 1 ? argv[1] : "tests/fixtures";
    write_render_fixture(root / "render");
    write_run_fixture(root / "run5");
    std::printf("fixtures regenerated under %s\n", root.string().c_str());
    return 0;
}
