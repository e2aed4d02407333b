#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gsprop/camera.hpp"
#include "gsprop/masks.hpp"
#include "gsprop/material_library.hpp"
#include "gsprop/perception.hpp"

namespace gsprop {

// Source of per-segment material annotations: a live LMM endpoint or a
// deterministic fixture store.
class MaterialProvider {
public:
    virtual ~MaterialProvider() = default;

    // Whether annotate_view must compose triptych images for this provider.
    virtual bool wants_images() const = 0;

    // Upper bound on concurrent segment queries.
    virtual int max_parallel() const { return 1; }

    virtual std::string describe_object(const std::string& view_id, const ImageRgb* full_view) = 0;

    // `bundle` carries the prompt and, when wants_images(), the triptych.
    // Returns an unresolved annotation (empty material_id) on unrecoverable
    // parse or resolution failure; throws EndpointError on transport failure.
    virtual SegmentAnnotation annotate_segment(const std::string& view_id, int segment_id,
                                               const PromptBundle& bundle) = 0;
};

// Reads per-view `segment_id material_id` text files (plus an optional
// `description <text>` line). Deterministic; annotations carry confidence 1.
class FixtureProvider final : public MaterialProvider {
public:
    FixtureProvider(std::filesystem::path fixture_dir, const MaterialLibrary& library);

    bool wants_images() const override { return false; }
    std::string describe_object(const std::string& view_id, const ImageRgb* full_view) override;
    SegmentAnnotation annotate_segment(const std::string& view_id, int segment_id,
                                       const PromptBundle& bundle) override;

private:
    struct ViewFixture {
        std::map<int, std::string> materials; // segment_id -> material_id
        std::string description;
    };
    const ViewFixture& view(const std::string& view_id);

    std::filesystem::path dir_;
    const MaterialLibrary* library_;
    std::map<std::string, ViewFixture> cache_;
    std::mutex mutex_;
};

struct LmmEndpoint {
    std::string base_url;         // e.g. https://host or http://host:port
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-4o";
    std::string token_env = "GSPROP_LMM_TOKEN";
    double temperature = 0.0;
    int parse_retries = 2;     // re-queries with a repair instruction appended
    int transport_retries = 3; // exponential backoff on connect/5xx failures
    double backoff_base_s = 0.5;
    int max_in_flight = 4;
    double requests_per_s = 2.0;
    double connect_timeout_s = 10.0;
    double read_timeout_s = 120.0;
};

// Chat-completions-style client: messages with base64 data-URL image parts,
// bearer auth from the configured environment variable, temperature 0.
class HttpLmmProvider final : public MaterialProvider {
public:
    HttpLmmProvider(LmmEndpoint endpoint, const MaterialLibrary& library);
    ~HttpLmmProvider() override;

    bool wants_images() const override { return true; }
    int max_parallel() const override;
    std::string describe_object(const std::string& view_id, const ImageRgb* full_view) override;
    SegmentAnnotation annotate_segment(const std::string& view_id, int segment_id,
                                       const PromptBundle& bundle) override;

private:
    std::string complete(const PromptBundle& bundle);

    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct SegEndpoint {
    std::string base_url;
    std::string path = "/segment";
    std::string token_env = "GSPROP_SEG_TOKEN";
    int points_per_side = 32; // prompt grid sent to the endpoint
    double connect_timeout_s = 10.0;
    double read_timeout_s = 300.0;
};

// POSTs an image and the grid parameters; the endpoint owns model inference
// and answers run-length-encoded masks with predicted_iou/stability per mask,
// grouped per granularity level (coarse to fine). See docs/formats.md.
class SegmentationClient {
public:
    explicit SegmentationClient(SegEndpoint endpoint);
    ~SegmentationClient();

    std::vector<MaskSet> segment(const ImageRgb& image, const std::string& view_id);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct AnnotateParams {
    // Segments below this fraction of the image area are skipped (their
    // pixels stay unlabeled; other views recover those Gaussians).
    double min_segment_area_frac = 0.001;
    int workers = 0; // 0 = provider.max_parallel()
};

struct ViewAnnotation {
    LabelGrid material_map; // material ordinals, 0 = unlabeled
    std::vector<SegmentAnnotation> segments;
    std::string object_description;
};

// One whole-object description query, then one part query per surviving
// mask. Overlapping pixels go to the annotation with the higher confidence,
// then the smaller mask area. Throws DataError when every segment ends up
// unresolved (the view is unusable).
ViewAnnotation annotate_view(const CameraModel& cam, const ImageRgb* image, const MaskSet& masks,
                             const MaterialLibrary& library, MaterialProvider& provider,
                             const AnnotateParams& params = {});

} // namespace gsprop
