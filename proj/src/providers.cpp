#include "gsprop/providers.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "gsprop/error.hpp"
#include "gsprop/image_io.hpp"
#include "gsprop/parallel.hpp"

namespace gsprop {

// ---------------------------------------------------------------------------
// FixtureProvider

FixtureProvider::FixtureProvider(std::filesystem::path fixture_dir,
                                 const MaterialLibrary& library)
    : dir_(std::move(fixture_dir)), library_(&library) {
    if (!std::filesystem::is_directory(dir_))
        throw DataError("fixture directory does not exist: " + dir_.string());
}

const FixtureProvider::ViewFixture& FixtureProvider::view(const std::string& view_id) {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(view_id);
    if (it != cache_.end())
        return it->second;

    const auto path = dir_ / (view_id + ".txt");
    std::ifstream in(path);
    if (!in)
        throw DataError("missing fixture file: " + path.string());
    ViewFixture fixture;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ls(line);
        std::string first;
        ls >> first;
        if (first == "description") {
            std::getline(ls, fixture.description);
            const auto start = fixture.description.find_first_not_of(" \t");
            fixture.description =
                start == std::string::npos ? "" : fixture.description.substr(start);
            continue;
        }
        int segment_id = 0;
        std::string material;
        try {
            segment_id = std::stoi(first);
        } catch (const std::exception&) {
            throw DataError("malformed fixture line '" + line + "' in " + path.string());
        }
        if (!(ls >> material))
            throw DataError("malformed fixture line '" + line + "' in " + path.string());
        fixture.materials[segment_id] = material;
    }
    return cache_.emplace(view_id, std::move(fixture)).first->second;
}

std::string FixtureProvider::describe_object(const std::string& view_id, const ImageRgb*) {
    return view(view_id).description;
}

SegmentAnnotation FixtureProvider::annotate_segment(const std::string& view_id, int segment_id,
                                                    const PromptBundle&) {
    SegmentAnnotation out;
    out.view_id = view_id;
    out.segment_id = segment_id;
    const auto& fixture = view(view_id);
    auto it = fixture.materials.find(segment_id);
    if (it == fixture.materials.end()) {
        out.confidence = 0.0;
        return out; // unresolved
    }
    out.raw_material_text = it->second;
    const MaterialRecord* rec = library_->resolve(it->second);
    if (!rec) {
        out.confidence = 0.0;
        return out;
    }
    out.material_id = rec->material_id;
    out.confidence = 1.0;
    return out;
}

// ---------------------------------------------------------------------------
// HttpLmmProvider

namespace {

// Blocking token bucket; spacing between acquisitions approaches
// 1/rate_per_s under load.
class TokenBucket {
public:
    TokenBucket(double rate_per_s, double burst)
        : rate_(rate_per_s), burst_(std::max(1.0, burst)), tokens_(burst_),
          last_(std::chrono::steady_clock::now()) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        for (;;) {
            refill();
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            const double need = (1.0 - tokens_) / rate_;
            cv_.wait_for(lock, std::chrono::duration<double>(need));
        }
    }

private:
    void refill() {
        const auto now = std::chrono::steady_clock::now();
        const double dt = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        tokens_ = std::min(burst_, tokens_ + dt * rate_);
    }

    double rate_, burst_, tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mutex_;
    std::condition_variable cv_;
};

std::string bearer_token(const std::string& env_name) {
    const char* token = std::getenv(env_name.c_str());
    if (!token || !*token)
        throw EndpointError("auth token environment variable " + env_name + " is not set");
    return token;
}

nlohmann::json image_part(const ImageRgb& image) {
    const auto png = encode_png(image);
    return {{"type", "image_url"},
            {"image_url", {{"url", "data:image/png;base64," + base64_encode(png)}}}};
}

} // namespace

struct HttpLmmProvider::Impl {
    LmmEndpoint endpoint;
    const MaterialLibrary* library;
    std::string token;
    std::unique_ptr<TokenBucket> bucket;

    std::string post_chat(const nlohmann::json& payload) {
        httplib::Client client(endpoint.base_url);
        client.set_connection_timeout(std::chrono::duration<double>(endpoint.connect_timeout_s));
        client.set_read_timeout(std::chrono::duration<double>(endpoint.read_timeout_s));
        httplib::Headers headers{{"Authorization", "Bearer " + token}};

        const std::string body = payload.dump();
        std::string last_error;
        for (int attempt = 0; attempt <= endpoint.transport_retries; ++attempt) {
            if (attempt > 0) {
                const double delay = endpoint.backoff_base_s * std::pow(2.0, attempt - 1);
                std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            }
            bucket->acquire();
            auto res = client.Post(endpoint.path, headers, body, "application/json");
            if (!res) {
                last_error = "connection failed: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 429) {
                // Honor the server-requested delay before the next attempt.
                double delay = endpoint.backoff_base_s;
                if (auto it = res->headers.find("Retry-After"); it != res->headers.end()) {
                    try {
                        delay = std::stod(it->second);
                    } catch (const std::exception&) {
                    }
                }
                std::this_thread::sleep_for(std::chrono::duration<double>(std::min(delay, 60.0)));
                last_error = "rate limited (429)";
                continue;
            }
            if (res->status >= 500) {
                last_error = "server error " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw EndpointError("LMM endpoint returned status " +
                                    std::to_string(res->status) + ": " + res->body);
            try {
                const auto doc = nlohmann::json::parse(res->body);
                return doc.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw EndpointError(std::string("malformed LMM response: ") + e.what());
            }
        }
        throw EndpointError("LMM endpoint unreachable after " +
                            std::to_string(endpoint.transport_retries + 1) +
                            " attempts: " + last_error);
    }

    nlohmann::json make_payload(const PromptBundle& bundle) {
        nlohmann::json content = nlohmann::json::array();
        content.push_back({{"type", "text"}, {"text", bundle.user_text}});
        for (const auto& image : bundle.images)
            content.push_back(image_part(image));
        return {{"model", endpoint.model},
                {"temperature", endpoint.temperature},
                {"messages",
                 {{{"role", "system"}, {"content", bundle.system_text}},
                  {{"role", "user"}, {"content", std::move(content)}}}}};
    }
};

HttpLmmProvider::HttpLmmProvider(LmmEndpoint endpoint, const MaterialLibrary& library)
    : impl_(std::make_unique<Impl>()) {
    impl_->endpoint = std::move(endpoint);
    impl_->library = &library;
    impl_->token = bearer_token(impl_->endpoint.token_env);
    impl_->bucket = std::make_unique<TokenBucket>(impl_->endpoint.requests_per_s,
                                                  impl_->endpoint.max_in_flight);
}

HttpLmmProvider::~HttpLmmProvider() = default;

int HttpLmmProvider::max_parallel() const { return std::max(1, impl_->endpoint.max_in_flight); }

std::string HttpLmmProvider::describe_object(const std::string&, const ImageRgb* full_view) {
    if (!full_view)
        throw DataError("live annotation requires the view image");
    PromptBundle bundle = build_describe_prompt();
    bundle.images.push_back(*full_view);
    return impl_->post_chat(impl_->make_payload(bundle));
}

SegmentAnnotation HttpLmmProvider::annotate_segment(const std::string& view_id, int segment_id,
                                                    const PromptBundle& bundle) {
    SegmentAnnotation out;
    out.view_id = view_id;
    out.segment_id = segment_id;

    PromptBundle attempt = bundle;
    for (int retry = 0; retry <= impl_->endpoint.parse_retries; ++retry) {
        const std::string reply = impl_->post_chat(impl_->make_payload(attempt));
        const auto parsed = parse_fenced_answer(reply);
        if (!parsed) {
            attempt.user_text = bundle.user_text +
                                "\n\nYour previous reply could not be parsed. Answer again and "
                                "finish with exactly one fenced code block of the form:\n"
                                "```\nmaterial: <id>; density: <kg/m3>; "
                                "youngs_modulus: <Pa>; poisson: <val>\n```";
            continue;
        }
        out.raw_material_text = parsed->material_text;
        out.quoted_density = parsed->density;
        out.quoted_youngs_modulus = parsed->youngs_modulus;
        out.quoted_poisson = parsed->poisson;
        if (const MaterialRecord* rec = impl_->library->resolve(parsed->material_text)) {
            out.material_id = rec->material_id;
            out.confidence = 1.0;
        } else {
            out.confidence = 0.0; // named something outside the library
        }
        return out;
    }
    out.confidence = 0.0; // parse retries exhausted; flagged for fallback
    return out;
}

// ---------------------------------------------------------------------------
// SegmentationClient

struct SegmentationClient::Impl {
    SegEndpoint endpoint;
    std::string token;
};

SegmentationClient::SegmentationClient(SegEndpoint endpoint) : impl_(std::make_unique<Impl>()) {
    impl_->endpoint = std::move(endpoint);
    impl_->token = bearer_token(impl_->endpoint.token_env);
}

SegmentationClient::~SegmentationClient() = default;

namespace {

MaskBitmap decode_rle(const nlohmann::json& rle) {
    const int width = rle.at("width").get<int>();
    const int height = rle.at("height").get<int>();
    MaskBitmap bitmap(width, height, 0);
    // Row-major alternating run lengths, zeros first.
    std::size_t pos = 0;
    std::uint8_t value = 0;
    for (const auto& run : rle.at("counts")) {
        const std::size_t n = run.get<std::size_t>();
        if (pos + n > bitmap.data.size())
            throw ParseError("RLE runs exceed the mask size");
        std::fill_n(bitmap.data.begin() + static_cast<std::ptrdiff_t>(pos), n, value);
        pos += n;
        value = value ? 0 : 1;
    }
    if (pos != bitmap.data.size())
        throw ParseError("RLE runs do not cover the mask");
    return bitmap;
}

} // namespace

std::vector<MaskSet> SegmentationClient::segment(const ImageRgb& image,
                                                 const std::string& view_id) {
    httplib::Client client(impl_->endpoint.base_url);
    client.set_connection_timeout(
        std::chrono::duration<double>(impl_->endpoint.connect_timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(impl_->endpoint.read_timeout_s));
    httplib::Headers headers{{"Authorization", "Bearer " + impl_->token}};

    const nlohmann::json payload = {
        {"image", base64_encode(encode_png(image))},
        {"points_per_side", impl_->endpoint.points_per_side},
    };
    auto res = client.Post(impl_->endpoint.path, headers, payload.dump(), "application/json");
    if (!res)
        throw EndpointError("segmentation endpoint unreachable: " +
                            httplib::to_string(res.error()));
    if (res->status != 200)
        throw EndpointError("segmentation endpoint returned status " +
                            std::to_string(res->status));

    std::vector<MaskSet> hierarchy;
    try {
        const auto doc = nlohmann::json::parse(res->body);
        for (const auto& level : doc.at("levels")) {
            MaskSet set;
            set.view_id = view_id;
            set.width = image.width;
            set.height = image.height;
            for (const auto& mask : level.at("masks")) {
                SegmentMask m;
                m.segment_id = mask.at("segment_id").get<int>();
                m.predicted_iou = mask.at("predicted_iou").get<double>();
                m.stability = mask.at("stability").get<double>();
                m.bitmap = decode_rle(mask.at("rle"));
                if (m.bitmap.width != image.width || m.bitmap.height != image.height)
                    throw ParseError("mask dimensions do not match the request image");
                set.masks.push_back(std::move(m));
            }
            hierarchy.push_back(std::move(set));
        }
    } catch (const nlohmann::json::exception& e) {
        throw EndpointError(std::string("malformed segmentation response: ") + e.what());
    }
    if (hierarchy.empty())
        throw EndpointError("segmentation response carries no levels");
    return hierarchy;
}

// ---------------------------------------------------------------------------
// annotate_view

ViewAnnotation annotate_view(const CameraModel& cam, const ImageRgb* image, const MaskSet& masks,
                             const MaterialLibrary& library, MaterialProvider& provider,
                             const AnnotateParams& params) {
    if (masks.width != cam.width || masks.height != cam.height)
        throw DataError("mask set does not match the camera dimensions");
    if (provider.wants_images()) {
        if (!image)
            throw DataError("provider requires the view image");
        if (image->width != cam.width || image->height != cam.height)
            throw DataError("view image does not match the camera dimensions");
    }

    ViewAnnotation result;
    result.material_map = LabelGrid(cam.width, cam.height, 0);
    result.object_description = provider.describe_object(cam.view_id, image);

    const double min_area =
        params.min_segment_area_frac * static_cast<double>(cam.width) * cam.height;
    std::vector<const SegmentMask*> queried;
    for (const auto& mask : masks.masks) {
        if (static_cast<double>(mask.area()) >= min_area)
            queried.push_back(&mask);
    }
    if (queried.empty())
        throw DataError("view '" + cam.view_id + "' is unusable: no segment large enough to query");

    result.segments.resize(queried.size());
    const int workers = params.workers > 0 ? params.workers : provider.max_parallel();
    const PromptBundle prompt = build_part_prompt(result.object_description, library);
    parallel_for(queried.size(), workers, [&](std::size_t i) {
        PromptBundle bundle = prompt;
        if (provider.wants_images())
            bundle.images = compose_triptych(*image, queried[i]->bitmap);
        result.segments[i] =
            provider.annotate_segment(cam.view_id, queried[i]->segment_id, bundle);
    });

    // Paint in ascending precedence (confidence, then smaller area, then
    // smaller id) so the preferred segment lands last on overlap pixels.
    std::vector<std::size_t> order(queried.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::vector<std::size_t> areas(queried.size());
    for (std::size_t i = 0; i < queried.size(); ++i)
        areas[i] = queried[i]->area();
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (result.segments[a].confidence != result.segments[b].confidence)
            return result.segments[a].confidence < result.segments[b].confidence;
        if (areas[a] != areas[b])
            return areas[a] > areas[b];
        return queried[a]->segment_id > queried[b]->segment_id;
    });

    std::size_t resolved = 0;
    for (std::size_t i : order) {
        const SegmentAnnotation& ann = result.segments[i];
        if (!ann.resolved())
            continue; // pixels stay unlabeled
        ++resolved;
        const std::uint16_t ordinal = library.ordinal_of(ann.material_id);
        const MaskBitmap& bitmap = queried[i]->bitmap;
        for (int y = 0; y < bitmap.height; ++y)
            for (int x = 0; x < bitmap.width; ++x)
                if (bitmap.at(x, y))
                    result.material_map.at(x, y) = ordinal;
    }
    if (resolved == 0)
        throw DataError("view '" + cam.view_id + "' is unusable: every segment is unresolved");
    return result;
}

} // namespace gsprop
