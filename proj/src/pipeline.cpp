#include "gsprop/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gsprop/error.hpp"
#include "gsprop/evaluation.hpp"
#include "gsprop/export_scene.hpp"
#include "gsprop/hash.hpp"
#include "gsprop/image_io.hpp"
#include "gsprop/lift.hpp"
#include "gsprop/physics.hpp"
#include "gsprop/ply.hpp"

namespace gsprop {

namespace fs = std::filesystem;

namespace {

class StageLog {
public:
    explicit StageLog(std::string stage)
        : stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}

    void line(const std::string& message) const {
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - start_)
                                 .count();
        std::cerr << "[gsprop] stage=" << stage_ << " elapsed_ms=" << elapsed << " " << message
                  << "\n";
    }

private:
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
};

std::vector<std::byte> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open file: " + path.string());
    std::vector<char> data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    const auto* p = reinterpret_cast<const std::byte*>(data.data());
    return {p, p + data.size()};
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write file: " + path.string());
    out << text;
}

void write_bytes(const fs::path& path, const std::vector<std::byte>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write file: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

GaussianCloud load_cloud(const PipelineConfig& config) {
    return parse_gaussian_ply(read_bytes(config.scene));
}

// ISO-8601 UTC; SOURCE_DATE_EPOCH pins it for reproducible runs.
std::string timestamp_utc() {
    std::time_t t;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch)
        t = static_cast<std::time_t>(std::atoll(epoch));
    else
        t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Canonical serialization of every knob that affects outputs.
std::string config_fingerprint(const PipelineConfig& c) {
    std::ostringstream out;
    out.precision(17);
    out << "provider " << (c.provider == ProviderMode::fixture ? "fixture" : "live") << "\n"
        << "views " << c.views << "\n"
        << "iou_min " << c.iou_min << "\n"
        << "stability_min " << c.stability_min << "\n"
        << "overlap_max " << c.overlap_max << "\n"
        << "tol_rel " << c.tol_rel << "\n"
        << "front_threshold " << c.front_threshold << "\n"
        << "voxel_size " << c.voxel_size << "\n"
        << "min_segment_area_frac " << c.min_segment_area_frac << "\n"
        << "propagate_k " << c.propagate_k << "\n";
    return out.str();
}

std::string config_hash(const PipelineConfig& config, const std::vector<fs::path>& inputs) {
    Fnv1a64 hash;
    hash.update(config_fingerprint(config));
    std::vector<fs::path> files;
    for (const auto& path : inputs) {
        if (path.empty() || !fs::exists(path))
            continue;
        if (fs::is_directory(path)) {
            for (const auto& entry : fs::recursive_directory_iterator(path))
                if (entry.is_regular_file())
                    files.push_back(entry.path());
        } else {
            files.push_back(path);
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        hash.update(path.filename().string());
        const auto bytes = read_bytes(path);
        hash.update(bytes.data(), bytes.size());
    }
    return hash.hex();
}

fs::path find_view_image(const PipelineConfig& config, const std::string& view_id) {
    for (const char* ext : {".png", ".jpg", ".jpeg"}) {
        const fs::path candidate = config.images_dir / (view_id + ext);
        if (fs::exists(candidate))
            return candidate;
    }
    throw DataError("no image for view '" + view_id + "' under " + config.images_dir.string());
}

MaskFilterParams filter_params(const PipelineConfig& config) {
    return {config.iou_min, config.stability_min, config.overlap_max};
}

RenderParams render_params(const PipelineConfig& config) {
    RenderParams params;
    params.front_threshold = static_cast<float>(config.front_threshold);
    return params;
}

// The annotated scene written by cmd_lift, reloaded.
struct LoadedScene {
    GaussianCloud cloud;
    MaterialLibrary library;
    PropertyField field;
};

LoadedScene load_annotated(const PipelineConfig& config) {
    const fs::path path = config.output_dir / "annotated.ply";
    if (!fs::exists(path))
        throw DataError("missing " + path.string() + "; run the lift stage first");
    LoadedScene scene{parse_gaussian_ply(read_bytes(path)),
                      MaterialLibrary::load_file(config.library), {}};
    scene.field = field_from_annotated(scene.cloud, scene.library);
    return scene;
}

const CameraModel& camera_by_view(const std::vector<CameraModel>& cameras,
                                  const std::string& view_id) {
    for (const auto& cam : cameras)
        if (cam.view_id == view_id)
            return cam;
    throw DataError("unknown view '" + view_id + "'");
}

void write_family_legend(const fs::path& path, const MaterialLibrary& library) {
    std::ostringstream out;
    for (std::uint16_t f = 1; f <= library.family_count(); ++f)
        out << f << ' ' << library.family_by_ordinal(f) << '\n';
    write_text(path, out.str());
}

} // namespace

std::vector<CameraModel> load_pipeline_cameras(const PipelineConfig& config) {
    CameraFormat format = config.cameras_format;
    fs::path cameras_path = config.cameras;
    if (fs::is_directory(cameras_path))
        cameras_path /= "cameras.txt";
    if (format == CameraFormat::auto_detect) {
        if (cameras_path.extension() == ".json")
            format = CameraFormat::transforms_json;
        else if (cameras_path.filename() == "cameras.txt")
            format = CameraFormat::colmap_text;
        else
            throw DataError("cannot auto-detect camera format of " + cameras_path.string() +
                            "; set cameras_format");
    }

    std::vector<CameraModel> cameras;
    if (format == CameraFormat::transforms_json) {
        cameras = parse_cameras_json(read_text(cameras_path));
    } else {
        const fs::path images_txt = cameras_path.parent_path() / "images.txt";
        cameras = parse_cameras_colmap(read_text(cameras_path), read_text(images_txt));
    }
    if (static_cast<int>(cameras.size()) > config.views)
        cameras.resize(static_cast<std::size_t>(config.views));
    return cameras;
}

void cmd_segment(const PipelineConfig& config) {
    config.validate();
    const StageLog log("segment");
    const auto cameras = load_pipeline_cameras(config);
    const fs::path out_dir = config.output_dir / "masks";
    fs::create_directories(out_dir);

    std::unique_ptr<SegmentationClient> client;
    if (config.provider == ProviderMode::live) {
        if (config.images_dir.empty() || !fs::is_directory(config.images_dir))
            throw DataError("live segmentation requires images_dir");
        client = std::make_unique<SegmentationClient>(config.seg);
    } else if (config.masks_dir.empty()) {
        throw DataError("fixture segmentation requires masks_dir");
    }

    std::size_t written = 0;
    for (const auto& cam : cameras) {
        MaskSet masks;
        if (client) {
            const ImageRgb image = read_image_rgb(find_view_image(config, cam.view_id));
            if (image.width != cam.width || image.height != cam.height)
                throw DataError("image for view '" + cam.view_id +
                                "' does not match the camera dimensions");
            const auto hierarchy = client->segment(image, cam.view_id);
            masks = select_level(hierarchy);
        } else {
            const fs::path label_png = config.masks_dir / (cam.view_id + ".png");
            if (!fs::exists(label_png)) {
                log.line("view=" + cam.view_id + " skipped (no mask file)");
                continue;
            }
            masks = load_mask_set(label_png, config.masks_dir / (cam.view_id + ".meta"),
                                  cam.view_id, cam.width, cam.height);
        }
        const MaskSet filtered = filter_masks(masks, filter_params(config));
        save_mask_set(out_dir / (cam.view_id + ".png"), out_dir / (cam.view_id + ".meta"),
                      filtered);
        ++written;
        log.line("view=" + cam.view_id + " masks=" + std::to_string(filtered.masks.size()));
    }
    if (written == 0)
        throw DataError("segment stage produced no mask files");
}

void cmd_annotate(const PipelineConfig& config) {
    config.validate();
    const StageLog log("annotate");
    const auto cameras = load_pipeline_cameras(config);
    const MaterialLibrary library = MaterialLibrary::load_file(config.library);

    std::unique_ptr<MaterialProvider> provider;
    if (config.provider == ProviderMode::fixture) {
        if (config.fixtures_dir.empty())
            throw DataError("fixture annotation requires fixtures_dir");
        provider = std::make_unique<FixtureProvider>(config.fixtures_dir, library);
    } else {
        if (config.lmm.base_url.empty())
            throw DataError("live annotation requires lmm_base_url");
        provider = std::make_unique<HttpLmmProvider>(config.lmm, library);
    }

    const fs::path maps_dir = config.output_dir / "material_maps";
    const fs::path ann_dir = config.output_dir / "annotations";
    fs::create_directories(maps_dir);
    fs::create_directories(ann_dir);

    // Masks produced by the segment stage win over raw input masks.
    const fs::path seg_dir = config.output_dir / "masks";

    AnnotateParams params;
    params.min_segment_area_frac = config.min_segment_area_frac;
    params.workers = config.workers;

    std::size_t annotated = 0;
    for (const auto& cam : cameras) {
        fs::path label_png = seg_dir / (cam.view_id + ".png");
        fs::path meta = seg_dir / (cam.view_id + ".meta");
        if (!fs::exists(label_png)) {
            label_png = config.masks_dir / (cam.view_id + ".png");
            meta = config.masks_dir / (cam.view_id + ".meta");
        }
        if (!fs::exists(label_png)) {
            log.line("view=" + cam.view_id + " skipped (no masks)");
            continue;
        }
        const MaskSet masks =
            load_mask_set(label_png, meta, cam.view_id, cam.width, cam.height);

        ImageRgb image;
        const ImageRgb* image_ptr = nullptr;
        if (provider->wants_images()) {
            image = read_image_rgb(find_view_image(config, cam.view_id));
            image_ptr = &image;
        }

        try {
            const ViewAnnotation view =
                annotate_view(cam, image_ptr, masks, library, *provider, params);
            write_label_png(maps_dir / (cam.view_id + ".png"), view.material_map);
            std::ostringstream ann;
            if (!view.object_description.empty())
                ann << "description " << view.object_description << "\n";
            for (const auto& segment : view.segments) {
                if (segment.resolved())
                    ann << segment.segment_id << ' ' << segment.material_id << '\n';
                else
                    ann << "# unresolved segment " << segment.segment_id << " (\""
                        << segment.raw_material_text << "\")\n";
            }
            write_text(ann_dir / (cam.view_id + ".txt"), ann.str());
            ++annotated;
            log.line("view=" + cam.view_id +
                     " segments=" + std::to_string(view.segments.size()));
        } catch (const DataError& e) {
            log.line("view=" + cam.view_id + " unusable: " + e.what());
        }
    }
    if (annotated == 0)
        throw DataError("annotate stage produced no material maps");

    std::ostringstream legend;
    for (const auto& rec : library.records())
        legend << library.ordinal_of(rec.material_id) << ' ' << rec.material_id << ' '
               << rec.family << '\n';
    write_text(maps_dir / "legend.txt", legend.str());
}

void cmd_lift(const PipelineConfig& config) {
    config.validate();
    const StageLog log("lift");
    const GaussianCloud cloud = load_cloud(config);
    const MaterialLibrary library = MaterialLibrary::load_file(config.library);
    const auto all_cameras = load_pipeline_cameras(config);
    const fs::path maps_dir = config.output_dir / "material_maps";

    std::vector<CameraModel> cameras;
    std::vector<LabelGrid> maps;
    std::vector<fs::path> map_files;
    for (const auto& cam : all_cameras) {
        const fs::path map_path = maps_dir / (cam.view_id + ".png");
        if (!fs::exists(map_path))
            continue;
        maps.push_back(read_label_png(map_path));
        cameras.push_back(cam);
        map_files.push_back(map_path);
    }
    if (cameras.empty())
        throw DataError("no material maps under " + maps_dir.string() +
                        "; run the annotate stage first");
    log.line("views=" + std::to_string(cameras.size()) +
             " gaussians=" + std::to_string(cloud.count));

    LiftParams params;
    params.render = render_params(config);
    params.visibility = {config.tol_rel, -1.0};
    params.propagate_k = config.propagate_k;
    params.workers = config.workers;
    params.keep_votes = config.dump_intermediates;
    params.keep_depth_maps = config.dump_intermediates;

    const LiftResult result = lift(cloud, cameras, maps, library, params);
    log.line("voted=" + std::to_string(result.voted) +
             " propagated=" + std::to_string(result.propagated));

    AnnotatedScene scene{&cloud, &result.field, &library, {}};
    for (const auto& cam : cameras)
        scene.provenance.views.push_back(cam.view_id);
    std::vector<fs::path> inputs{config.scene,     config.cameras,      config.library,
                                 config.gripper,   config.masks_dir,    config.fixtures_dir,
                                 config.images_dir};
    inputs.insert(inputs.end(), map_files.begin(), map_files.end());
    scene.provenance.config_hash = config_hash(config, inputs);
    scene.provenance.timestamp = timestamp_utc();

    fs::create_directories(config.output_dir);
    write_bytes(config.output_dir / "annotated.ply", export_annotated_ply(scene));
    write_text(config.output_dir / "manifest.txt", export_manifest(scene));
    write_text(config.output_dir / "summary.txt", export_summary(scene));

    if (config.dump_intermediates) {
        std::ostringstream votes;
        for (const auto& vote : result.votes)
            for (const auto& [view, ordinal] : vote.observations)
                votes << vote.gaussian_index << ' ' << cameras[static_cast<std::size_t>(view)].view_id
                      << ' ' << ordinal << '\n';
        write_text(config.output_dir / "votes.txt", votes.str());
        const fs::path depth_dir = config.output_dir / "depth";
        fs::create_directories(depth_dir);
        for (const auto& depth : result.depth_maps)
            write_depth_grid(depth_dir / (depth.view_id + ".gsdm"), depth.depth);
    }
}

void cmd_render_materials(const PipelineConfig& config, const std::string& view_id) {
    config.validate();
    const StageLog log("render-materials");
    if (view_id.empty())
        throw DataError("render-materials needs a view id (flag or eval_view in the config)");
    const LoadedScene scene = load_annotated(config);
    const auto cameras = load_pipeline_cameras(config);
    const CameraModel& cam = camera_by_view(cameras, view_id);

    const LabelRender render =
        render_labels(scene.cloud, scene.field, scene.library, cam, render_params(config));
    const fs::path out_dir = config.output_dir / "renders";
    fs::create_directories(out_dir);
    write_label_png(out_dir / (view_id + ".png"), render.labels);
    write_family_legend(out_dir / "legend.txt", scene.library);
    log.line("view=" + view_id);
}

void cmd_physics(const PipelineConfig& config) {
    config.validate();
    const StageLog log("physics");
    if (config.gripper.empty())
        throw DataError("physics stage requires a gripper profile (config key 'gripper')");
    const GripperProfile gripper = GripperProfile::load_file(config.gripper);
    const LoadedScene scene = load_annotated(config);

    GraspOverrides overrides;
    overrides.area = config.surface_area;
    overrides.thickness = config.thickness;
    overrides.kappa_max = config.kappa_max;
    overrides.contact_point = config.grasp_contact;
    overrides.grasp_axis = config.grasp_axis;

    VolumeParams volume;
    volume.voxel_size = config.voxel_size;
    volume.knn = config.propagate_k;
    volume.workers = config.workers;

    const GraspReport report =
        plan_grasp(scene.cloud, scene.field, scene.library, gripper, overrides, volume);
    std::ostringstream out;
    out << report.render_text(scene.library);
    out << "\nsummary\n-------\n" << export_summary({&scene.cloud, &scene.field, &scene.library, {}},
                                                    &report.decomposition);
    write_text(config.output_dir / "physics_report.txt", out.str());
    log.line("mass_kg=" + std::to_string(report.mass) +
             " f_star=" + std::to_string(report.plan.f_star));

    if (!config.hardness_view.empty() && !config.hardness_points.empty()) {
        const auto cameras = load_pipeline_cameras(config);
        const CameraModel& cam = camera_by_view(cameras, config.hardness_view);
        const DepthMap depth = render_depth(scene.cloud, cam, render_params(config));
        std::ostringstream hard;
        hard << "# u v material shore_scale native_mid unified\n";
        for (const auto& [u, v] : config.hardness_points) {
            try {
                const HardnessSample s =
                    hardness_at(u, v, scene.cloud, scene.field, depth, scene.library);
                hard << u << ' ' << v << ' ' << s.material_id << ' '
                     << (s.scale == ShoreScale::A ? 'A' : 'D') << ' ' << s.native_mid << ' '
                     << s.unified << '\n';
            } catch (const DataError& e) {
                hard << u << ' ' << v << " - - - - # " << e.what() << '\n';
            }
        }
        write_text(config.output_dir / "hardness.txt", hard.str());
    }
}

void cmd_evaluate(const PipelineConfig& config) {
    config.validate();
    const StageLog log("evaluate");
    if (config.eval_view.empty())
        throw DataError("evaluate needs eval_view");
    if (config.gt_labels.empty() || config.gt_legend.empty())
        throw DataError("evaluate needs gt_labels and gt_legend");

    const LoadedScene scene = load_annotated(config);
    const auto cameras = load_pipeline_cameras(config);
    const CameraModel& cam = camera_by_view(cameras, config.eval_view);
    const LabelRender pred =
        render_labels(scene.cloud, scene.field, scene.library, cam, render_params(config));

    // Ground truth arrives with its own ordinal legend; remap to the
    // canonical family ordinals.
    const LabelGrid gt_raw = read_label_png(config.gt_labels);
    if (gt_raw.width != cam.width || gt_raw.height != cam.height)
        throw DataError("ground-truth labels do not match the evaluation view dimensions");
    std::map<std::uint16_t, std::uint16_t> remap;
    {
        std::istringstream legend(read_text(config.gt_legend));
        std::string line;
        while (std::getline(legend, line)) {
            if (line.empty() || line[0] == '#')
                continue;
            std::istringstream ls(line);
            int ordinal;
            std::string family;
            if (!(ls >> ordinal >> family))
                throw ParseError("malformed legend line '" + line + "'");
            remap[static_cast<std::uint16_t>(ordinal)] = scene.library.family_ordinal(family);
        }
    }
    LabelGrid gt(gt_raw.width, gt_raw.height, 0);
    for (std::size_t i = 0; i < gt.data.size(); ++i) {
        if (gt_raw.data[i] == 0)
            continue;
        auto it = remap.find(gt_raw.data[i]);
        if (it == remap.end())
            throw DataError("ground-truth ordinal " + std::to_string(gt_raw.data[i]) +
                            " missing from the legend");
        gt.data[i] = it->second;
    }

    const IouReport report = miou(pred.labels, gt);
    std::ostringstream text, csv;
    text.precision(6);
    csv.precision(6);
    text << "evaluation view: " << config.eval_view << "\n";
    text << "miou: " << report.miou << "\n\nper-class IoU:\n";
    csv << "class,iou,intersection,union\n";
    for (const auto& [cls, iou] : report.per_class) {
        const auto& [inter, uni] = report.counts.at(cls);
        text << "  " << scene.library.family_by_ordinal(cls) << ": " << iou << " (" << inter
             << "/" << uni << ")\n";
        csv << scene.library.family_by_ordinal(cls) << ',' << iou << ',' << inter << ',' << uni
            << '\n';
    }
    write_text(config.output_dir / "metrics.txt", text.str());
    write_text(config.output_dir / "metrics.csv", csv.str());
    log.line("miou=" + std::to_string(report.miou));
}

void cmd_pipeline_run(const PipelineConfig& config) {
    cmd_segment(config);
    cmd_annotate(config);
    cmd_lift(config);
    if (!config.eval_view.empty())
        cmd_render_materials(config, config.eval_view);
    if (!config.gripper.empty())
        cmd_physics(config);
    if (!config.gt_labels.empty() && !config.gt_legend.empty() && !config.eval_view.empty())
        cmd_evaluate(config);
}

} // namespace gsprop
