#include "gsprop/image_io.hpp"

#include <cstring>
#include <fstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "gsprop/error.hpp"

namespace gsprop {

namespace {

ImageRgb from_mat_rgb(const cv::Mat& mat, const std::string& what) {
    if (mat.empty())
        throw ParseError("failed to decode image: " + what);
    cv::Mat bgr;
    if (mat.channels() == 1)
        cv::cvtColor(mat, bgr, cv::COLOR_GRAY2BGR);
    else if (mat.channels() == 4)
        cv::cvtColor(mat, bgr, cv::COLOR_BGRA2BGR);
    else
        bgr = mat;
    if (bgr.depth() != CV_8U)
        bgr.convertTo(bgr, CV_8U);

    ImageRgb out(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x)
            out.at(x, y) = {row[x][2], row[x][1], row[x][0]};
    }
    return out;
}

cv::Mat to_mat_bgr(const ImageRgb& image) {
    cv::Mat mat(image.height, image.width, CV_8UC3);
    for (int y = 0; y < image.height; ++y) {
        auto* row = mat.ptr<cv::Vec3b>(y);
        for (int x = 0; x < image.width; ++x) {
            const Rgb& px = image.at(x, y);
            row[x] = {px.b, px.g, px.r};
        }
    }
    return mat;
}

LabelGrid from_mat_labels(const cv::Mat& mat, const std::string& what) {
    if (mat.empty())
        throw ParseError("failed to decode label image: " + what);
    if (mat.channels() != 1)
        throw ParseError("label image must be single-channel: " + what);
    cv::Mat u16;
    if (mat.depth() == CV_16U)
        u16 = mat;
    else if (mat.depth() == CV_8U)
        mat.convertTo(u16, CV_16U);
    else
        throw ParseError("label image must be 8- or 16-bit unsigned: " + what);

    LabelGrid out(u16.cols, u16.rows);
    for (int y = 0; y < u16.rows; ++y) {
        const auto* row = u16.ptr<std::uint16_t>(y);
        for (int x = 0; x < u16.cols; ++x)
            out.at(x, y) = row[x];
    }
    return out;
}

cv::Mat to_mat_labels(const LabelGrid& labels) {
    cv::Mat mat(labels.height, labels.width, CV_16UC1);
    for (int y = 0; y < labels.height; ++y) {
        auto* row = mat.ptr<std::uint16_t>(y);
        for (int x = 0; x < labels.width; ++x)
            row[x] = labels.at(x, y);
    }
    return mat;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open file: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, const void* data, std::size_t n) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write file: " + path.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out)
        throw DataError("short write: " + path.string());
}

} // namespace

ImageRgb read_image_rgb(const std::filesystem::path& path) {
    auto bytes = read_file_bytes(path);
    cv::Mat mat = cv::imdecode(cv::Mat(1, static_cast<int>(bytes.size()), CV_8U, bytes.data()),
                               cv::IMREAD_COLOR);
    return from_mat_rgb(mat, path.string());
}

void write_image_png(const std::filesystem::path& path, const ImageRgb& image) {
    auto bytes = encode_png(image);
    write_file_bytes(path, bytes.data(), bytes.size());
}

std::vector<std::uint8_t> encode_png(const ImageRgb& image) {
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", to_mat_bgr(image), out))
        throw DataError("PNG encoding failed");
    return out;
}

ImageRgb decode_image_rgb(std::span<const std::uint8_t> bytes) {
    cv::Mat mat = cv::imdecode(
        cv::Mat(1, static_cast<int>(bytes.size()), CV_8U, const_cast<std::uint8_t*>(bytes.data())),
        cv::IMREAD_COLOR);
    return from_mat_rgb(mat, "<memory>");
}

LabelGrid read_label_png(const std::filesystem::path& path) {
    auto bytes = read_file_bytes(path);
    cv::Mat mat = cv::imdecode(cv::Mat(1, static_cast<int>(bytes.size()), CV_8U, bytes.data()),
                               cv::IMREAD_UNCHANGED);
    return from_mat_labels(mat, path.string());
}

void write_label_png(const std::filesystem::path& path, const LabelGrid& labels) {
    auto bytes = encode_label_png(labels);
    write_file_bytes(path, bytes.data(), bytes.size());
}

std::vector<std::uint8_t> encode_label_png(const LabelGrid& labels) {
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", to_mat_labels(labels), out))
        throw DataError("PNG encoding failed");
    return out;
}

LabelGrid decode_label_png(std::span<const std::uint8_t> bytes) {
    cv::Mat mat = cv::imdecode(
        cv::Mat(1, static_cast<int>(bytes.size()), CV_8U, const_cast<std::uint8_t*>(bytes.data())),
        cv::IMREAD_UNCHANGED);
    return from_mat_labels(mat, "<memory>");
}

void write_depth_grid(const std::filesystem::path& path, const FloatGrid& depth) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write file: " + path.string());
    const char magic[4] = {'G', 'S', 'D', 'M'};
    const std::uint32_t w = static_cast<std::uint32_t>(depth.width);
    const std::uint32_t h = static_cast<std::uint32_t>(depth.height);
    out.write(magic, 4);
    out.write(reinterpret_cast<const char*>(&w), 4);
    out.write(reinterpret_cast<const char*>(&h), 4);
    out.write(reinterpret_cast<const char*>(depth.data.data()),
              static_cast<std::streamsize>(depth.data.size() * sizeof(float)));
    if (!out)
        throw DataError("short write: " + path.string());
}

FloatGrid read_depth_grid(const std::filesystem::path& path) {
    auto bytes = read_file_bytes(path);
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "GSDM", 4) != 0)
        throw ParseError("not a depth grid file: " + path.string(), 0);
    std::uint32_t w = 0, h = 0;
    std::memcpy(&w, bytes.data() + 4, 4);
    std::memcpy(&h, bytes.data() + 8, 4);
    const std::size_t need = 12 + std::size_t(w) * h * sizeof(float);
    if (bytes.size() != need)
        throw ParseError("depth grid payload size mismatch: " + path.string(), bytes.size());
    FloatGrid out(static_cast<int>(w), static_cast<int>(h));
    std::memcpy(out.data.data(), bytes.data() + 12, std::size_t(w) * h * sizeof(float));
    return out;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    static constexpr char alphabet[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back(alphabet[v & 63]);
    }
    if (i + 1 == bytes.size()) {
        const std::uint32_t v = bytes[i] << 16;
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    std::uint32_t acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n' || c == '\r')
            continue;
        const int v = value_of(c);
        if (v < 0)
            throw ParseError("invalid base64 character");
        acc = (acc << 6) | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
        }
    }
    return out;
}

} // namespace gsprop
