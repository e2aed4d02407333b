#include "gsprop/ply_table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "gsprop/error.hpp"

namespace gsprop {

std::size_t ply_type_size(PlyType t) {
    switch (t) {
    case PlyType::i8:
    case PlyType::u8: return 1;
    case PlyType::i16:
    case PlyType::u16: return 2;
    case PlyType::i32:
    case PlyType::u32:
    case PlyType::f32: return 4;
    case PlyType::f64: return 8;
    }
    return 0;
}

std::string_view ply_type_name(PlyType t) {
    switch (t) {
    case PlyType::i8: return "char";
    case PlyType::u8: return "uchar";
    case PlyType::i16: return "short";
    case PlyType::u16: return "ushort";
    case PlyType::i32: return "int";
    case PlyType::u32: return "uint";
    case PlyType::f32: return "float";
    case PlyType::f64: return "double";
    }
    return "?";
}

const PlyColumn* PlyTable::find(std::string_view name) const {
    for (const auto& c : columns)
        if (c.name == name)
            return &c;
    return nullptr;
}

namespace {

bool parse_type(std::string_view word, PlyType& out) {
    struct Alias {
        std::string_view name;
        PlyType type;
    };
    static constexpr Alias aliases[] = {
        {"char", PlyType::i8},    {"int8", PlyType::i8},
        {"uchar", PlyType::u8},   {"uint8", PlyType::u8},
        {"short", PlyType::i16},  {"int16", PlyType::i16},
        {"ushort", PlyType::u16}, {"uint16", PlyType::u16},
        {"int", PlyType::i32},    {"int32", PlyType::i32},
        {"uint", PlyType::u32},   {"uint32", PlyType::u32},
        {"float", PlyType::f32},  {"float32", PlyType::f32},
        {"double", PlyType::f64}, {"float64", PlyType::f64},
    };
    for (const auto& a : aliases) {
        if (word == a.name) {
            out = a.type;
            return true;
        }
    }
    return false;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
            ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
            ++i;
        if (i > start)
            out.push_back(line.substr(start, i - start));
    }
    return out;
}

// Reads one header line; returns false at end of input.
bool next_line(std::string_view text, std::size_t& pos, std::string_view& line) {
    if (pos >= text.size())
        return false;
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) {
        line = text.substr(pos);
        pos = text.size();
    } else {
        line = text.substr(pos, eol - pos);
        pos = eol + 1;
    }
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    return true;
}

void push_ascii_value(PlyColumn& col, std::string_view token, std::size_t offset) {
    auto bad = [&] { throw ParseError("invalid ascii value for property '" + col.name + "'", offset); };
    if (col.type == PlyType::f32 || col.type == PlyType::f64) {
        double v = 0;
        auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
        if (ec != std::errc{} || p != token.data() + token.size())
            bad();
        if (col.type == PlyType::f32)
            col.push(static_cast<float>(v));
        else
            col.push(v);
        return;
    }
    long long v = 0;
    auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || p != token.data() + token.size())
        bad();
    switch (col.type) {
    case PlyType::i8: col.push(static_cast<std::int8_t>(v)); break;
    case PlyType::u8: col.push(static_cast<std::uint8_t>(v)); break;
    case PlyType::i16: col.push(static_cast<std::int16_t>(v)); break;
    case PlyType::u16: col.push(static_cast<std::uint16_t>(v)); break;
    case PlyType::i32: col.push(static_cast<std::int32_t>(v)); break;
    case PlyType::u32: col.push(static_cast<std::uint32_t>(v)); break;
    default: break;
    }
}

} // namespace

PlyTable read_ply(std::span<const std::byte> bytes) {
    std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    std::size_t pos = 0;
    std::string_view line;

    if (!next_line(text, pos, line) || split_ws(line) != std::vector<std::string_view>{"ply"})
        throw ParseError("not a PLY file: missing 'ply' magic", 0);

    bool binary = false;
    bool format_seen = false;
    bool in_vertex = false;
    bool vertex_seen = false;
    PlyTable table;

    for (;;) {
        std::size_t line_offset = pos;
        if (!next_line(text, pos, line))
            throw ParseError("unterminated PLY header: no 'end_header'", line_offset);
        auto words = split_ws(line);
        if (words.empty())
            continue;
        if (words[0] == "comment" || words[0] == "obj_info")
            continue;
        if (words[0] == "format") {
            if (words.size() < 3)
                throw ParseError("malformed 'format' line", line_offset);
            if (words[1] == "binary_little_endian")
                binary = true;
            else if (words[1] == "ascii")
                binary = false;
            else
                throw ParseError("unsupported PLY format '" + std::string(words[1]) + "'", line_offset);
            format_seen = true;
        } else if (words[0] == "element") {
            if (words.size() != 3)
                throw ParseError("malformed 'element' line", line_offset);
            if (words[1] != "vertex")
                throw ParseError("unsupported element '" + std::string(words[1]) +
                                     "': only vertex elements are handled",
                                 line_offset);
            if (vertex_seen)
                throw ParseError("duplicate vertex element", line_offset);
            vertex_seen = true;
            in_vertex = true;
            unsigned long long n = 0;
            auto [p, ec] = std::from_chars(words[2].data(), words[2].data() + words[2].size(), n);
            if (ec != std::errc{} || p != words[2].data() + words[2].size())
                throw ParseError("invalid vertex count", line_offset);
            table.count = n;
        } else if (words[0] == "property") {
            if (!in_vertex)
                throw ParseError("property outside of an element", line_offset);
            if (words.size() == 5 && words[1] == "list")
                throw ParseError("list properties are not supported", line_offset);
            if (words.size() != 3)
                throw ParseError("malformed 'property' line", line_offset);
            PlyColumn col;
            if (!parse_type(words[1], col.type))
                throw ParseError("unknown property type '" + std::string(words[1]) + "'", line_offset);
            col.name = std::string(words[2]);
            if (table.find(col.name))
                throw ParseError("duplicate property '" + col.name + "'", line_offset);
            col.bytes.reserve(table.count * ply_type_size(col.type));
            table.columns.push_back(std::move(col));
        } else if (words[0] == "end_header") {
            break;
        } else {
            throw ParseError("unrecognized header line '" + std::string(words[0]) + "'", line_offset);
        }
    }

    if (!format_seen)
        throw ParseError("PLY header missing 'format' line");
    if (!vertex_seen)
        throw ParseError("PLY header missing vertex element");

    if (binary) {
        std::size_t stride = 0;
        for (const auto& c : table.columns)
            stride += ply_type_size(c.type);
        const std::size_t need = table.count * stride;
        if (bytes.size() - pos < need) {
            // Identify which property the stream ran out in.
            const std::size_t have = bytes.size() - pos;
            const std::size_t row = have / stride;
            std::size_t within = have % stride;
            std::string prop = table.columns.empty() ? "?" : table.columns.back().name;
            for (const auto& c : table.columns) {
                if (within < ply_type_size(c.type)) {
                    prop = c.name;
                    break;
                }
                within -= ply_type_size(c.type);
            }
            throw ParseError("truncated PLY payload at vertex " + std::to_string(row) +
                                 ", property '" + prop + "'",
                             bytes.size());
        }
        const std::byte* p = bytes.data() + pos;
        for (std::size_t i = 0; i < table.count; ++i) {
            for (auto& c : table.columns) {
                const std::size_t sz = ply_type_size(c.type);
                c.bytes.insert(c.bytes.end(), p, p + sz);
                p += sz;
            }
        }
    } else {
        for (std::size_t i = 0; i < table.count; ++i) {
            std::size_t line_offset = pos;
            if (!next_line(text, pos, line))
                throw ParseError("truncated PLY payload at vertex " + std::to_string(i), line_offset);
            auto tokens = split_ws(line);
            if (tokens.size() != table.columns.size())
                throw ParseError("vertex " + std::to_string(i) + ": expected " +
                                     std::to_string(table.columns.size()) + " values, got " +
                                     std::to_string(tokens.size()),
                                 line_offset);
            for (std::size_t c = 0; c < table.columns.size(); ++c)
                push_ascii_value(table.columns[c], tokens[c], line_offset);
        }
    }
    return table;
}

std::vector<std::byte> write_ply(const PlyTable& table) {
    for (const auto& c : table.columns) {
        if (c.count() != table.count)
            throw DataError("PLY column '" + c.name + "' has " + std::to_string(c.count()) +
                            " values, expected " + std::to_string(table.count));
    }

    std::string header = "ply\nformat binary_little_endian 1.0\nelement vertex " +
                         std::to_string(table.count) + "\n";
    for (const auto& c : table.columns) {
        header += "property ";
        header += ply_type_name(c.type);
        header += ' ';
        header += c.name;
        header += '\n';
    }
    header += "end_header\n";

    std::size_t stride = 0;
    for (const auto& c : table.columns)
        stride += ply_type_size(c.type);

    std::vector<std::byte> out;
    out.reserve(header.size() + stride * table.count);
    const auto* hp = reinterpret_cast<const std::byte*>(header.data());
    out.insert(out.end(), hp, hp + header.size());
    for (std::size_t i = 0; i < table.count; ++i) {
        for (const auto& c : table.columns) {
            const std::size_t sz = ply_type_size(c.type);
            const std::byte* p = c.bytes.data() + i * sz;
            out.insert(out.end(), p, p + sz);
        }
    }
    return out;
}

} // namespace gsprop
