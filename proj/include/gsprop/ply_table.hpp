#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gsprop {

enum class PlyType : std::uint8_t { i8, u8, i16, u16, i32, u32, f32, f64 };

std::size_t ply_type_size(PlyType t);
std::string_view ply_type_name(PlyType t);

// One vertex property stored as a packed little-endian column.
struct PlyColumn {
    std::string name;
    PlyType type = PlyType::f32;
    std::vector<std::byte> bytes;

    std::size_t count() const { return bytes.size() / ply_type_size(type); }

    // Converting read of element i.
    template <typename T>
    T get(std::size_t i) const {
        const std::byte* p = bytes.data() + i * ply_type_size(type);
        auto load = [&](auto v) {
            std::memcpy(&v, p, sizeof v);
            return static_cast<T>(v);
        };
        switch (type) {
        case PlyType::i8: return load(std::int8_t{});
        case PlyType::u8: return load(std::uint8_t{});
        case PlyType::i16: return load(std::int16_t{});
        case PlyType::u16: return load(std::uint16_t{});
        case PlyType::i32: return load(std::int32_t{});
        case PlyType::u32: return load(std::uint32_t{});
        case PlyType::f32: return load(float{});
        case PlyType::f64: return load(double{});
        }
        return T{};
    }

    template <typename T>
    void push(T v) {
        const auto* p = reinterpret_cast<const std::byte*>(&v);
        bytes.insert(bytes.end(), p, p + sizeof v);
    }
};

// The vertex element of a PLY file as typed columns. Column order matches the
// property order in the header, so a table round-trips byte-for-byte.
struct PlyTable {
    std::size_t count = 0;
    std::vector<PlyColumn> columns;

    const PlyColumn* find(std::string_view name) const;
    bool has(std::string_view name) const { return find(name) != nullptr; }
};

// Accepts format binary_little_endian or ascii, a single `vertex` element,
// scalar properties only. Throws ParseError with a byte offset on malformed
// headers, unknown types, and truncated payloads.
PlyTable read_ply(std::span<const std::byte> bytes);

// Always emits format binary_little_endian 1.0.
std::vector<std::byte> write_ply(const PlyTable& table);

} // namespace gsprop
