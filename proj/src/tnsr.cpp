#include "recon/tnsr.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "recon/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "TNSR I/O assumes a little-endian host");

namespace recon {

namespace {

template <typename T>
void write_raw(std::ostream& out, const T* data, size_t n) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(T)));
}

template <typename T>
void read_raw(std::istream& in, T* data, size_t n) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(T)));
    if (!in) throw DataError("truncated TNSR payload");
}

}  // namespace

void write_tnsr(std::ostream& out, const Tnsr& t) {
    out.write("TNSR", 4);
    uint8_t version = 1, dtype = static_cast<uint8_t>(t.dtype),
            rank = static_cast<uint8_t>(t.dims.size());
    write_raw(out, &version, 1);
    write_raw(out, &dtype, 1);
    write_raw(out, &rank, 1);
    write_raw(out, t.dims.data(), t.dims.size());
    size_t n = t.element_count();
    switch (t.dtype) {
        case TnsrType::f32: {
            std::vector<float> tmp(t.f.begin(), t.f.end());
            if (tmp.size() != n) throw ArgumentError("TNSR payload/dims mismatch");
            write_raw(out, tmp.data(), n);
            break;
        }
        case TnsrType::f64:
            if (t.f.size() != n) throw ArgumentError("TNSR payload/dims mismatch");
            write_raw(out, t.f.data(), n);
            break;
        case TnsrType::u8:
            if (t.u.size() != n) throw ArgumentError("TNSR payload/dims mismatch");
            write_raw(out, t.u.data(), n);
            break;
        case TnsrType::i32:
            if (t.i.size() != n) throw ArgumentError("TNSR payload/dims mismatch");
            write_raw(out, t.i.data(), n);
            break;
    }
    if (!out) throw DataError("TNSR write failed");
}

Tnsr read_tnsr(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "TNSR", 4) != 0)
        throw DataError("bad TNSR magic");
    uint8_t version, dtype, rank;
    read_raw(in, &version, 1);
    read_raw(in, &dtype, 1);
    read_raw(in, &rank, 1);
    if (version != 1) throw DataError("unsupported TNSR version");
    if (dtype > 3) throw DataError("unsupported TNSR dtype");
    Tnsr t;
    t.dtype = static_cast<TnsrType>(dtype);
    t.dims.resize(rank);
    read_raw(in, t.dims.data(), rank);
    size_t n = t.element_count();
    switch (t.dtype) {
        case TnsrType::f32: {
            std::vector<float> tmp(n);
            read_raw(in, tmp.data(), n);
            t.f.assign(tmp.begin(), tmp.end());
            break;
        }
        case TnsrType::f64:
            t.f.resize(n);
            read_raw(in, t.f.data(), n);
            break;
        case TnsrType::u8:
            t.u.resize(n);
            read_raw(in, t.u.data(), n);
            break;
        case TnsrType::i32:
            t.i.resize(n);
            read_raw(in, t.i.data(), n);
            break;
    }
    return t;
}

void save_tnsr(const std::string& path, const Tnsr& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write TNSR file: " + path);
    write_tnsr(out, t);
}

Tnsr load_tnsr(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open TNSR file: " + path);
    return read_tnsr(in);
}

Tnsr tnsr_f32(std::vector<uint32_t> dims, std::vector<double> values) {
    Tnsr t;
    t.dtype = TnsrType::f32;
    t.dims = std::move(dims);
    t.f = std::move(values);
    return t;
}

Tnsr tnsr_f64(std::vector<uint32_t> dims, std::vector<double> values) {
    Tnsr t;
    t.dtype = TnsrType::f64;
    t.dims = std::move(dims);
    t.f = std::move(values);
    return t;
}

Tnsr tnsr_u8(std::vector<uint32_t> dims, std::vector<uint8_t> values) {
    Tnsr t;
    t.dtype = TnsrType::u8;
    t.dims = std::move(dims);
    t.u = std::move(values);
    return t;
}

Tnsr tnsr_i32(std::vector<uint32_t> dims, std::vector<int32_t> values) {
    Tnsr t;
    t.dtype = TnsrType::i32;
    t.dims = std::move(dims);
    t.i = std::move(values);
    return t;
}

}  // namespace recon
